"""Good-order pairs, the Best Fit / optimum matching graph, and monotonicity.

Everything here checks structural facts about Best Fit on instances whose
items all exceed 1/3, where each bin holds at most two items. The checks
run on concrete instances and orders; the fuzzers draw many of them.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .engine import exact_expectation, monte_carlo_expectation
from .instances import LmInstance, instance_to_dict, random_lm_instance
from .packing import (
    ONE,
    THIRD,
    DomainError,
    Instance,
    SizeClass,
    TieRule,
    best_fit_groups,
    classify,
    count_bins,
    integer_scale,
)

BOTH_TIE_RULES = (TieRule.EARLIEST, TieRule.LATEST)


def _scaled(sizes) -> tuple[list[int], int]:
    scaled, cap = integer_scale(list(sizes) + [ONE])
    return scaled[:-1], cap


def _check_order(order, n: int) -> tuple[int, ...]:
    order = tuple(order)
    if sorted(order) != list(range(n)):
        raise DomainError("not a permutation of the item ids")
    return order


def good_order_count(instance: LmInstance, order) -> int:
    """Number of LM-pairs whose large item arrives before its medium item."""
    order = _check_order(order, instance.n)
    position = {item: pos for pos, item in enumerate(order)}
    return sum(1 for large, medium in instance.lm_pairs if position[large] < position[medium])


def _is_lm(sizes, ids) -> bool:
    if len(ids) != 2:
        return False
    classes = sorted(classify(sizes[i]).value for i in ids)
    return classes == ["L", "M"]


def lm_bin_count(packing) -> int:
    """Bins holding exactly one large and one medium item."""
    return sum(1 for b in packing.bins if _is_lm(packing.sizes, b.item_ids))


def _lm_groups(sizes, groups) -> int:
    return sum(1 for g in groups if _is_lm(sizes, g))


@dataclass(frozen=True)
class Lemma3Result:
    holds: bool
    good_pairs: int
    lm_bins: int


def verify_lemma3(instance: LmInstance, order, tie_rule: TieRule = TieRule.EARLIEST) -> Lemma3Result:
    """Best Fit has at least as many LM-bins as there are good-order pairs."""
    order = _check_order(order, instance.n)
    scaled, cap = _scaled(instance.items)
    groups = best_fit_groups(scaled, order, cap, tie_rule)
    x = good_order_count(instance, order)
    y = _lm_groups(instance.items, groups)
    return Lemma3Result(y >= x, x, y)


@dataclass(frozen=True)
class Eq1Result:
    bf: int
    k: int
    lm_bins: int
    predicted: int

    @property
    def holds(self) -> bool:
        return self.bf == self.predicted


def eq1_accounting(instance: LmInstance, order, tie_rule: TieRule = TieRule.EARLIEST) -> Eq1Result:
    """Compare BF with k + ceil((k - Y)/2), Y the number of LM-bins.

    Y LM-bins, k - Y bins with a lone large item, and the leftover mediums
    two per bin (one may be alone).
    """
    order = _check_order(order, instance.n)
    scaled, cap = _scaled(instance.items)
    groups = best_fit_groups(scaled, order, cap, tie_rule)
    k = instance.k
    y = _lm_groups(instance.items, groups)
    return Eq1Result(len(groups), k, y, k + -(-(k - y) // 2))


# Match graph


@dataclass
class MatchGraph:
    """Graph on the items visible after ``round`` arrivals.

    ``bf_edges`` are (medium, large) pairs sharing a Best Fit bin;
    ``opt_edges`` are visible LM-pairs as (medium, large, good_order).
    """

    round: int
    mediums: frozenset[int]
    larges: frozenset[int]
    bf_edges: list[tuple[int, int]]
    opt_edges: list[tuple[int, int, bool]]
    sizes: dict[int, Fraction] = field(repr=False)

    @property
    def vertices(self) -> frozenset[int]:
        return self.mediums | self.larges

    def bf_partner(self) -> dict[int, int]:
        out = {}
        for m, l in self.bf_edges:
            out[m] = l
            out[l] = m
        return out

    def opt_partner(self) -> dict[int, tuple[int, bool]]:
        out = {}
        for m, l, good in self.opt_edges:
            out[m] = (l, good)
            out[l] = (m, good)
        return out

    def components(self) -> list[frozenset[int]]:
        parent = {v: v for v in self.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for m, l in self.bf_edges:
            parent[find(m)] = find(l)
        for m, l, _ in self.opt_edges:
            parent[find(m)] = find(l)
        groups: dict[int, set[int]] = {}
        for v in self.vertices:
            groups.setdefault(find(v), set()).add(v)
        return sorted((frozenset(g) for g in groups.values()), key=min)


def _graph_from_groups(instance: LmInstance, order, t: int, groups) -> MatchGraph:
    visible = order[:t]
    position = {item: pos for pos, item in enumerate(order)}
    seen = set(visible)
    larges = frozenset(i for i in visible if i in set(instance.large_ids))
    mediums = frozenset(i for i in visible if i in set(instance.medium_ids))
    bf_edges = []
    for g in groups:
        if len(g) == 2:
            a, b = g
            if a in mediums and b in larges:
                bf_edges.append((a, b))
            elif b in mediums and a in larges:
                bf_edges.append((b, a))
    opt_edges = [
        (m, l, position[l] < position[m])
        for l, m in instance.lm_pairs
        if l in seen and m in seen
    ]
    return MatchGraph(t, mediums, larges, bf_edges, opt_edges, dict(enumerate(instance.items)))


def build_match_graph(
    instance: LmInstance, order, t: int, tie_rule: TieRule = TieRule.EARLIEST
) -> MatchGraph:
    order = _check_order(order, instance.n)
    if not 1 <= t <= instance.n:
        raise DomainError(f"round {t} outside 1..{instance.n}")
    scaled, cap = _scaled(instance.items)
    groups = best_fit_groups(scaled, order[:t], cap, tie_rule)
    return _graph_from_groups(instance, order, t, groups)


def round_graphs(instance: LmInstance, order, tie_rule: TieRule = TieRule.EARLIEST):
    """Yield the match graph after every round 1..n of one Best Fit run."""
    order = _check_order(order, instance.n)
    scaled, cap = _scaled(instance.items)
    groups: list[list[int]] = []
    loads: list[int] = []
    latest = tie_rule is TieRule.LATEST
    for t, item in enumerate(order, start=1):
        x = scaled[item]
        best, best_load = -1, -1
        for index, load in enumerate(loads):
            if load + x <= cap and (load > best_load or (latest and load == best_load)):
                best, best_load = index, load
        if best < 0:
            groups.append([item])
            loads.append(x)
        else:
            groups[best].append(item)
            loads[best] += x
        yield _graph_from_groups(instance, order, t, groups)


@dataclass(frozen=True)
class ComponentCount:
    vertices: frozenset[int]
    bf_edges: int
    good_opt_edges: int


@dataclass(frozen=True)
class Claim1Result:
    holds: bool
    per_component: list[ComponentCount]


def verify_claim1(graph: MatchGraph) -> Claim1Result:
    """In every component, BF-edges are at least the good-order OPT-edges."""
    comps = []
    for comp in graph.components():
        bf = sum(1 for m, _ in graph.bf_edges if m in comp)
        good = sum(1 for m, _, g in graph.opt_edges if g and m in comp)
        comps.append(ComponentCount(comp, bf, good))
    return Claim1Result(all(c.bf_edges >= c.good_opt_edges for c in comps), comps)


@dataclass(frozen=True)
class AlternatingPath:
    larges: tuple[int, ...]
    mediums: tuple[int, ...]
    first: Fraction
    last: Fraction

    @property
    def holds(self) -> bool:
        return self.last >= self.first


@dataclass(frozen=True)
class Claim2Result:
    holds: bool
    witnesses: list[AlternatingPath]


def alternating_paths(graph: MatchGraph) -> list[AlternatingPath]:
    """Maximal paths b_1, a_1, b_2, ..., b_w with good-order OPT-edges {a_j, b_j}
    and BF-edges {a_j, b_{j+1}}.

    Maximal means b_1 has no BF-edge and b_w has no OPT-edge, so each path
    is found by walking from its unique b_1 end.
    """
    bf = graph.bf_partner()
    opt = graph.opt_partner()
    paths = []
    for start in sorted(graph.larges):
        if start in bf:
            continue
        larges, mediums = [start], []
        current = start
        while True:
            if current not in opt:
                paths.append(
                    AlternatingPath(
                        tuple(larges), tuple(mediums), graph.sizes[larges[0]], graph.sizes[larges[-1]]
                    )
                )
                break
            medium, good = opt[current]
            if not good or medium not in bf:
                break
            current = bf[medium]
            mediums.append(medium)
            larges.append(current)
    return paths


def verify_claim2(graph: MatchGraph) -> Claim2Result:
    """Along every maximal good alternating path the last large item is at
    least as big as the first."""
    paths = alternating_paths(graph)
    return Claim2Result(all(p.holds for p in paths), paths)


# Expectation bounds


@lru_cache(maxsize=None)
def good_order_statistics(k: int) -> tuple[Fraction, Fraction]:
    """E[X] and Pr[(k - X) odd] over all (2k)! orders, X the good-order count.

    Depends only on k: ids 0..k-1 are larges, k..2k-1 their mediums.
    """
    total = 0
    sum_x = 0
    odd = 0
    for order in itertools.permutations(range(2 * k)):
        position = {item: pos for pos, item in enumerate(order)}
        x = sum(1 for i in range(k) if position[i] < position[k + i])
        total += 1
        sum_x += x
        odd += (k - x) % 2
    return Fraction(sum_x, total), Fraction(odd, total)


def _stats_for(instance: LmInstance) -> tuple[Fraction, Fraction]:
    # Relabel so that pair i is (i, k + i); the statistic ignores sizes.
    return good_order_statistics(instance.k)


@dataclass(frozen=True)
class Theorem1Result:
    expectation: Fraction | float
    bound: Fraction
    expected_good_pairs: Fraction | None
    odd_parity_probability: Fraction | None
    holds: bool
    stderr: float | None = None


def theorem1_bound(k: int) -> Fraction:
    return Fraction(5, 4) * k + Fraction(1, 4)


def theorem1_check(instance: LmInstance) -> Theorem1Result:
    """Exact E[BF] against (5/4) k + 1/4, plus E[X] = k/2 and Pr[xi = 1] = 1/2."""
    report = exact_expectation(instance, "best-fit", opt_value=instance.k)
    bound = theorem1_bound(instance.k)
    ex, odd = _stats_for(instance)
    holds = (
        report.expectation <= bound
        and ex == Fraction(instance.k, 2)
        and odd == Fraction(1, 2)
    )
    return Theorem1Result(report.expectation, bound, ex, odd, holds)


def theorem1_monte_carlo(
    instance: LmInstance, samples: int = 100_000, seed: int = 0, sigmas: float = 4.0
) -> Theorem1Result:
    """Sampled E[BF] must not exceed the bound by more than ``sigmas`` stderr."""
    report = monte_carlo_expectation(instance, "best-fit", samples, seed, opt_value=instance.k)
    bound = theorem1_bound(instance.k)
    holds = report.expectation <= float(bound) + sigmas * report.stderr
    return Theorem1Result(report.expectation, bound, None, None, holds, report.stderr)


# Monotonicity


@dataclass(frozen=True)
class MonotonicityResult:
    holds: bool
    bf: int
    bf_inflated: int
    guaranteed: bool


def _sizes(x) -> tuple[Fraction, ...]:
    return x.items if isinstance(x, Instance) else tuple(x)


def _check_domination(small, big) -> None:
    if len(small) != len(big):
        raise DomainError("lists differ in length")
    if any(b < a for a, b in zip(small, big)):
        raise DomainError("second list must dominate the first item by item")


def monotonicity_check(I, I_inflated, order=None, tie_rule: TieRule = TieRule.EARLIEST) -> MonotonicityResult:
    """Compare BF(I) and BF(I') under the same arrival order.

    ``guaranteed`` is True when every item of I exceeds 1/3; only then is a
    failure a defect rather than a genuine non-monotonicity witness.
    """
    a, b = _sizes(I), _sizes(I_inflated)
    _check_domination(a, b)
    order = tuple(range(len(a))) if order is None else _check_order(order, len(a))
    scaled, cap = _scaled(a + b)
    sa, sb = scaled[: len(a)], scaled[len(a) :]
    bf = len(best_fit_groups(sa, order, cap, tie_rule))
    bf2 = len(best_fit_groups(sb, order, cap, tie_rule))
    return MonotonicityResult(bf <= bf2, bf, bf2, all(x > THIRD for x in a))


class Relation(enum.Enum):
    STAR1 = "star1"
    STAR2 = "star2"
    STAR3 = "star3"
    VIOLATION = "violation"


@dataclass(frozen=True)
class RelationClass:
    kind: Relation
    witness: dict


def _bin_profile(sizes, groups):
    singles = sorted(sizes[g[0]] for g in groups if len(g) == 1)
    doubles = sum(1 for g in groups if len(g) == 2)
    bigger = sum(1 for g in groups if len(g) > 2)
    return singles, doubles, bigger


def _multiset_minus(a, b):
    rest = list(a)
    for x in b:
        if x in rest:
            rest.remove(x)
    return rest


def relation_classify(I, I_inflated, t: int, order=None, tie_rule: TieRule = TieRule.EARLIEST) -> RelationClass:
    """Relate BF(I(t)) and BF(I'(t)) for I' larger than I in one position.

    star1: all 1-bins match by size and the 2-bin counts agree.
    star2: as star1 except one 1-bin {b} against one 1-bin {b'} with b < b'.
    star3: as star1 except one extra 2-bin in BF(I(t)) against two extra
    1-bins in BF(I'(t)).
    """
    a, b = _sizes(I), _sizes(I_inflated)
    _check_domination(a, b)
    if any(x <= THIRD for x in a):
        raise DomainError("relation_classify needs items larger than 1/3")
    differing = [j for j in range(len(a)) if a[j] != b[j]]
    if len(differing) > 1:
        raise DomainError("lists must differ in at most one position")
    if not 0 <= t <= len(a):
        raise DomainError(f"round {t} outside 0..{len(a)}")
    order = tuple(range(len(a))) if order is None else _check_order(order, len(a))
    scaled, cap = _scaled(a + b)
    sa, sb = scaled[: len(a)], scaled[len(a) :]
    ga = best_fit_groups(sa, order[:t], cap, tie_rule)
    gb = best_fit_groups(sb, order[:t], cap, tie_rule)
    s1, d1, big1 = _bin_profile(a, ga)
    s2, d2, big2 = _bin_profile(b, gb)
    only1 = _multiset_minus(s1, s2)
    only2 = _multiset_minus(s2, s1)
    witness = {
        "round": t,
        "only_in_I": [str(x) for x in only1],
        "only_in_I_inflated": [str(x) for x in only2],
        "two_bins": [d1, d2],
    }
    if big1 or big2:
        kind = Relation.VIOLATION
    elif not only1 and not only2 and d1 == d2:
        kind = Relation.STAR1
    elif len(only1) == 1 and len(only2) == 1 and d1 == d2 and only1[0] < only2[0]:
        kind = Relation.STAR2
    elif not only1 and len(only2) == 2 and d1 == d2 + 1:
        kind = Relation.STAR3
    else:
        kind = Relation.VIOLATION
    return RelationClass(kind, witness)


# Fuzzing


@dataclass
class FuzzReport:
    target: str
    trials: int
    seed: int
    checks: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "trials": self.trials,
            "seed": self.seed,
            "checks": self.checks,
            "violations": self.violations,
            "violation_count": len(self.violations),
        }


def _trial_rngs(seed: int, trials: int):
    for child in np.random.SeedSequence(seed).spawn(trials):
        yield np.random.default_rng(child)


def _draw_sizes(rng, n: int, lower: Fraction, denom: int) -> list[Fraction]:
    lo = lower.numerator * denom // lower.denominator + 1
    return [Fraction(int(x), denom) for x in rng.integers(lo, denom + 1, size=n)]


def _inflate(rng, sizes: list[Fraction], positions, denom: int) -> list[Fraction]:
    out = list(sizes)
    for j in positions:
        lo = int(math.floor(out[j] * denom)) + 1
        if lo > denom:
            continue
        out[j] = Fraction(int(rng.integers(lo, denom + 1)), denom)
    return out


def _violates(a, b, order) -> bool:
    return not monotonicity_check(a, b, order).holds


def shrink_monotonicity(a, b, order, lower: Fraction) -> tuple[list, list, list]:
    """Make a monotonicity witness smaller while it stays a violation.

    First drops items, then replaces sizes with simpler fractions, keeping
    every size above ``lower`` and the second list dominating the first.
    """
    a, b, order = list(a), list(b), list(order)
    changed = True
    while changed:
        changed = False
        for j in range(len(a)):
            na = a[:j] + a[j + 1 :]
            nb = b[:j] + b[j + 1 :]
            no = [i - (i > j) for i in order if i != j]
            if na and _violates(na, nb, no):
                a, b, order, changed = na, nb, no, True
                break
    changed = True
    while changed:
        changed = False
        for which, j in itertools.product((0, 1), range(len(a))):
            current = (a, b)[which][j]
            for d in range(2, current.denominator):
                cand = current.limit_denominator(d)
                if cand == current or not lower < cand <= ONE:
                    continue
                na, nb = list(a), list(b)
                (na, nb)[which][j] = cand
                if nb[j] < na[j]:
                    continue
                if _violates(na, nb, order):
                    a, b, changed = na, nb, True
                    break
            if changed:
                break
    return a, b, order


def _perfect_bins(rng, bins: int, lower: Fraction, denom: int) -> list[Fraction]:
    """Items that fill ``bins`` bins exactly, every item above ``lower``."""
    lo = lower.numerator * denom // lower.denominator + 1
    items = []
    for _ in range(bins):
        parts = 3 if 3 * lo <= denom and rng.random() < 0.3 else 2
        while True:
            cuts = sorted(int(c) for c in rng.integers(1, denom, size=parts - 1))
            pieces = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
            if all(x >= lo for x in pieces):
                break
        items.extend(Fraction(x, denom) for x in pieces)
    return items


def _tight_pair(rng, k_max: int, lower: Fraction, denom: int) -> tuple[list, list]:
    """A list whose inflated version packs perfectly.

    The inflated list fills 3..k_max+1 bins exactly; one of its items is then
    shrunk to just below the room left by an item it did not fit with, so
    the smaller list has a new fit option that Best Fit may take.
    """
    big = _perfect_bins(rng, int(rng.integers(3, max(3, k_max) + 2)), lower, denom)
    rng.shuffle(big)
    small = list(big)
    j = int(rng.integers(len(big)))
    blockers = [r for r in range(len(big)) if r != j and big[j] + big[r] > ONE]
    if blockers:
        r = blockers[int(rng.integers(len(blockers)))]
        shrunk = ONE - big[r] - Fraction(int(rng.integers(0, 2)), denom)
        if lower < shrunk < big[j]:
            small[j] = shrunk
    return small, big


def monotonicity_fuzz(
    k_max: int,
    trials: int,
    seed: int = 0,
    allow_small_items: bool = False,
    denom: int = 100,
    check_relation: bool = True,
    shrink: bool = True,
) -> FuzzReport:
    """Random pairs (I, I') with I' >= I item by item, packed in the same order.

    Trials cycle through three generators: uniform sizes with several items
    inflated, uniform sizes with one item inflated, and tight lists whose
    inflated version packs perfectly (one item changed). Items exceed 1/3,
    or 1/4 with ``allow_small_items``, where violations are expected and
    reported as shrunk witnesses. Single-item trials on >1/3 items also
    classify the relation between the two packings after every round.
    """
    lower = Fraction(1, 4) if allow_small_items else THIRD
    report = FuzzReport("monotonicity-small" if allow_small_items else "monotonicity", trials, seed)
    for trial, rng in enumerate(_trial_rngs(seed, trials)):
        mode = trial % 5 if allow_small_items else trial % 3
        if mode >= 2:
            a, b = _tight_pair(rng, k_max, lower, denom)
            single = True
        else:
            n = int(rng.integers(1, 2 * k_max + 1))
            a = _draw_sizes(rng, n, lower, denom)
            single = mode == 1
            if single:
                positions = [int(rng.integers(n))]
            else:
                positions = [j for j in range(n) if rng.random() < 0.5] or [int(rng.integers(n))]
            b = _inflate(rng, a, positions, denom)
        n = len(a)
        order = [int(i) for i in rng.permutation(n)]
        result = monotonicity_check(a, b, order)
        report.checks += 1
        if not result.holds:
            wa, wb, wo = shrink_monotonicity(a, b, order, lower) if shrink else (a, b, order)
            final = monotonicity_check(wa, wb, wo)
            report.violations.append(
                {
                    "kind": "monotonicity",
                    "trial": trial,
                    "I": [str(x) for x in wa],
                    "I_inflated": [str(x) for x in wb],
                    "permutation": wo,
                    "bf": final.bf,
                    "bf_inflated": final.bf_inflated,
                    "original": {
                        "I": [str(x) for x in a],
                        "I_inflated": [str(x) for x in b],
                        "permutation": order,
                    },
                }
            )
        if single and check_relation and not allow_small_items and a != b:
            for t in range(n + 1):
                rel = relation_classify(a, b, t, order)
                report.checks += 1
                if rel.kind is Relation.VIOLATION:
                    report.violations.append(
                        {
                            "kind": "relation",
                            "trial": trial,
                            "I": [str(x) for x in a],
                            "I_inflated": [str(x) for x in b],
                            "permutation": order,
                            "round": t,
                            "classification": rel.kind.value,
                            "witness": rel.witness,
                        }
                    )
    return report


def relation_fuzz(trials: int, seed: int = 0, n_max: int = 12, denom: int = 100) -> FuzzReport:
    """Single-item inflations on >1/3 lists, classified at every round."""
    report = FuzzReport("relation", trials, seed)
    for trial, rng in enumerate(_trial_rngs(seed, trials)):
        n = int(rng.integers(1, n_max + 1))
        a = _draw_sizes(rng, n, THIRD, denom)
        j = int(rng.integers(n))
        b = _inflate(rng, a, [j], denom)
        order = [int(i) for i in rng.permutation(n)]
        for t in range(n + 1):
            rel = relation_classify(a, b, t, order)
            report.checks += 1
            if rel.kind is Relation.VIOLATION:
                report.violations.append(
                    {
                        "kind": "relation",
                        "trial": trial,
                        "I": [str(x) for x in a],
                        "I_inflated": [str(x) for x in b],
                        "permutation": order,
                        "round": t,
                        "classification": rel.kind.value,
                        "witness": rel.witness,
                    }
                )
    return report


def _lm_witness(kind: str, trial: int, inst: LmInstance, order, **extra) -> dict:
    out = {"kind": kind, "trial": trial, "instance": instance_to_dict(inst), "permutation": list(order)}
    out.update(extra)
    return out


def shrink_lm(inst: LmInstance, order, still_fails) -> tuple[LmInstance, tuple[int, ...]]:
    """Drop LM-pairs from a failing (instance, order) while it keeps failing."""
    order = tuple(order)
    changed = True
    while changed and inst.k > 1:
        changed = False
        for pair in inst.lm_pairs:
            drop = set(pair)
            keep = [i for i in range(inst.n) if i not in drop]
            index = {old: new for new, old in enumerate(keep)}
            pairs = tuple((index[l], index[m]) for l, m in inst.lm_pairs if (l, m) != pair)
            cand = LmInstance(tuple(inst.items[i] for i in keep), label=inst.label, lm_pairs=pairs)
            cand_order = tuple(index[i] for i in order if i not in drop)
            if still_fails(cand, cand_order):
                inst, order, changed = cand, cand_order, True
                break
    return inst, order


def _random_lm(rng, k_max: int, trial: int) -> LmInstance:
    k = int(rng.integers(1, k_max + 1))
    # Every third instance uses a coarse grid so equal loads (ties) occur.
    denom = 24 if trial % 3 == 0 else 10**6
    return random_lm_instance(k, rng, denom)


def lemma3_fuzz(k_max: int, trials: int, seed: int = 0, tie_rules=BOTH_TIE_RULES) -> FuzzReport:
    """Random LM instances and orders: Y >= X and BF = k + ceil((k - Y)/2)."""
    report = FuzzReport("lemma3", trials, seed)
    for trial, rng in enumerate(_trial_rngs(seed, trials)):
        inst = _random_lm(rng, k_max, trial)
        order = tuple(int(i) for i in rng.permutation(inst.n))
        for rule in tie_rules:
            res = verify_lemma3(inst, order, rule)
            eq = eq1_accounting(inst, order, rule)
            report.checks += 2
            if not res.holds or not eq.holds:
                def fails(c, o, rule=rule):
                    return not verify_lemma3(c, o, rule).holds or not eq1_accounting(c, o, rule).holds

                si, so = shrink_lm(inst, order, fails)
                report.violations.append(
                    _lm_witness(
                        "lemma3", trial, si, so, tie_rule=rule.value,
                        good_pairs=res.good_pairs, lm_bins=res.lm_bins, bf=eq.bf, predicted=eq.predicted,
                    )
                )
    return report


def lemma3_exhaustive(instance: LmInstance, tie_rules=BOTH_TIE_RULES) -> FuzzReport:
    """Check Y >= X and the bin-count identity on every arrival order."""
    report = FuzzReport("lemma3-exhaustive", math.factorial(instance.n), 0)
    for order in itertools.permutations(range(instance.n)):
        for rule in tie_rules:
            res = verify_lemma3(instance, order, rule)
            eq = eq1_accounting(instance, order, rule)
            report.checks += 2
            if not res.holds or not eq.holds:
                report.violations.append(
                    _lm_witness("lemma3", -1, instance, order, tie_rule=rule.value,
                                good_pairs=res.good_pairs, lm_bins=res.lm_bins)
                )
    return report


def claims_check(instance: LmInstance, order, tie_rule: TieRule = TieRule.EARLIEST) -> list[dict]:
    """Failures of the component and alternating-path inequalities over all rounds."""
    failures = []
    for graph in round_graphs(instance, order, tie_rule):
        c1 = verify_claim1(graph)
        if not c1.holds:
            failures.append({"round": graph.round, "claim": "components"})
        c2 = verify_claim2(graph)
        if not c2.holds:
            bad = [p.larges for p in c2.witnesses if not p.holds]
            failures.append({"round": graph.round, "claim": "alternating-path", "paths": bad})
    return failures


def claims_fuzz(k_max: int, trials: int, seed: int = 0, tie_rules=BOTH_TIE_RULES) -> FuzzReport:
    report = FuzzReport("claims", trials, seed)
    for trial, rng in enumerate(_trial_rngs(seed, trials)):
        inst = _random_lm(rng, k_max, trial)
        order = tuple(int(i) for i in rng.permutation(inst.n))
        for rule in tie_rules:
            failures = claims_check(inst, order, rule)
            report.checks += 2 * inst.n
            if failures:
                si, so = shrink_lm(inst, order, lambda c, o, rule=rule: bool(claims_check(c, o, rule)))
                report.violations.append(
                    _lm_witness("claims", trial, si, so, tie_rule=rule.value, failures=failures)
                )
    return report
