"""Expected bin counts under uniformly random arrival orders and i.i.d. inputs.

Exact modes return :class:`fractions.Fraction` values. Items of equal size
are interchangeable for every heuristic here, so orderings of the size
multiset are treated once each and weighted by how many permutations
produce them.
"""

from __future__ import annotations

import bisect
import csv
import io
import itertools
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import __version__
from .instances import size_to_str
from .opt import DEFAULT_OPT_CAP, opt, opt_exact
from .packing import ALGORITHMS, ONE, THIRD, DomainError, Instance, as_size, count_bins, integer_scale

DEFAULT_ENUMERATION_CAP = 10**7
MC_SHARD_SIZE = 20_000
Z95 = 1.959963984540054


class EnumerationTooLarge(DomainError):
    """Too many orderings to enumerate; use the Monte Carlo estimator instead."""


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def default_threads() -> int:
    env = os.environ.get("ROLLPACK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class ExpectationReport:
    label: str | None
    algorithm: str
    mode: str
    expectation: Fraction | float
    opt: Fraction | int
    ratio: Fraction | float
    distribution: dict[int, Fraction] = field(default_factory=dict)
    permutations_total: int | None = None
    distinct_orderings: int | None = None
    samples: int | None = None
    seed: int | None = None
    stderr: float | None = None
    confidence_interval: tuple[float, float] | None = None

    @property
    def exact(self) -> bool:
        return self.mode in ("exact_enumeration", "iid_exact")

    def count_with(self, bins: int) -> int:
        """Number of the ``permutations_total`` orderings that use ``bins`` bins."""
        share = self.distribution.get(bins, Fraction(0)) * self.permutations_total
        if share.denominator != 1:
            raise ValueError("distribution is not over permutations")
        return int(share)

    def to_dict(self) -> dict:
        def num(x):
            if isinstance(x, Fraction):
                return {"exact": frac_str(x), "approx": float(x)}
            return x

        out = {
            "version": __version__,
            "label": self.label,
            "algorithm": self.algorithm,
            "mode": self.mode,
            "expectation": num(self.expectation),
            "opt": num(self.opt),
            "ratio": num(self.ratio),
            "bin_count_distribution": {
                str(b): (frac_str(p) if isinstance(p, Fraction) else p)
                for b, p in sorted(self.distribution.items())
            },
        }
        for key in ("permutations_total", "distinct_orderings", "samples", "seed", "stderr"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.confidence_interval is not None:
            out["confidence_interval"] = list(self.confidence_interval)
        return out

    def distribution_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["bins", "probability", "probability_float"])
        for bins, p in sorted(self.distribution.items()):
            writer.writerow([bins, frac_str(p) if isinstance(p, Fraction) else p, float(p)])
        return buf.getvalue()


def _sizes(instance) -> tuple[Fraction, ...]:
    if isinstance(instance, Instance):
        return instance.items
    return tuple(as_size(x) for x in instance)


def _label(instance) -> str | None:
    return instance.label if isinstance(instance, Instance) else None


def distinct_orderings(sizes) -> int:
    counts = Counter(sizes).values()
    total = math.factorial(sum(counts))
    for c in counts:
        total //= math.factorial(c)
    return total


def _advance(algorithm: str, state: tuple[int, ...], x: int, cap: int, smallest: int):
    """One online step on the live-bin state; returns (state, opened)."""
    if algorithm == "best-fit":
        loads = list(state)
        pos = bisect.bisect_right(loads, cap - x) - 1
        opened = pos < 0
        new = x if opened else loads.pop(pos) + x
        if new + smallest <= cap:
            bisect.insort(loads, new)
        return tuple(loads), opened
    if algorithm == "first-fit":
        loads = list(state)
        for index, load in enumerate(loads):
            if load + x <= cap:
                if load + x + smallest <= cap:
                    loads[index] = load + x
                else:
                    del loads[index]
                return tuple(loads), False
        if x + smallest <= cap:
            loads.append(x)
        return tuple(loads), True
    if algorithm == "next-fit":
        if state and state[0] + x <= cap:
            return (state[0] + x,), False
        return (x,), True
    raise DomainError(f"unknown algorithm {algorithm!r}")


def _exact_distribution(sizes, algorithm: str) -> dict[int, Fraction]:
    """Distribution of the bin count over uniformly random arrival orders.

    Recurses over the remaining size multiset: the next arrival has a given
    size with probability (remaining copies)/(remaining items). States that
    repeat are shared through a cache.
    """
    if not sizes:
        return {0: Fraction(1)}
    distinct = sorted(set(sizes))
    scaled, cap = integer_scale(distinct + [ONE])
    scaled = scaled[:-1]
    smallest = scaled[0]
    counts0 = tuple(sizes.count(s) for s in distinct)

    @lru_cache(maxsize=None)
    def dist(counts: tuple[int, ...], state: tuple[int, ...]) -> tuple[tuple[int, Fraction], ...]:
        remaining = sum(counts)
        if remaining == 0:
            return ((0, Fraction(1)),)
        acc: dict[int, Fraction] = {}
        for index, c in enumerate(counts):
            if not c:
                continue
            nxt, opened = _advance(algorithm, state, scaled[index], cap, smallest)
            sub = dist(counts[:index] + (c - 1,) + counts[index + 1 :], nxt)
            weight = Fraction(c, remaining)
            for bins, p in sub:
                key = bins + opened
                acc[key] = acc.get(key, Fraction(0)) + weight * p
        return tuple(sorted(acc.items()))

    return dict(dist(counts0, ()))


def exact_expectation(
    instance,
    algorithm: str = "best-fit",
    cap: int = DEFAULT_ENUMERATION_CAP,
    opt_value: int | None = None,
) -> ExpectationReport:
    """Exact E[ALG] over all arrival orders with its bin-count distribution."""
    sizes = _sizes(instance)
    if algorithm not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {algorithm!r}")
    orderings = distinct_orderings(sizes)
    if orderings > cap:
        raise EnumerationTooLarge(
            f"{orderings} distinct orderings exceed the cap {cap}; use monte_carlo_expectation"
        )
    distribution = _exact_distribution(list(sizes), algorithm)
    expectation = sum((b * p for b, p in distribution.items()), Fraction(0))
    if opt_value is None:
        opt_value = opt(sizes).bin_count if sizes else 0
    ratio = expectation / opt_value if opt_value else Fraction(1)
    return ExpectationReport(
        label=_label(instance),
        algorithm=algorithm,
        mode="exact_enumeration",
        expectation=expectation,
        opt=opt_value,
        ratio=ratio,
        distribution=distribution,
        permutations_total=math.factorial(len(sizes)),
        distinct_orderings=orderings,
    )


def naive_distribution(instance, algorithm: str = "best-fit") -> dict[int, Fraction]:
    """Bin-count distribution by running the heuristic on all n! orders."""
    sizes = _sizes(instance)
    if not sizes:
        return {0: Fraction(1)}
    scaled, cap = integer_scale(list(sizes) + [ONE])
    scaled = scaled[:-1]
    tally: Counter = Counter()
    total = 0
    for order in itertools.permutations(range(len(sizes))):
        tally[count_bins([scaled[i] for i in order], cap, algorithm)] += 1
        total += 1
    return {b: Fraction(c, total) for b, c in sorted(tally.items())}


def _mc_shard(args) -> tuple[int, int, int]:
    scaled, cap, algorithm, count, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    n = len(scaled)
    base = np.array(scaled, dtype=np.int64)
    cache: dict[tuple, int] | None = {} if n <= 10 else None
    total = total_sq = 0
    done = 0
    while done < count:
        batch = min(count - done, 4096)
        rows = rng.permuted(np.tile(base, (batch, 1)), axis=1).tolist()
        for row in rows:
            if cache is not None:
                key = tuple(row)
                bins = cache.get(key)
                if bins is None:
                    bins = cache[key] = count_bins(row, cap, algorithm)
            else:
                bins = count_bins(row, cap, algorithm)
            total += bins
            total_sq += bins * bins
        done += batch
    return count, total, total_sq


def monte_carlo_expectation(
    instance,
    algorithm: str = "best-fit",
    samples: int = 100_000,
    seed: int = 0,
    threads: int | None = None,
    opt_value: int | None = None,
) -> ExpectationReport:
    """Estimate E[ALG] from ``samples`` uniformly random arrival orders.

    Work is split into fixed-size shards whose generators are spawned from
    ``seed``; the shard layout does not depend on ``threads``, and shard
    results are integer sums, so the estimate is the same for any thread
    count.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    sizes = _sizes(instance)
    if algorithm not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {algorithm!r}")
    scaled, cap = integer_scale(list(sizes) + [ONE])
    scaled = scaled[:-1]
    shards = -(-samples // MC_SHARD_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(shards)
    jobs = []
    for index, seq in enumerate(seeds):
        count = min(MC_SHARD_SIZE, samples - index * MC_SHARD_SIZE)
        jobs.append((scaled, cap, algorithm, count, seq))
    threads = threads or default_threads()
    if threads > 1 and shards > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_mc_shard, jobs))
    else:
        results = [_mc_shard(job) for job in jobs]
    total = sum(r[1] for r in results)
    total_sq = sum(r[2] for r in results)
    mean = total / samples
    if samples > 1:
        var = max(0.0, (total_sq - total * total / samples) / (samples - 1))
    else:
        var = 0.0
    stderr = math.sqrt(var / samples)
    if opt_value is None:
        opt_value = opt(sizes).bin_count if sizes else 0
    return ExpectationReport(
        label=_label(instance),
        algorithm=algorithm,
        mode="monte_carlo",
        expectation=mean,
        opt=opt_value,
        ratio=mean / opt_value if opt_value else 1.0,
        samples=samples,
        seed=seed,
        stderr=stderr,
        confidence_interval=(mean - Z95 * stderr, mean + Z95 * stderr),
    )


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution over item sizes with exact probabilities."""

    support: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        pairs = tuple((as_size(s), as_size(p)) for s, p in self.support)
        if not pairs:
            raise DomainError("distribution needs a nonempty support")
        sizes = [s for s, _ in pairs]
        if len(set(sizes)) != len(sizes):
            raise DomainError("support sizes must be distinct")
        for s, p in pairs:
            if not 0 < s <= 1:
                raise DomainError(f"support size {s} outside (0, 1]")
            if p <= 0:
                raise DomainError(f"probability of {s} must be positive")
        if sum(p for _, p in pairs) != 1:
            raise DomainError("probabilities must sum to 1")
        object.__setattr__(self, "support", tuple(sorted(pairs)))

    @classmethod
    def of(cls, mapping) -> "DiscreteDistribution":
        return cls(tuple((as_size(s), as_size(p)) for s, p in dict(mapping).items()))

    @property
    def sizes(self) -> tuple[Fraction, ...]:
        return tuple(s for s, _ in self.support)

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.support)


def quarter_third_distribution(p=Fraction(3, 5)) -> DiscreteDistribution:
    """Items of size 1/4 with probability p and 1/3 otherwise."""
    p = as_size(p)
    return DiscreteDistribution(((Fraction(1, 4), p), (THIRD, 1 - p)))


@dataclass(frozen=True)
class IidClass:
    """One multiset outcome of n i.i.d. draws."""

    instance: Instance
    probability: Fraction
    expectation: Fraction
    opt: int

    @property
    def ratio(self) -> Fraction:
        return self.expectation / self.opt


def _compositions(n: int, parts: int):
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


def iid_classes(
    F: DiscreteDistribution,
    n: int,
    algorithm: str = "best-fit",
    cap: int = DEFAULT_ENUMERATION_CAP,
    opt_cap: int = DEFAULT_OPT_CAP,
) -> list[IidClass]:
    """All multisets of n draws from F with probability, E[ALG] and OPT.

    The probability of a multiset is the multinomial count times the common
    probability of each of its orderings.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    if len(F.support) ** n > cap:
        raise EnumerationTooLarge(f"{len(F.support)}^{n} outcomes exceed the cap {cap}")
    out = []
    for counts in _compositions(n, len(F.support)):
        items = tuple(s for s, c in zip(F.sizes, counts) for _ in range(c))
        weight = Fraction(1)
        for p, c in zip(F.probabilities, counts):
            weight *= p**c
        probability = weight * distinct_orderings(items)
        inst = Instance(items, label="iid-class")
        expectation = sum(
            (b * q for b, q in _exact_distribution(list(items), algorithm).items()), Fraction(0)
        )
        opt_value = opt(items, opt_cap).bin_count if items else 0
        out.append(IidClass(inst, probability, expectation, opt_value))
    return out


def iid_exact_expectation(
    F: DiscreteDistribution, n: int, algorithm: str = "best-fit", cap: int = DEFAULT_ENUMERATION_CAP
) -> ExpectationReport:
    """Exact E[ALG(I_n(F))], E[OPT(I_n(F))] and their ratio."""
    classes = iid_classes(F, n, algorithm, cap)
    expectation = sum((c.probability * c.expectation for c in classes), Fraction(0))
    opt_mean = sum((c.probability * c.opt for c in classes), Fraction(0))
    distribution: dict[int, Fraction] = {}
    for c in classes:
        for bins, q in _exact_distribution(list(c.instance.items), algorithm).items():
            distribution[bins] = distribution.get(bins, Fraction(0)) + c.probability * q
    return ExpectationReport(
        label=f"iid-n{n}",
        algorithm=algorithm,
        mode="iid_exact",
        expectation=expectation,
        opt=opt_mean,
        ratio=expectation / opt_mean if opt_mean else Fraction(1),
        distribution=dict(sorted(distribution.items())),
        distinct_orderings=len(F.support) ** n,
    )


def best_representative(
    F: DiscreteDistribution, n: int, algorithm: str = "best-fit", cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[Instance, Fraction]:
    """The multiset H maximizing E[ALG(H^sigma)]/OPT(H).

    A ratio of weighted sums never exceeds the largest term ratio, so the
    returned ratio is at least the i.i.d. ratio; this is asserted.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    classes = iid_classes(F, n, algorithm, cap)
    best = max(classes, key=lambda c: c.ratio)
    expectation = sum((c.probability * c.expectation for c in classes), Fraction(0))
    opt_mean = sum((c.probability * c.opt for c in classes), Fraction(0))
    iid_ratio = expectation / opt_mean
    assert best.ratio >= iid_ratio, (best.ratio, iid_ratio)
    return best.instance, best.ratio


def sample_iid(F: DiscreteDistribution, n: int, seed) -> list[Fraction]:
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = np.array([float(p) for p in F.probabilities])
    probs /= probs.sum()
    picks = rng.choice(len(F.support), size=n, p=probs)
    sizes = F.sizes
    return [sizes[i] for i in picks.tolist()]


def _opt_estimate(F: DiscreteDistribution, items: list[Fraction]) -> int:
    if not items:
        return 0
    if set(F.sizes) <= {Fraction(1, 4), THIRD}:
        quarters = sum(1 for x in items if x == Fraction(1, 4))
        thirds = len(items) - quarters
        return -(-quarters // 4) + -(-thirds // 3)
    if all(x > THIRD for x in items):
        return opt(items).bin_count
    if len(items) <= DEFAULT_OPT_CAP:
        return opt_exact(items).bin_count
    # First Fit Decreasing, an upper bound on OPT.
    scaled, cap = integer_scale(sorted(items, reverse=True) + [ONE])
    return count_bins(scaled[:-1], cap, "first-fit")


def iid_simulate(F: DiscreteDistribution, n: int, seed=0, algorithm: str = "best-fit") -> tuple[int, int]:
    """Bins used on n i.i.d. draws from F, and an upper estimate of OPT.

    For F on {1/4, 1/3} the OPT estimate packs four quarters or three thirds
    per bin; items above 1/3 get the exact pairing optimum; small inputs use
    branch-and-bound and anything else First Fit Decreasing.
    """
    if n == 0:
        return 0, 0
    items = sample_iid(F, n, seed)
    scaled, cap = integer_scale(items + [ONE])
    bins = count_bins(scaled[:-1], cap, algorithm)
    return bins, _opt_estimate(F, items)
