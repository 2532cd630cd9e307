"""Named reproduction experiments with declared expectations.

Each experiment lists its parameters and expected outcomes up front, then
runs and returns one ``Check`` per assertion.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .engine import (
    best_representative,
    exact_expectation,
    frac_str,
    iid_exact_expectation,
    quarter_third_distribution,
)
from .instances import (
    abs_lb_instance,
    counterexample_monotonicity,
    large_lb_instance,
    random_lm_instance,
)
from .markov import (
    EXPECTED_TRANSITIONS,
    STATES,
    balance_equations,
    build_chain,
    iid_ratio_lower_bound,
    matches_expected,
    simulate_and_crosscheck,
    stationary_closed_form,
    stationary_numeric,
)
from .opt import opt_exact
from .packing import best_fit_pack
from .structure import (
    claims_fuzz,
    lemma3_exhaustive,
    lemma3_fuzz,
    monotonicity_fuzz,
    relation_fuzz,
    theorem1_check,
    theorem1_monte_carlo,
)


@dataclass
class Check:
    name: str
    passed: bool
    observed: str
    expected: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "observed": self.observed, "expected": self.expected}


@dataclass
class ExperimentSpec:
    name: str
    description: str
    parameters: dict
    expected: dict[str, str]
    runner: Callable[..., list[Check]] = field(repr=False)

    def run(self, threads: int | None = None) -> "ExperimentResult":
        start = time.perf_counter()
        checks = self.runner(threads=threads, **self.parameters)
        return ExperimentResult(self, checks, time.perf_counter() - start)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    checks: list[Check]
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "experiment": self.spec.name,
            "parameters": {k: str(v) for k, v in self.spec.parameters.items()},
            "expected": self.spec.expected,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
            "seconds": round(self.seconds, 3),
        }


def _check(name: str, passed: bool, observed, expected: str) -> Check:
    if isinstance(observed, Fraction):
        observed = frac_str(observed)
    return Check(name, bool(passed), str(observed), expected)


def _monotonicity_ce(trials: int, seed: int, threads=None) -> list[Check]:
    a, b = counterexample_monotonicity()
    bf_a = best_fit_pack(a).bin_count
    bf_b = best_fit_pack(b).bin_count
    checks = [
        _check("BF(I) = 4", bf_a == 4, bf_a, "4"),
        _check("BF(I') = 3", bf_b == 3, bf_b, "3"),
        _check("OPT(I) = OPT(I') = 3", opt_exact(a).bin_count == opt_exact(b).bin_count == 3,
               f"{opt_exact(a).bin_count}, {opt_exact(b).bin_count}", "3, 3"),
    ]
    large = monotonicity_fuzz(4, trials, seed)
    checks.append(_check(">1/3 fuzz: no violations", large.passed, len(large.violations), "0"))
    rel = relation_fuzz(trials // 10, seed)
    checks.append(_check("relation classes never violated", rel.passed, len(rel.violations), "0"))
    small = monotonicity_fuzz(4, trials, seed, allow_small_items=True)
    checks.append(_check("(1/4, 1/3] fuzz finds a violation", bool(small.violations), len(small.violations), ">= 1"))
    return checks


def _abs_lb(eps: Fraction, threads=None) -> list[Check]:
    inst = abs_lb_instance(eps)
    report = exact_expectation(inst)
    return [
        _check("OPT = 2", report.opt == 2, report.opt, "2"),
        _check("E[BF] = 13/5", report.expectation == Fraction(13, 5), report.expectation, "13/5"),
        _check("ratio = 13/10", report.ratio == Fraction(13, 10), report.ratio, "13/10"),
    ]


FOUR_BIN_ORDERS_K3 = 440


def _large_lb(k: int, eps: Fraction, threads=None) -> list[Check]:
    inst = large_lb_instance(k, eps)
    report = exact_expectation(inst)
    four = report.count_with(4)
    return [
        _check("BF never exceeds 4 bins", max(report.distribution) <= 4, max(report.distribution), "<= 4"),
        _check("4-bin permutations >= 440", four >= 440, four, ">= 440"),
        _check("4-bin count equals derived constant",
               four == FOUR_BIN_ORDERS_K3, four, str(FOUR_BIN_ORDERS_K3)),
        _check("ratio >= 65/54", report.ratio >= Fraction(65, 54), report.ratio, ">= 65/54"),
        _check("ratio > 6/5", report.ratio > Fraction(6, 5), report.ratio, "> 6/5"),
    ]


def _theorem1(instances: int, k_max_exact: int, k_max_mc: int, samples: int, seed: int, threads=None) -> list[Check]:
    rng = np.random.default_rng(seed)
    pool = [random_lm_instance(int(rng.integers(1, k_max_exact + 1)), rng) for _ in range(instances)]
    pool += [large_lb_instance(k) for k in range(1, k_max_exact + 1)]
    failures = []
    for inst in pool:
        res = theorem1_check(inst)
        if not res.holds:
            failures.append(inst.label)
    checks = [
        _check(f"exact bound on {len(pool)} instances", not failures, len(failures), "0 failures"),
    ]
    mc_fail = []
    for k in range(k_max_exact + 1, k_max_mc + 1):
        for inst in (random_lm_instance(k, rng), large_lb_instance(k)):
            res = theorem1_monte_carlo(inst, samples, seed)
            if not res.holds:
                mc_fail.append(f"{inst.label}: {res.expectation:.4f} > {float(res.bound)}")
    checks.append(_check("Monte Carlo bound within 4 stderr", not mc_fail, "; ".join(mc_fail) or 0, "0 failures"))
    return checks


def _prop2(eps: Fraction, threads=None) -> list[Check]:
    r2 = exact_expectation(large_lb_instance(2, eps))
    two = r2.count_with(2)
    three = r2.count_with(3)
    r3 = exact_expectation(large_lb_instance(3, eps))
    return [
        _check("k=2: 16 of 24 orders use 2 bins", two == 16, two, "16"),
        _check("k=2: remaining 8 use 3 bins", three == 8, three, "8"),
        _check("k=2: ratio = 7/6", r2.ratio == Fraction(7, 6), r2.ratio, "7/6"),
        _check("k=3: ratio <= 31/24", r3.ratio <= Fraction(31, 24), r3.ratio, "<= 31/24"),
    ]


def _lemma3(k_exhaustive: int, k_max: int, trials: int, seed: int, threads=None) -> list[Check]:
    rng = np.random.default_rng(seed)
    exhaustive = []
    for k in range(1, k_exhaustive + 1):
        exhaustive.append(large_lb_instance(k))
        exhaustive.append(random_lm_instance(k, rng, 24))
        exhaustive.append(random_lm_instance(k, rng))
    bad = sum(len(lemma3_exhaustive(inst).violations) for inst in exhaustive)
    sampled = lemma3_fuzz(k_max, trials, seed)
    return [
        _check(f"exhaustive k <= {k_exhaustive}, both tie rules", bad == 0, bad, "0 violations"),
        _check(f"{trials} sampled orders, k <= {k_max}", sampled.passed, len(sampled.violations), "0 violations"),
    ]


def _claims(k_max: int, trials: int, seed: int, threads=None) -> list[Check]:
    report = claims_fuzz(k_max, trials, seed)
    comp = sum(1 for v in report.violations for f in v["failures"] if f["claim"] == "components")
    path = sum(1 for v in report.violations for f in v["failures"] if f["claim"] == "alternating-path")
    return [
        _check("per-component BF-edges >= good OPT-edges", comp == 0, comp, "0 violations"),
        _check("alternating paths b_w >= b_1", path == 0, path, "0 violations"),
    ]


def _markov(p: Fraction, simulate: int, seed: int, threads=None) -> list[Check]:
    checks = [_check("derived transitions equal the expected table", matches_expected(build_chain(p)),
                     len(build_chain(p).transitions), f"{len(EXPECTED_TRANSITIONS)} matching")]
    grid_bad = []
    worst = 0.0
    for j in range(1, 100):
        q = Fraction(j, 100)
        omega = stationary_closed_form(q)
        if not all(balance_equations(omega, q)):
            grid_bad.append(frac_str(q))
        numeric = stationary_numeric(build_chain(q))
        worst = max(worst, max(abs(float(omega[s]) - numeric[s]) for s in STATES))
    checks.append(_check("balance equations exact on p = j/100", not grid_bad, ", ".join(grid_bad) or "all hold", "all hold"))
    checks.append(_check("numeric vs closed form <= 1e-12", worst <= 1e-12, f"{worst:.3g}", "<= 1e-12"))
    ratio = iid_ratio_lower_bound(p)
    checks.append(_check("ratio lower bound > 11/10", ratio > Fraction(11, 10), f"{frac_str(ratio)} ~ {float(ratio):.6f}", "> 11/10"))
    if simulate:
        rep = simulate_and_crosscheck(p, simulate, seed)
        for name, ok in rep.checks.items():
            checks.append(_check(f"simulation: {name}", ok, "pass" if ok else "fail", "pass"))
    return checks


def _lemma5(p: Fraction, n_min: int, n_max: int, threads=None) -> list[Check]:
    F = quarter_third_distribution(p)
    bad = []
    for n in range(n_min, n_max + 1):
        iid = iid_exact_expectation(F, n)
        _, best = best_representative(F, n)
        if best < iid.ratio:
            bad.append(n)
    return [_check(f"max representative >= iid ratio, n = {n_min}..{n_max}", not bad, bad or "none", "no violations")]


EXPERIMENTS: dict[str, ExperimentSpec] = {
    spec.name: spec
    for spec in [
        ExperimentSpec(
            "monotonicity-ce",
            "Enlarging one item saves Best Fit a bin; impossible when all items exceed 1/3",
            {"trials": 10_000, "seed": 3},
            {"BF(I)": "4", "BF(I')": "3", ">1/3 violations": "0", "small-item violations": ">= 1"},
            _monotonicity_ce,
        ),
        ExperimentSpec(
            "abs-lb-13-10",
            "Five items near 1/3 with expected Best Fit ratio 13/10",
            {"eps": Fraction(1, 1000)},
            {"ratio": "13/10 exactly"},
            _abs_lb,
        ),
        ExperimentSpec(
            "large-lb-6-5",
            "Three LM-pairs whose expected ratio exceeds 6/5",
            {"k": 3, "eps": Fraction(1, 100)},
            {"4-bin orders": ">= 440 of 720", "ratio": ">= 65/54"},
            _large_lb,
        ),
        ExperimentSpec(
            "markov-11-10",
            "Nine-state chain for Best Fit on {1/4, 1/3} items",
            {"p": Fraction(3, 5), "simulate": 1_000_000, "seed": 1},
            {"ratio": "> 11/10 exactly", "simulation": "all checks pass"},
            _markov,
        ),
        ExperimentSpec(
            "theorem1",
            "E[BF] <= (5/4) k + 1/4 on LM instances",
            {"instances": 100, "k_max_exact": 4, "k_max_mc": 8, "samples": 100_000, "seed": 0},
            {"exact": "bound holds, E[X] = k/2, parity 1/2", "Monte Carlo": "within 4 stderr"},
            _theorem1,
        ),
        ExperimentSpec(
            "prop2-absolute",
            "Two and three LM-pairs: exact ratios",
            {"eps": Fraction(1, 100)},
            {"k=2": "16/24 two-bin orders, ratio 7/6", "k=3": "ratio <= 31/24"},
            _prop2,
        ),
        ExperimentSpec(
            "lemma3-exhaustive",
            "LM-bins >= good-order pairs on every order (k <= 3) and on samples (k <= 8)",
            {"k_exhaustive": 3, "k_max": 8, "trials": 100_000, "seed": 3},
            {"violations": "0"},
            _lemma3,
        ),
        ExperimentSpec(
            "lemma5-bridge",
            "Best multiset ratio dominates the i.i.d. ratio",
            {"p": Fraction(3, 5), "n_min": 2, "n_max": 8},
            {"violations": "0"},
            _lemma5,
        ),
        ExperimentSpec(
            "claims-roundwise",
            "Match-graph inequalities after every round",
            {"k_max": 8, "trials": 1000, "seed": 0},
            {"violations": "0"},
            _claims,
        ),
    ]
}
