"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

import sys
import time
from fractions import Fraction

import numpy as np

from rollpack.engine import (
    best_representative,
    exact_expectation,
    iid_exact_expectation,
    quarter_third_distribution,
)
from rollpack.instances import (
    abs_lb_instance,
    counterexample_monotonicity,
    large_lb_instance,
    random_lm_instance,
)
from rollpack.markov import (
    STATES,
    balance_equations,
    build_chain,
    iid_ratio_lower_bound,
    matches_expected,
    simulate_and_crosscheck,
    stationary_closed_form,
    stationary_numeric,
)
from rollpack.packing import TieRule, best_fit_pack
from rollpack.structure import (
    claims_fuzz,
    good_order_statistics,
    lemma3_exhaustive,
    lemma3_fuzz,
    monotonicity_fuzz,
    theorem1_bound,
    theorem1_check,
    theorem1_monte_carlo,
)

F = Fraction

# Exact number of the 720 orders of large_lb_instance(3) on which Best Fit uses 4 bins.
FOUR_BIN_ORDERS_K3 = 440


def test_01_monotonicity_counterexample(criterion):
    a, b = counterexample_monotonicity()
    best_fit_pack(a)  # warm-up: imports and caches
    with criterion(1, "monotonicity counterexample BF(I)=4, BF(I')=3", 1.0) as out:
        timings = []
        for _ in range(5):
            start = time.perf_counter()
            bf_a = best_fit_pack(a).bin_count
            bf_b = best_fit_pack(b).bin_count
            timings.append(time.perf_counter() - start)
        assert (bf_a, bf_b) == (4, 3)
        fastest = min(timings)
        assert fastest < 1e-3, f"{fastest * 1e3:.3f} ms"
        out.detail = f"BF = {bf_a}, {bf_b}; {fastest * 1e3:.3f} ms per pair"


def test_02_absolute_lower_bound(criterion):
    with criterion(2, "absolute lower bound ratio = 13/10 exactly", 1.0) as out:
        report = exact_expectation(abs_lb_instance(F(1, 1000)))
        assert report.opt == 2
        assert report.ratio == F(13, 10)
        out.detail = f"E[BF] = {report.expectation}, ratio = {report.ratio}"


def test_03_large_item_lower_bound(criterion):
    with criterion(3, "k=3: max 4 bins, >= 440 four-bin orders, ratio >= 65/54", 1.0) as out:
        report = exact_expectation(large_lb_instance(3, F(1, 100)))
        assert report.permutations_total == 720
        assert max(report.distribution) == 4
        four = report.count_with(4)
        assert four >= 440
        assert four == FOUR_BIN_ORDERS_K3
        assert report.ratio >= F(65, 54) and report.ratio > F(6, 5)
        out.detail = f"four-bin orders = {four}/720, ratio = {report.ratio}"


def test_04_expectation_bound(criterion):
    with criterion(4, "E[BF] <= (5/4)k + 1/4 (exact k<=4, Monte Carlo k=5..8)", 120.0) as out:
        rng = np.random.default_rng(2024)
        pool = [random_lm_instance(int(rng.integers(1, 5)), rng) for _ in range(100)]
        pool += [large_lb_instance(k) for k in range(1, 5)]
        for inst in pool:
            res = theorem1_check(inst)
            assert res.expectation <= theorem1_bound(inst.k), inst
            assert res.expected_good_pairs == F(inst.k, 2)
            assert res.odd_parity_probability == F(1, 2)
            assert res.holds
        for k in range(1, 5):
            assert good_order_statistics(k) == (F(k, 2), F(1, 2))
        worst = -np.inf
        for k in range(5, 9):
            for inst in (random_lm_instance(k, rng), large_lb_instance(k)):
                res = theorem1_monte_carlo(inst, samples=100_000, seed=k, sigmas=4)
                assert res.holds, (inst.label, res.expectation, res.stderr)
                worst = max(worst, (res.expectation - float(res.bound)) / res.stderr)
        out.detail = f"{len(pool)} exact instances; largest MC excess {worst:.1f} stderr"


def test_05_small_k_cases(criterion):
    with criterion(5, "k=2: 16/24 two-bin orders, ratio 7/6; k=3 ratio <= 31/24", 1.0) as out:
        r2 = exact_expectation(large_lb_instance(2, F(1, 100)))
        assert r2.count_with(2) == 16
        assert r2.count_with(3) == 8
        assert r2.ratio == F(7, 6)
        r3 = exact_expectation(large_lb_instance(3, F(1, 100)))
        assert r3.ratio <= F(31, 24)
        out.detail = f"k=2 ratio {r2.ratio}, k=3 ratio {r3.ratio}"


def test_06_good_order_suite(criterion):
    with criterion(6, "LM-bins >= good-order pairs (exhaustive k<=3, 1e5 sampled k<=8)", 300.0) as out:
        rng = np.random.default_rng(6)
        exhaustive = []
        for k in (1, 2, 3):
            exhaustive += [large_lb_instance(k), random_lm_instance(k, rng, 24), random_lm_instance(k, rng)]
        orders = 0
        for inst in exhaustive:
            report = lemma3_exhaustive(inst, (TieRule.EARLIEST, TieRule.LATEST))
            assert report.passed, report.violations[:1]
            orders += report.trials
        sampled = lemma3_fuzz(8, 100_000, seed=3)
        assert sampled.passed, sampled.violations[:1]
        out.detail = f"{orders} exhaustive orders, {sampled.trials} sampled, both tie rules"


def test_07_match_graph_roundwise(criterion):
    with criterion(7, "match-graph component and alternating-path inequalities every round", 120.0) as out:
        report = claims_fuzz(8, 1000, seed=7)
        assert report.passed, report.violations[:1]
        out.detail = f"{report.trials} runs, {report.checks} round checks"


def test_08_markov_chain(criterion):
    with criterion(8, "chain equals expected table, balance equations exact, ratio(3/5) > 11/10", 5.0) as out:
        assert matches_expected(build_chain(F(3, 5)))
        worst = 0.0
        for j in range(1, 100):
            p = F(j, 100)
            assert matches_expected(build_chain(p))
            omega = stationary_closed_form(p)
            assert all(balance_equations(omega, p)), p
            numeric = stationary_numeric(build_chain(p))
            worst = max(worst, max(abs(float(omega[s]) - numeric[s]) for s in STATES))
        assert worst < 1e-12
        ratio = iid_ratio_lower_bound(F(3, 5))
        assert ratio > F(11, 10)
        out.detail = f"ratio = {ratio} ~ {float(ratio):.6f}; numeric gap {worst:.1e}"


def test_09_chain_simulation(criterion):
    with criterion(9, "simulation on 1e6 items agrees with the stationary vector", 30.0) as out:
        report = simulate_and_crosscheck(F(3, 5), 1_000_000, seed=1, freq_tol=5e-3, rate_tol=0.01)
        assert set(report.visits) <= set(STATES)
        assert report.passed, report.checks
        out.detail = f"max deviation {report.max_deviation:.1e}, rate error {report.rate_error:.1e}"


def test_10_representative_bridge(criterion):
    with criterion(10, "best multiset ratio >= i.i.d. ratio, n = 2..8", 120.0) as out:
        F6 = quarter_third_distribution(F(3, 5))
        ratios = []
        for n in range(2, 9):
            iid = iid_exact_expectation(F6, n).ratio
            _, best = best_representative(F6, n)
            assert best >= iid, n
            ratios.append(float(iid))
        out.detail = f"max i.i.d. ratio {max(ratios):.4f}"


def test_11_monotonicity_fuzz(criterion):
    with criterion(11, "no violations above 1/3; violations found with items in (1/4, 1/3]", 300.0) as out:
        large = monotonicity_fuzz(4, 10_000, seed=3)
        assert large.passed, large.violations[:1]
        assert not any(v["kind"] == "relation" for v in large.violations)
        small = monotonicity_fuzz(4, 10_000, seed=0, allow_small_items=True)
        assert small.violations
        out.detail = f"{large.checks} checks clean; {len(small.violations)} small-item violations"


if __name__ == "__main__":
    import pytest

    sys.exit(pytest.main([__file__, "-q"]))
