import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollpack.engine import (
    DiscreteDistribution,
    EnumerationTooLarge,
    best_representative,
    distinct_orderings,
    exact_expectation,
    iid_classes,
    iid_exact_expectation,
    iid_simulate,
    monte_carlo_expectation,
    naive_distribution,
    quarter_third_distribution,
)
from rollpack.instances import abs_lb_instance, large_lb_instance
from rollpack.opt import opt_exact
from rollpack.packing import ALGORITHMS, DomainError, pack

F = Fraction


def test_abs_lb_exact():
    report = exact_expectation(abs_lb_instance())
    assert report.expectation == F(13, 5)
    assert report.ratio == F(13, 10)
    assert report.distribution == {2: F(2, 5), 3: F(3, 5)}
    assert report.distinct_orderings == 30
    assert report.permutations_total == 120
    assert report.to_dict()["ratio"] == {"exact": "13/10", "approx": 1.3}


def test_large_lb_k3_counts():
    report = exact_expectation(large_lb_instance(3))
    assert report.count_with(4) == 440
    assert report.count_with(3) == 280
    assert report.ratio == F(65, 54)
    assert max(report.distribution) == 4
    assert report.distribution == naive_distribution(large_lb_instance(3))


def test_large_lb_k2_counts():
    report = exact_expectation(large_lb_instance(2))
    assert report.count_with(2) == 16
    assert report.count_with(3) == 8
    assert report.ratio == F(7, 6)


def test_distinct_orderings():
    assert distinct_orderings([F(1, 2)] * 3 + [F(1, 3)] * 2) == 10
    assert distinct_orderings([]) == 1


def test_cap_suggests_monte_carlo():
    with pytest.raises(EnumerationTooLarge, match="monte_carlo"):
        exact_expectation([F(k, 100) for k in range(30, 45)], cap=1000)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(1, 12).map(lambda k: F(k, 12)), min_size=1, max_size=6),
    st.sampled_from(ALGORITHMS),
)
def test_dedup_matches_naive(sizes, algorithm):
    report = exact_expectation(sizes, algorithm)
    assert report.distribution == naive_distribution(sizes, algorithm)
    assert sum(report.distribution.values()) == 1


def test_naive_oracle_by_hand():
    sizes = [F(1, 2), F(2, 3), F(1, 2)]
    counts = {}
    for order in itertools.permutations(range(3)):
        b = pack(sizes, order).bin_count
        counts[b] = counts.get(b, 0) + 1
    expected = {b: F(c, 6) for b, c in counts.items()}
    assert naive_distribution(sizes) == expected


def test_monte_carlo_near_exact():
    report = monte_carlo_expectation(abs_lb_instance(), samples=200_000, seed=7)
    assert abs(report.expectation - 2.6) < 4 * report.stderr
    lo, hi = report.confidence_interval
    assert lo < report.expectation < hi


def test_monte_carlo_thread_independent():
    inst = large_lb_instance(4)
    one = monte_carlo_expectation(inst, samples=60_000, seed=5, threads=1)
    two = monte_carlo_expectation(inst, samples=60_000, seed=5, threads=2)
    assert one.expectation == two.expectation
    assert one.stderr == two.stderr


def test_monte_carlo_seed_reproducible():
    a = monte_carlo_expectation(abs_lb_instance(), samples=5000, seed=1)
    b = monte_carlo_expectation(abs_lb_instance(), samples=5000, seed=1)
    assert a.expectation == b.expectation
    with pytest.raises(DomainError):
        monte_carlo_expectation(abs_lb_instance(), samples=0)


def test_distribution_validation():
    with pytest.raises(DomainError):
        DiscreteDistribution.of({F(1, 4): F(1, 2)})
    F6 = quarter_third_distribution()
    assert F6.sizes == (F(1, 4), F(1, 3))
    assert F6.probabilities == (F(3, 5), F(2, 5))


def brute_force_iid(F_, n):
    """Enumerate all |support|^n sequences with their probabilities."""
    e_alg = F(0)
    e_opt = F(0)
    for seq in itertools.product(range(len(F_.support)), repeat=n):
        prob = math.prod(F_.probabilities[i] for i in seq)
        items = [F_.sizes[i] for i in seq]
        e_alg += prob * exact_expectation(items, opt_value=1).expectation
        e_opt += prob * opt_exact(items).bin_count
    return e_alg, e_opt


@pytest.mark.parametrize("n", [2, 5, 7])
def test_iid_matches_sequence_enumeration(n):
    F6 = quarter_third_distribution()
    report = iid_exact_expectation(F6, n)
    e_alg, e_opt = brute_force_iid(F6, n)
    assert report.expectation == e_alg
    assert report.opt == e_opt
    assert sum(c.probability for c in iid_classes(F6, n)) == 1


def test_iid_values():
    F6 = quarter_third_distribution()
    assert iid_exact_expectation(F6, 7).ratio == F(34999, 29815)
    assert iid_exact_expectation(F6, 4).ratio == 1
    _, best = best_representative(F6, 7)
    assert best == F(10, 7)


@pytest.mark.parametrize("n", range(2, 9))
def test_best_representative_dominates(n):
    F6 = quarter_third_distribution()
    _, best = best_representative(F6, n)
    assert best >= iid_exact_expectation(F6, n).ratio


def test_iid_simulate():
    bins, opt_est = iid_simulate(quarter_third_distribution(), 1200, seed=2)
    assert opt_est <= bins
    assert bins / opt_est < 1.2
    assert iid_simulate(quarter_third_distribution(), 0) == (0, 0)
