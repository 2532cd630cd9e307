from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollpack.instances import counterexample_monotonicity, example1_sequence, large_lb_instance, random_lm_instance
from rollpack.packing import THIRD, DomainError, TieRule, best_fit_pack, best_fit_step, empty_packing
from rollpack.structure import (
    MatchGraph,
    Relation,
    alternating_paths,
    build_match_graph,
    claims_check,
    claims_fuzz,
    eq1_accounting,
    good_order_count,
    good_order_statistics,
    lemma3_exhaustive,
    lemma3_fuzz,
    lm_bin_count,
    monotonicity_check,
    monotonicity_fuzz,
    relation_classify,
    relation_fuzz,
    round_graphs,
    shrink_monotonicity,
    theorem1_bound,
    theorem1_check,
    theorem1_monte_carlo,
    verify_claim1,
    verify_claim2,
    verify_lemma3,
)

F = Fraction


def test_example1_packing_after_seven_items():
    inst, order = example1_sequence()
    packing = empty_packing()
    for i in order[:7]:
        packing = best_fit_step(packing, inst.items[i], i)
    groups = [sorted(b.item_ids) for b in packing.bins]
    # l2 with m3, l1 with m4, l4 alone, m1 with m2
    assert groups == [[1, 6], [0, 7], [3], [4, 5]]
    assert packing.configs() == ["LM", "LM", "L", "MM"]


def test_example1_counts():
    inst, order = example1_sequence()
    result = verify_lemma3(inst, order)
    assert (result.good_pairs, result.lm_bins) == (2, 2)
    assert result.holds
    full = best_fit_pack(inst.items, order)
    assert lm_bin_count(full) == 2
    assert eq1_accounting(inst, order).holds


def test_example1_match_graph():
    inst, order = example1_sequence()
    graph = build_match_graph(inst, order, 7)
    assert sorted(graph.bf_edges) == [(6, 1), (7, 0)]
    assert sorted(graph.opt_edges) == [(4, 0, True), (5, 1, True), (7, 3, False)]
    # the only large without a BF partner is l4, whose OPT edge has bad order
    assert alternating_paths(graph) == []
    assert verify_claim1(graph).holds
    assert verify_claim2(graph).holds
    with pytest.raises(DomainError):
        build_match_graph(inst, order, 0)


def test_good_order_count():
    inst = large_lb_instance(2)
    assert good_order_count(inst, (0, 1, 2, 3)) == 2
    assert good_order_count(inst, (2, 3, 0, 1)) == 0
    assert good_order_count(inst, (0, 3, 2, 1)) == 1


def _fake_graph(sizes, bf_edges, opt_edges):
    larges = frozenset(i for i, s in sizes.items() if s > F(1, 2))
    mediums = frozenset(sizes) - larges
    return MatchGraph(1, mediums, larges, bf_edges, opt_edges, sizes)


def test_alternating_path_found_and_checked():
    # l_a --opt(good)-- m --bf-- l_b, and l_b has no OPT partner.
    sizes = {0: F(52, 100), 1: F(47, 100), 2: F(53, 100)}
    graph = _fake_graph(sizes, [(1, 2)], [(1, 0, True)])
    paths = alternating_paths(graph)
    assert [(p.larges, p.mediums) for p in paths] == [((0, 2), (1,))]
    assert verify_claim2(graph).holds
    swapped = _fake_graph({0: F(53, 100), 1: F(47, 100), 2: F(52, 100)}, [(1, 2)], [(1, 0, True)])
    assert not verify_claim2(swapped).holds


def test_component_check_detects_shortfall():
    sizes = {0: F(52, 100), 1: F(47, 100)}
    graph = _fake_graph(sizes, [], [(1, 0, True)])
    assert not verify_claim1(graph).holds
    graph_bad_order = _fake_graph(sizes, [], [(1, 0, False)])
    assert verify_claim1(graph_bad_order).holds


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6), st.sampled_from([24, 10**6]), st.sampled_from(list(TieRule)))
def test_lm_bins_and_match_graph_property(k, seed, denom, tie_rule):
    inst = random_lm_instance(k, seed, denom)
    order = tuple(int(i) for i in np.random.default_rng(seed).permutation(inst.n))
    assert verify_lemma3(inst, order, tie_rule).holds
    assert eq1_accounting(inst, order, tie_rule).holds
    assert claims_check(inst, order, tie_rule) == []
    assert len(list(round_graphs(inst, order, tie_rule))) == inst.n


def test_lm_bins_exhaustive_small():
    for k in (1, 2, 3):
        assert lemma3_exhaustive(large_lb_instance(k)).passed


def test_good_order_statistics():
    for k in range(1, 5):
        ex, odd = good_order_statistics(k)
        assert ex == F(k, 2)
        assert odd == F(1, 2)


def test_expectation_bound_exact():
    expected = {1: F(1), 2: F(7, 3), 3: F(65, 18), 4: F(811, 168)}
    for k, e in expected.items():
        res = theorem1_check(large_lb_instance(k))
        assert res.expectation == e
        assert res.holds
        assert e <= theorem1_bound(k)


def test_expectation_bound_monte_carlo():
    res = theorem1_monte_carlo(large_lb_instance(5), samples=20_000, seed=1)
    assert res.holds
    assert res.stderr > 0


def test_monotonicity_counterexample():
    a, b = counterexample_monotonicity()
    res = monotonicity_check(a, b)
    assert (res.bf, res.bf_inflated) == (4, 3)
    assert not res.holds
    assert not res.guaranteed
    wa, wb, wo = shrink_monotonicity(a.items, b.items, range(7), F(1, 4))
    assert not monotonicity_check(wa, wb, wo).holds
    assert len(wa) <= 7


def test_monotonicity_domination_required():
    with pytest.raises(DomainError):
        monotonicity_check([F(1, 2)], [F(2, 5)])
    with pytest.raises(DomainError):
        monotonicity_check([F(1, 2)], [F(1, 2), F(1, 2)])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_monotonicity_property_large_items(data):
    n = data.draw(st.integers(1, 10))
    a = data.draw(st.lists(st.integers(34, 100), min_size=n, max_size=n))
    bumps = data.draw(st.lists(st.integers(0, 30), min_size=n, max_size=n))
    b = [min(100, x + d) for x, d in zip(a, bumps)]
    order = data.draw(st.permutations(range(n)))
    res = monotonicity_check([F(x, 100) for x in a], [F(x, 100) for x in b], order)
    assert res.guaranteed and res.holds


def test_relation_classes_by_hand():
    assert relation_classify([F(2, 5)], [F(9, 20)], 0).kind is Relation.STAR1
    assert relation_classify([F(2, 5)], [F(9, 20)], 1).kind is Relation.STAR2
    star3 = relation_classify([F(3, 5), F(2, 5)], [F(3, 5), F(9, 20)], 2)
    assert star3.kind is Relation.STAR3
    with pytest.raises(DomainError):
        relation_classify([F(1, 4)], [F(1, 3)], 1)
    with pytest.raises(DomainError):
        relation_classify([F(2, 5), F(2, 5)], [F(1, 2), F(1, 2)], 1)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_relation_property(data):
    n = data.draw(st.integers(1, 9))
    a = [F(x, 60) for x in data.draw(st.lists(st.integers(21, 60), min_size=n, max_size=n))]
    j = data.draw(st.integers(0, n - 1))
    b = list(a)
    b[j] = F(data.draw(st.integers(a[j].numerator * 60 // a[j].denominator, 60)), 60)
    order = data.draw(st.permutations(range(n)))
    for t in range(n + 1):
        assert relation_classify(a, b, t, order).kind is not Relation.VIOLATION


def test_fuzzers_small_runs():
    assert monotonicity_fuzz(4, 600, seed=3).passed
    assert relation_fuzz(200, seed=1).passed
    assert lemma3_fuzz(6, 300, seed=2).passed
    assert claims_fuzz(6, 100, seed=2).passed


def test_small_item_fuzz_reports_shrunk_witness():
    report = monotonicity_fuzz(4, 10_000, seed=1, allow_small_items=True)
    assert report.violations
    for v in report.violations:
        a = [F(x) for x in v["I"]]
        b = [F(x) for x in v["I_inflated"]]
        assert all(x > F(1, 4) for x in a)
        assert any(x <= THIRD for x in a)
        assert not monotonicity_check(a, b, v["permutation"]).holds
    assert report.to_dict()["violation_count"] == len(report.violations)
