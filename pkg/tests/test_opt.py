from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollpack.instances import abs_lb_instance, counterexample_monotonicity, large_lb_instance
from rollpack.opt import (
    InstanceTooLarge,
    check_certificate,
    opt,
    opt_exact,
    opt_large_items,
    size_lower_bound,
)
from rollpack.packing import DomainError

F = Fraction


def brute_force_opt(sizes):
    """Minimum bins over all set partitions, by direct recursion."""
    best = [len(sizes)]

    def place(i, loads):
        if len(loads) >= best[0]:
            return
        if i == len(sizes):
            best[0] = len(loads)
            return
        for b in range(len(loads)):
            if loads[b] + sizes[i] <= 1:
                loads[b] += sizes[i]
                place(i + 1, loads)
                loads[b] -= sizes[i]
        loads.append(sizes[i])
        place(i + 1, loads)
        loads.pop()

    place(0, [])
    return best[0]


def test_known_values():
    a, b = counterexample_monotonicity()
    assert opt_exact(a).bin_count == 3
    assert opt_exact(b).bin_count == 3
    lemma7 = opt_exact(abs_lb_instance())
    assert lemma7.bin_count == 2
    groups = sorted(sorted(b.item_ids) for b in lemma7.certificate.bins)
    assert groups == [[0, 1, 4], [2, 3]]
    for k in range(1, 6):
        assert opt(large_lb_instance(k)).bin_count == k


def test_cap_and_domain():
    with pytest.raises(InstanceTooLarge, match="too large"):
        opt_exact([F(1, 2)] * 21)
    assert opt_exact([]).bin_count == 0
    with pytest.raises(DomainError):
        opt_large_items([F(1, 4)])


def test_size_lower_bound():
    assert size_lower_bound([F(1, 2), F(1, 2), F(1, 100)]) == 2


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 24).map(lambda k: F(k, 24)), min_size=1, max_size=8))
def test_branch_and_bound_matches_brute_force(sizes):
    result = opt_exact(sizes)
    check_certificate(result, sizes)
    assert result.bin_count == brute_force_opt(sizes)
    assert result.bin_count >= size_lower_bound(sizes)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(34, 100).map(lambda k: F(k, 100)), min_size=1, max_size=10))
def test_matching_equals_branch_and_bound(sizes):
    fast = opt_large_items(sizes)
    check_certificate(fast, sizes)
    assert fast.bin_count == opt_exact(sizes).bin_count
    assert all(len(b.item_ids) <= 2 for b in fast.certificate.bins)
