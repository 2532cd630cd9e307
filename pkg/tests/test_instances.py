import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rollpack.instances import (
    NAMED_INSTANCES,
    InstanceFormatError,
    LmInstance,
    PairingError,
    SizeRangeError,
    abs_lb_instance,
    counterexample_monotonicity,
    example1_sequence,
    instance_from_dict,
    instance_to_dict,
    large_lb_instance,
    named_instance,
    parse_instance,
    random_large_instance,
    random_lm_instance,
    serialize_instance,
)
from rollpack.packing import HALF, THIRD, DomainError, Instance

F = Fraction


def test_counterexample_lists():
    a, b = counterexample_monotonicity()
    assert a.items[2] == F(17, 50) and b.items[2] == F(9, 25)
    diffs = [j for j in range(7) if a.items[j] != b.items[j]]
    assert diffs == [2]


def test_abs_lb():
    inst = abs_lb_instance()
    a1, a2, b1, b2, c = inst.items
    assert a1 + a2 + c == 1
    assert b1 + b2 <= 1
    assert abs_lb_instance(F(1, 96)).n == 5
    for bad in (F(0), F(1, 95), "-1/100"):
        with pytest.raises(DomainError):
            abs_lb_instance(bad)


def test_large_lb_fit_relation():
    k = 5
    inst = large_lb_instance(k, F(1, 31))
    for i in range(k):
        for j in range(k):
            assert (inst.items[i] + inst.items[k + j] <= 1) == (i <= j)
    with pytest.raises(DomainError):
        large_lb_instance(5, F(1, 30))
    with pytest.raises(DomainError):
        large_lb_instance(0)


def test_example1_order():
    inst, order = example1_sequence()
    assert order == (1, 0, 6, 7, 3, 4, 5, 2)
    assert inst.k == 4


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6), st.sampled_from([24, 100, 10**6]))
def test_random_lm_properties(k, seed, denom):
    inst = random_lm_instance(k, seed, denom)
    assert inst.k == k
    for large, medium in inst.lm_pairs:
        l, m = inst.items[large], inst.items[medium]
        assert HALF < l < F(2, 3)
        assert THIRD < m <= HALF
        assert l + m <= 1


def test_random_lm_is_seeded():
    assert random_lm_instance(4, 9).items == random_lm_instance(4, 9).items


def test_random_large():
    inst = random_large_instance(50, 1)
    assert all(x > THIRD for x in inst.items)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10**6))
def test_json_round_trip(k, seed):
    inst = random_lm_instance(k, seed, 1000)
    back = instance_from_dict(json.loads(json.dumps(instance_to_dict(inst))))
    assert back == inst
    assert isinstance(back, LmInstance)


def test_file_round_trip(tmp_path):
    path = tmp_path / "i.json"
    a, _ = counterexample_monotonicity()
    serialize_instance(a, path)
    assert parse_instance(path) == a


@pytest.mark.parametrize(
    "payload, error",
    [
        ([1, 2], InstanceFormatError),
        ({"items": "1/2"}, InstanceFormatError),
        ({"items": [0.5]}, InstanceFormatError),
        ({"items": ["3/2"]}, SizeRangeError),
        ({"items": ["0"]}, SizeRangeError),
        ({"items": ["3/5", "1/2"], "lm_pairs": [[0, 1]]}, PairingError),
        ({"items": ["3/5", "2/5"], "lm_pairs": [[1, 0]]}, PairingError),
        ({"items": ["3/5", "2/5"], "lm_pairs": [[0]]}, InstanceFormatError),
    ],
)
def test_json_errors(payload, error):
    with pytest.raises(error):
        instance_from_dict(payload)


def test_bad_json_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(InstanceFormatError):
        parse_instance(path)


def test_named_instances():
    for name in NAMED_INSTANCES:
        assert isinstance(named_instance(name), Instance)
    with pytest.raises(KeyError):
        named_instance("nope")
