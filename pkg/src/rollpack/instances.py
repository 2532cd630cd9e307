"""Named instances, random instance families and the JSON instance format."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .packing import (
    HALF,
    ONE,
    THIRD,
    DomainError,
    Instance,
    SizeClass,
    as_size,
    classify,
)


class InstanceFormatError(ValueError):
    """The instance file is not valid JSON or has the wrong shape."""


class SizeRangeError(DomainError):
    """A size parsed fine but lies outside (0, 1]."""


class PairingError(DomainError):
    """``lm_pairs`` does not describe a valid pairing of the items."""


class LmInstance(Instance):
    """An instance made of ``k`` LM-pairs that each fit one bin.

    Every item exceeds 1/3 and the pairs are the bins of an optimal packing,
    so ``OPT == k``.
    """

    def __post_init__(self):
        if self.lm_pairs is None:
            raise PairingError("an LM instance needs lm_pairs")
        super().__post_init__()
        for large, medium in self.lm_pairs:
            l, m = self.items[large], self.items[medium]
            if m <= THIRD or l <= THIRD:
                raise PairingError("LM instances contain only items larger than 1/3")
            if l < m:
                raise PairingError(f"pair ({large}, {medium}) lists the smaller item first")

    @property
    def k(self) -> int:
        return len(self.lm_pairs)

    @property
    def large_ids(self) -> tuple[int, ...]:
        return tuple(pair[0] for pair in self.lm_pairs)

    @property
    def medium_ids(self) -> tuple[int, ...]:
        return tuple(pair[1] for pair in self.lm_pairs)

    def partner(self) -> dict[int, int]:
        out = {}
        for large, medium in self.lm_pairs:
            out[large] = medium
            out[medium] = large
        return out


def _frac(x) -> Fraction:
    return as_size(x)


def counterexample_monotonicity() -> tuple[Instance, Instance]:
    """Two 7-item lists where enlarging the third item saves Best Fit a bin."""
    base = ["0.36", "0.65", "0.34", "0.38", "0.28", "0.35", "0.62"]
    bigger = list(base)
    bigger[2] = "0.36"
    return (
        Instance(tuple(map(_frac, base)), label="monotonicity-ce-a"),
        Instance(tuple(map(_frac, bigger)), label="monotonicity-ce-b"),
    )


ABS_LB_EPS_MAX = Fraction(1, 96)


def abs_lb_instance(eps=Fraction(1, 1000)) -> Instance:
    """Five items a1, a2, b1, b2, c close to 1/3 with OPT = 2.

    a = 1/3 + 4 eps, b = 1/3 + 16 eps, c = 1/3 - 8 eps. Requires
    0 < eps <= 1/96 so that b1 + b2 still fits one bin.
    """
    eps = _frac(eps)
    if not 0 < eps <= ABS_LB_EPS_MAX:
        raise DomainError(f"eps must lie in (0, 1/96], got {eps}")
    a = THIRD + 4 * eps
    b = THIRD + 16 * eps
    c = THIRD - 8 * eps
    inst = Instance((a, a, b, b, c), label="lemma7")
    validate_abs_lb(inst)
    return inst


def validate_abs_lb(inst: Instance) -> None:
    a1, a2, b1, b2, c = inst.items
    if a1 + a2 + c != ONE:
        raise DomainError("a1 + a2 + c must equal 1")
    if b1 + b2 > ONE:
        raise DomainError("b1 + b2 must fit one bin")
    # A bin holding one b-item and an a- or c-item cannot take any third item.
    for partner in (a1, c):
        rest = list(inst.items)
        rest.remove(b1)
        rest.remove(partner)
        if b1 + partner + min(rest) <= ONE:
            raise DomainError("a bin with one b-item and another item must be closed")


def large_lb_instance(k: int, eps=Fraction(1, 100)) -> LmInstance:
    """k LM-pairs l_i = 1/2 + i eps, m_i = 1/2 - i eps.

    Item ids: larges are 0..k-1 (l_1..l_k), mediums k..2k-1 (m_1..m_k).
    l_i fits with m_j exactly when i <= j. Requires eps < 1/(6k).
    """
    eps = _frac(eps)
    if k < 1:
        raise DomainError("k must be at least 1")
    if not 0 < eps < Fraction(1, 6 * k):
        raise DomainError(f"eps must lie in (0, 1/(6k)) = (0, 1/{6 * k}), got {eps}")
    larges = [HALF + i * eps for i in range(1, k + 1)]
    mediums = [HALF - i * eps for i in range(1, k + 1)]
    pairs = tuple((i, k + i) for i in range(k))
    inst = LmInstance(tuple(larges + mediums), label=f"large-lb-k{k}", lm_pairs=pairs)
    validate_large_lb(inst)
    return inst


def validate_large_lb(inst: LmInstance) -> None:
    k = inst.k
    for i in range(k):
        if classify(inst.items[i]) is not SizeClass.LARGE:
            raise DomainError(f"l_{i + 1} is not large")
        if classify(inst.items[k + i]) is not SizeClass.MEDIUM:
            raise DomainError(f"m_{i + 1} is not medium")
        for j in range(k):
            fits = inst.items[i] + inst.items[k + j] <= ONE
            if fits != (i <= j):
                raise DomainError(f"l_{i + 1} + m_{j + 1} fit relation is wrong")


def example1_sequence(eps=Fraction(1, 100)) -> tuple[LmInstance, tuple[int, ...]]:
    """The k = 4 instance with arrival order (l2, l1, m3, m4, l4, m1, m2, l3)."""
    inst = large_lb_instance(4, eps)
    l = {i: i - 1 for i in range(1, 5)}
    m = {i: 3 + i for i in range(1, 5)}
    order = (l[2], l[1], m[3], m[4], l[4], m[1], m[2], l[3])
    return LmInstance(inst.items, label="example1", lm_pairs=inst.lm_pairs), order


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_lm_instance(k: int, seed=None, denom_bound: int = 10**6) -> LmInstance:
    """k random LM-pairs with sizes on the grid 1/denom_bound.

    The large item is uniform on the open interval (1/2, 2/3) and the
    medium item uniform on (1/3, min(1/2, 1 - l)], so every pair fits and
    both items keep their class. Large ids come first.
    """
    if k < 1:
        raise DomainError("k must be at least 1")
    if denom_bound < 12:
        raise DomainError("denom_bound must be at least 12")
    rng = _rng(seed)
    d = denom_bound
    lo_l, hi_l = d // 2 + 1, (2 * d - 1) // 3  # numerators strictly inside (1/2, 2/3)
    larges, mediums = [], []
    for _ in range(k):
        a = int(rng.integers(lo_l, hi_l + 1))
        lo_m = d // 3 + 1
        hi_m = min(d // 2, d - a)
        b = int(rng.integers(lo_m, hi_m + 1))
        larges.append(Fraction(a, d))
        mediums.append(Fraction(b, d))
    pairs = tuple((i, k + i) for i in range(k))
    return LmInstance(tuple(larges + mediums), label=f"random-lm-k{k}", lm_pairs=pairs)


def random_large_instance(n: int, seed=None, denom_bound: int = 1000, lower=THIRD) -> Instance:
    """n sizes uniform on the grid points of (lower, 1]."""
    rng = _rng(seed)
    lower = _frac(lower)
    lo = lower.numerator * denom_bound // lower.denominator + 1
    nums = rng.integers(lo, denom_bound + 1, size=n)
    return Instance(tuple(Fraction(int(x), denom_bound) for x in nums))


# JSON format: {"label": str, "items": ["num/den", ...], "lm_pairs": [[l, m], ...] | null}


def size_to_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def instance_to_dict(inst: Instance) -> dict:
    return {
        "label": inst.label,
        "items": [size_to_str(x) for x in inst.items],
        "lm_pairs": [list(p) for p in inst.lm_pairs] if inst.lm_pairs is not None else None,
    }


def instance_from_dict(data) -> Instance:
    if not isinstance(data, dict) or "items" not in data:
        raise InstanceFormatError("instance must be an object with an 'items' list")
    raw = data["items"]
    if not isinstance(raw, list):
        raise InstanceFormatError("'items' must be a list")
    items = []
    for value in raw:
        if not isinstance(value, (str, int)) or isinstance(value, bool):
            raise InstanceFormatError(f"size {value!r} must be a rational string")
        size = as_size(value)
        if not 0 < size <= 1:
            raise SizeRangeError(f"item size {value!r} outside (0, 1]")
        items.append(size)
    pairs = data.get("lm_pairs")
    label = data.get("label")
    if pairs is None:
        return Instance(tuple(items), label=label)
    try:
        pairs = tuple((int(a), int(b)) for a, b in pairs)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError("lm_pairs must be a list of [large, medium] id pairs") from exc
    try:
        return LmInstance(tuple(items), label=label, lm_pairs=pairs)
    except DomainError as exc:
        raise PairingError(str(exc)) from exc


def serialize_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def parse_instance(path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
    return instance_from_dict(data)


def named_instance(name: str) -> Instance:
    """Instances reachable by name from the command line."""
    ce_a, ce_b = counterexample_monotonicity()
    registry = {
        "lemma7": lambda: abs_lb_instance(),
        "prop3-k3": lambda: large_lb_instance(3),
        "prop2-k2": lambda: large_lb_instance(2),
        "monotonicity-ce": lambda: ce_a,
        "monotonicity-ce-a": lambda: ce_a,
        "monotonicity-ce-b": lambda: ce_b,
        "example1": lambda: example1_sequence()[0],
    }
    if name not in registry:
        raise KeyError(f"unknown instance {name!r}; known: {', '.join(sorted(registry))}")
    return registry[name]()


NAMED_INSTANCES = (
    "lemma7",
    "prop3-k3",
    "prop2-k2",
    "monotonicity-ce",
    "monotonicity-ce-a",
    "monotonicity-ce-b",
    "example1",
)
