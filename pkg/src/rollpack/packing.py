"""Online packing heuristics over exact rational sizes.

Sizes are :class:`fractions.Fraction` values; every fit test is an exact
comparison against the unit capacity. Item ids are the positions in the
original instance and stay attached to items when the arrival order is
permuted.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

ONE = Fraction(1)
HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)

Size = Fraction


class DomainError(ValueError):
    """A value lies outside the domain an operation accepts."""


class SizeClass(enum.Enum):
    LARGE = "L"
    MEDIUM = "M"
    SMALL = "S"


class TieRule(enum.Enum):
    """Which bin Best Fit picks among equally loaded feasible bins."""

    EARLIEST = "earliest"
    LATEST = "latest"


def as_size(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings are parsed exactly ("0.36" -> 9/25, "13/25"); floats are
    rejected because their binary expansion is almost never what was meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not sizes")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"not a rational literal: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError("float sizes are not accepted; pass a string or Fraction")
    raise TypeError(f"cannot interpret {type(value).__name__} as a size")


def check_item_size(size: Fraction) -> Fraction:
    if not 0 < size <= 1:
        raise DomainError(f"item size {size} outside (0, 1]")
    return size


def classify(size) -> SizeClass:
    size = check_item_size(as_size(size))
    if size > HALF:
        return SizeClass.LARGE
    if size > THIRD:
        return SizeClass.MEDIUM
    return SizeClass.SMALL


@dataclass(frozen=True)
class Bin:
    item_ids: tuple[int, ...]
    load: Fraction
    opened_at: int

    def __len__(self) -> int:
        return len(self.item_ids)


@dataclass(frozen=True)
class Packing:
    """Bins in opening order plus the item sizes they refer to.

    ``round`` counts the items packed so far; a bin opened in round ``r``
    (1-based) has ``opened_at == r``.
    """

    algorithm: str
    sizes: Mapping[int, Fraction] = field(default_factory=dict)
    bins: tuple[Bin, ...] = ()
    assignment: Mapping[int, int] = field(default_factory=dict)
    tie_rule: TieRule = TieRule.EARLIEST

    @property
    def bin_count(self) -> int:
        return len(self.bins)

    @property
    def round(self) -> int:
        return len(self.assignment)

    def bin_sizes(self, index: int) -> tuple[Fraction, ...]:
        return tuple(self.sizes[i] for i in self.bins[index].item_ids)

    def configs(self) -> list[str]:
        return [bin_config(b, self.sizes) for b in self.bins]

    def validate(self) -> None:
        """Raise ``AssertionError`` unless the packing is internally consistent."""
        seen = set()
        for index, b in enumerate(self.bins):
            assert b.item_ids, f"bin {index} is empty"
            assert b.load == sum((self.sizes[i] for i in b.item_ids), Fraction(0))
            assert b.load <= ONE, f"bin {index} overfull: {b.load}"
            for i in b.item_ids:
                assert i not in seen, f"item {i} packed twice"
                assert self.assignment[i] == index
                seen.add(i)
        assert seen == set(self.assignment), "assignment disagrees with bins"


@dataclass(frozen=True)
class Instance:
    """An ordered list of item sizes; the index of a size is its item id.

    ``lm_pairs`` optionally records the (large id, medium id) pairs of an
    optimal LM packing.
    """

    items: tuple[Fraction, ...]
    label: str | None = None
    lm_pairs: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        items = tuple(check_item_size(as_size(x)) for x in self.items)
        object.__setattr__(self, "items", items)
        if self.lm_pairs is not None:
            pairs = tuple((int(a), int(b)) for a, b in self.lm_pairs)
            object.__setattr__(self, "lm_pairs", pairs)
            ids = [i for pair in pairs for i in pair]
            if sorted(ids) != list(range(len(items))):
                raise DomainError("lm_pairs must partition the item ids")
            for large, medium in pairs:
                if items[large] + items[medium] > ONE:
                    raise DomainError(f"pair ({large}, {medium}) does not fit one bin")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def n(self) -> int:
        return len(self.items)

    def permuted(self, order: Sequence[int]) -> tuple[Fraction, ...]:
        return tuple(self.items[i] for i in order)


def empty_packing(algorithm: str = "best-fit", tie_rule: TieRule = TieRule.EARLIEST) -> Packing:
    return Packing(algorithm=algorithm, tie_rule=tie_rule)


def bin_config(b: Bin, sizes: Mapping[int, Fraction]) -> str:
    """Configuration label of a bin: member classes sorted L, M, S.

    ``"LM"`` is one large plus one medium item, ``"MM"`` two mediums, and so
    on. The label is only a multiset of classes; callers decide which labels
    are interesting.
    """
    if not b.item_ids:
        raise DomainError("empty bin has no configuration")
    order = {SizeClass.LARGE: 0, SizeClass.MEDIUM: 1, SizeClass.SMALL: 2}
    classes = sorted((classify(sizes[i]) for i in b.item_ids), key=order.__getitem__)
    return "".join(c.value for c in classes)


def _choose_best_fit(loads: Sequence[Fraction], size: Fraction, tie_rule: TieRule) -> int | None:
    best = None
    for index, load in enumerate(loads):
        if load + size > ONE:
            continue
        if best is None or load > loads[best] or (
            tie_rule is TieRule.LATEST and load == loads[best]
        ):
            best = index
    return best


def _choose_first_fit(loads: Sequence[Fraction], size: Fraction) -> int | None:
    for index, load in enumerate(loads):
        if load + size <= ONE:
            return index
    return None


class _Packer:
    """Mutable accumulator used by the batch packers."""

    def __init__(self, algorithm: str, tie_rule: TieRule = TieRule.EARLIEST):
        self.algorithm = algorithm
        self.tie_rule = tie_rule
        self.sizes: dict[int, Fraction] = {}
        self.members: list[list[int]] = []
        self.loads: list[Fraction] = []
        self.opened: list[int] = []
        self.assignment: dict[int, int] = {}

    @classmethod
    def resume(cls, packing: Packing) -> "_Packer":
        packer = cls(packing.algorithm, packing.tie_rule)
        packer.sizes = dict(packing.sizes)
        packer.members = [list(b.item_ids) for b in packing.bins]
        packer.loads = [b.load for b in packing.bins]
        packer.opened = [b.opened_at for b in packing.bins]
        packer.assignment = dict(packing.assignment)
        return packer

    def place(self, item_id: int, size: Fraction) -> int:
        check_item_size(size)
        if item_id in self.sizes:
            raise DomainError(f"item {item_id} already packed")
        if self.algorithm == "best-fit":
            target = _choose_best_fit(self.loads, size, self.tie_rule)
        elif self.algorithm == "first-fit":
            target = _choose_first_fit(self.loads, size)
        elif self.algorithm == "next-fit":
            target = None
            if self.loads and self.loads[-1] + size <= ONE:
                target = len(self.loads) - 1
        else:
            raise DomainError(f"unknown algorithm {self.algorithm!r}")
        self.sizes[item_id] = size
        if target is None:
            self.members.append([item_id])
            self.loads.append(size)
            self.opened.append(len(self.assignment) + 1)
            target = len(self.loads) - 1
        else:
            self.members[target].append(item_id)
            self.loads[target] += size
        self.assignment[item_id] = target
        return target

    def freeze(self) -> Packing:
        bins = tuple(
            Bin(tuple(ids), load, opened)
            for ids, load, opened in zip(self.members, self.loads, self.opened)
        )
        return Packing(
            algorithm=self.algorithm,
            sizes=dict(self.sizes),
            bins=bins,
            assignment=dict(self.assignment),
            tie_rule=self.tie_rule,
        )


ALGORITHMS = ("best-fit", "first-fit", "next-fit")


def _arrivals(items, order: Iterable[int] | None) -> list[tuple[int, Fraction]]:
    if isinstance(items, Instance):
        items = items.items
    sizes = [as_size(x) for x in items]
    if order is None:
        return list(enumerate(sizes))
    order = list(order)
    if sorted(order) != list(range(len(sizes))):
        raise DomainError("order is not a permutation of the item ids")
    return [(i, sizes[i]) for i in order]


def pack(
    items: Sequence,
    order: Iterable[int] | None = None,
    algorithm: str = "best-fit",
    tie_rule: TieRule = TieRule.EARLIEST,
) -> Packing:
    """Pack ``items`` online in ``order`` (identity if omitted)."""
    if algorithm not in ALGORITHMS:
        raise DomainError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    packer = _Packer(algorithm, tie_rule)
    for item_id, size in _arrivals(items, order):
        packer.place(item_id, size)
    return packer.freeze()


def best_fit_pack(items, order=None, tie_rule: TieRule = TieRule.EARLIEST) -> Packing:
    return pack(items, order, "best-fit", tie_rule)


def first_fit_pack(items, order=None) -> Packing:
    return pack(items, order, "first-fit")


def next_fit_pack(items, order=None) -> Packing:
    return pack(items, order, "next-fit")


def best_fit_step(packing: Packing, size, item_id: int | None = None) -> Packing:
    """Return ``packing`` extended by one item placed by the Best Fit rule.

    ``item_id`` defaults to one more than the largest id seen so far.
    """
    if packing.algorithm != "best-fit":
        raise DomainError("best_fit_step needs a Best Fit packing")
    if item_id is None:
        item_id = max(packing.sizes, default=-1) + 1
    packer = _Packer.resume(packing)
    packer.place(item_id, as_size(size))
    return packer.freeze()


def replay_best_fit(packing: Packing, order: Sequence[int]) -> None:
    """Check that every placement in ``packing`` obeys the Best Fit rule.

    Replays the arrivals in ``order`` and asserts that each item went to a
    feasible bin of maximal load, or opened a bin when none was feasible.
    """
    loads: list[Fraction] = []
    for item_id in order:
        size = packing.sizes[item_id]
        target = packing.assignment[item_id]
        feasible = [load for load in loads if load + size <= ONE]
        if target == len(loads):
            assert not feasible, f"item {item_id} opened a bin although one fit"
            loads.append(size)
        else:
            assert loads[target] + size <= ONE
            assert loads[target] == max(feasible), f"item {item_id} not in fullest bin"
            loads[target] += size


# Integer fast path. Sizes are scaled to a common denominator so loads are
# plain ints; only the bin count is produced.


def integer_scale(sizes: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale ``sizes`` to integers over their least common denominator."""
    from math import lcm

    denom = lcm(*(s.denominator for s in sizes)) if sizes else 1
    return [s.numerator * (denom // s.denominator) for s in sizes], denom


def count_bins(scaled: Sequence[int], capacity: int, algorithm: str = "best-fit") -> int:
    """Number of bins the heuristic opens for integer sizes in arrival order.

    Best Fit keeps the loads of usable bins sorted; ties between equal loads
    cannot change the count, so the tie rule is irrelevant here. Bins that
    can no longer take the smallest item are dropped from the search.
    """
    if algorithm == "best-fit":
        smallest = min(scaled, default=0)
        loads: list[int] = []
        opened = 0
        for x in scaled:
            pos = bisect.bisect_right(loads, capacity - x) - 1
            if pos < 0:
                opened += 1
                new = x
            else:
                new = loads.pop(pos) + x
            if new + smallest <= capacity:
                bisect.insort(loads, new)
        return opened
    if algorithm == "first-fit":
        loads = []
        for x in scaled:
            for index, load in enumerate(loads):
                if load + x <= capacity:
                    loads[index] = load + x
                    break
            else:
                loads.append(x)
        return len(loads)
    if algorithm == "next-fit":
        opened = 0
        current = capacity + 1
        for x in scaled:
            if current + x > capacity:
                opened += 1
                current = x
            else:
                current += x
        return opened
    raise DomainError(f"unknown algorithm {algorithm!r}")


def best_fit_groups(
    scaled: Sequence[int],
    order: Iterable[int],
    capacity: int,
    tie_rule: TieRule = TieRule.EARLIEST,
) -> list[list[int]]:
    """Best Fit on integer sizes, returning item ids per bin in opening order.

    Same placement rule and tie handling as :func:`best_fit_pack`, without
    building rational loads.
    """
    groups: list[list[int]] = []
    loads: list[int] = []
    latest = tie_rule is TieRule.LATEST
    for item in order:
        x = scaled[item]
        best = -1
        best_load = -1
        room = capacity - x
        for index, load in enumerate(loads):
            if load <= room and (load > best_load or (latest and load == best_load)):
                best, best_load = index, load
        if best < 0:
            groups.append([item])
            loads.append(x)
        else:
            groups[best].append(item)
            loads[best] += x
    return groups
