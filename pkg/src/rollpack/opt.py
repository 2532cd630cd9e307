"""Exact offline optimum for small instances."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

from .packing import ONE, THIRD, Bin, DomainError, Instance, Packing, integer_scale

DEFAULT_OPT_CAP = 20


class InstanceTooLarge(DomainError):
    """Raised when exact OPT is requested for more items than the cap allows."""


@dataclass(frozen=True)
class OptResult:
    bin_count: int
    certificate: Packing
    method: str


def _items(instance) -> tuple[Fraction, ...]:
    return instance.items if isinstance(instance, Instance) else tuple(instance)


def size_lower_bound(instance) -> int:
    """Ceiling of the total size; no packing can use fewer bins."""
    total = sum(_items(instance), Fraction(0))
    return ceil(total)


def _certificate(sizes, groups: list[list[int]], method: str) -> Packing:
    bins = []
    assignment = {}
    for index, ids in enumerate(groups):
        load = sum((sizes[i] for i in ids), Fraction(0))
        bins.append(Bin(tuple(ids), load, index + 1))
        for i in ids:
            assignment[i] = index
    return Packing(
        algorithm=method,
        sizes={i: s for i, s in enumerate(sizes)},
        bins=tuple(bins),
        assignment=assignment,
    )


def check_certificate(result: OptResult, instance) -> None:
    sizes = _items(instance)
    cert = result.certificate
    assert cert.bin_count == result.bin_count
    assert sorted(cert.assignment) == list(range(len(sizes)))
    for b in cert.bins:
        assert b.load == sum((sizes[i] for i in b.item_ids), Fraction(0))
        assert b.load <= ONE
    assert result.bin_count >= size_lower_bound(sizes)


def opt_exact(instance, cap: int = DEFAULT_OPT_CAP) -> OptResult:
    """Minimum bin count by branch-and-bound.

    Items are placed largest first. Each item goes into an existing bin or a
    new bin with the next free index, and bins with equal loads are tried
    only once. The search stops as soon as it meets the volume bound.
    """
    sizes = _items(instance)
    n = len(sizes)
    if n > cap:
        raise InstanceTooLarge(f"instance too large for exact OPT: {n} items > cap {cap}")
    if n == 0:
        return OptResult(0, _certificate(sizes, [], "branch_bound"), "branch_bound")

    scaled, cap_int = integer_scale(list(sizes) + [ONE])
    scaled = scaled[:-1]
    order = sorted(range(n), key=lambda i: -scaled[i])
    w = [scaled[i] for i in order]
    lower = size_lower_bound(sizes)

    # First Fit Decreasing gives the starting incumbent.
    ffd_loads: list[int] = []
    ffd_groups: list[list[int]] = []
    for pos, x in enumerate(w):
        for b, load in enumerate(ffd_loads):
            if load + x <= cap_int:
                ffd_loads[b] += x
                ffd_groups[b].append(pos)
                break
        else:
            ffd_loads.append(x)
            ffd_groups.append([pos])
    best = [len(ffd_loads), [list(g) for g in ffd_groups]]

    suffix = [0] * (n + 1)
    for pos in range(n - 1, -1, -1):
        suffix[pos] = suffix[pos + 1] + w[pos]

    loads: list[int] = []
    groups: list[list[int]] = []

    def search(pos: int) -> bool:
        if pos == n:
            if len(loads) < best[0]:
                best[0] = len(loads)
                best[1] = [list(g) for g in groups]
            return best[0] <= lower
        free = sum(cap_int - load for load in loads)
        extra = suffix[pos] - free
        need = len(loads) + (max(0, -(-extra // cap_int)))
        if need >= best[0]:
            return False
        x = w[pos]
        tried = set()
        for b in range(len(loads)):
            load = loads[b]
            if load + x > cap_int or load in tried:
                continue
            tried.add(load)
            loads[b] += x
            groups[b].append(pos)
            done = search(pos + 1)
            groups[b].pop()
            loads[b] -= x
            if done:
                return True
        if len(loads) + 1 < best[0]:
            loads.append(x)
            groups.append([pos])
            done = search(pos + 1)
            groups.pop()
            loads.pop()
            if done:
                return True
        return False

    if best[0] > lower:
        search(0)
    groups_ids = [[order[pos] for pos in g] for g in best[1]]
    result = OptResult(best[0], _certificate(sizes, groups_ids, "branch_bound"), "branch_bound")
    check_certificate(result, sizes)
    return result


def opt_large_items(instance) -> OptResult:
    """OPT for instances whose items all exceed 1/3.

    Such bins hold at most two items, so OPT is n minus a maximum set of
    disjoint pairs that fit together. The largest remaining item is paired
    with the largest remaining partner that fits it, if any.
    """
    sizes = _items(instance)
    if any(s <= THIRD for s in sizes):
        raise DomainError("opt_large_items requires every item to exceed 1/3")
    order = sorted(range(len(sizes)), key=lambda i: (sizes[i], i))
    keys = [sizes[i] for i in order]
    groups = []
    while order:
        big = order.pop()
        x = keys.pop()
        pos = bisect.bisect_right(keys, ONE - x) - 1
        if pos >= 0:
            partner = order.pop(pos)
            keys.pop(pos)
            groups.append([big, partner])
        else:
            groups.append([big])
    result = OptResult(len(groups), _certificate(sizes, groups, "large_matching"), "large_matching")
    check_certificate(result, sizes)
    return result


def opt(instance, cap: int = DEFAULT_OPT_CAP) -> OptResult:
    """Use the pairing solver when it applies, branch-and-bound otherwise."""
    sizes = _items(instance)
    if sizes and all(s > THIRD for s in sizes):
        return opt_large_items(sizes)
    return opt_exact(sizes, cap)
