"""Randomized partitioning of the union of a local and a global optimum.

Kept centres are bucketed by the magnitude of their cross distance, buckets
are grouped into bands of ``b`` consecutive buckets behind a random shift,
and each band is cut by an axis-aligned grid with a random offset. Tether
pairs split by the grid are repaired by moving the optimum-side centre, and
the resulting parts are merged until each has as many optimum as local
centres.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

import numpy as np

from .filtering import FilterResult

_LOG_MAX = math.log(np.finfo(float).max)
_LOG_TINY = math.log(np.finfo(float).tiny)


def band_count(epsilon: float) -> int:
    """Smallest integer at least ``4 / epsilon``."""
    b = math.ceil(4.0 / epsilon)
    return b - 1 if (b - 1) * epsilon >= 4.0 else b


def bucket_index(value: float, epsilon: float) -> int | None:
    """``a`` with ``eps**-a <= value < eps**-(a+1)``; ``None`` for zero."""
    if value == 0:
        return None
    if not value > 0:
        raise ValueError("bucketed values must be nonnegative")
    inv = 1.0 / epsilon
    a = math.floor(math.log(value) / math.log(inv))
    # pow() on the boundary decides, not the rounded quotient of logs
    while inv ** (a + 1) <= value:
        a += 1
    while inv**a > value:
        a -= 1
    return a


def log_cell_width(band: int, epsilon: float, dim: int) -> float:
    """Natural log of the grid width ``4 d eps**(-(band+2) b - 1)``."""
    b = band_count(epsilon)
    return math.log(4 * dim) + ((band + 2) * b + 1) * math.log(1.0 / epsilon)


def band_of_bucket(bucket: int, shift: int, b: int) -> int:
    return (bucket - shift) // b


class BalanceError(ValueError):
    pass


def balance_groups(imbalances: list[int], sizes: list[int], Y: int) -> list[list[int]]:
    """Group part indices into zero-imbalance groups of at most ``2 Y**3`` parts.

    Repeatedly: a zero-imbalance part alone; otherwise everything left if one
    sign has at most ``Y**2`` parts; otherwise ``y`` parts of imbalance ``+x``
    with ``x`` parts of imbalance ``-y`` (smallest such ``x`` and ``y``).
    """
    if Y < 1:
        raise BalanceError("Y must be >= 1")
    if sum(imbalances) != 0:
        raise BalanceError(f"total imbalance is {sum(imbalances)}, not 0")
    for i, s in enumerate(sizes):
        if s > Y:
            raise BalanceError(f"part {i} has size {s} > Y={Y}")
    remaining = list(range(len(imbalances)))
    groups: list[list[int]] = []
    while remaining:
        zero = next((i for i in remaining if imbalances[i] == 0), None)
        if zero is not None:
            chosen = [zero]
        else:
            by_val: dict[int, list[int]] = {}
            for i in remaining:
                by_val.setdefault(imbalances[i], []).append(i)
            pos = sum(len(v) for x, v in by_val.items() if x > 0)
            neg = sum(len(v) for x, v in by_val.items() if x < 0)
            if pos <= Y * Y or neg <= Y * Y:
                chosen = list(remaining)
            else:
                x = min(v for v, lst in by_val.items() if v > 0 and len(lst) >= Y)
                y = min(-v for v, lst in by_val.items() if v < 0 and len(lst) >= Y)
                chosen = by_val[x][:y] + by_val[-y][:x]
        if len(chosen) > 2 * Y**3:
            raise AssertionError("group exceeds 2*Y**3 parts")
        taken = set(chosen)
        remaining = [i for i in remaining if i not in taken]
        groups.append(sorted(chosen))
    return groups


def balance_parts(parts: list[frozenset[int]], Y: int, opt_members) -> list[frozenset[int]]:
    """Merge parts into zero-imbalance groups; ``opt_members`` count +1, the rest -1."""
    imb = [sum(1 if c in opt_members else -1 for c in p) for p in parts]
    groups = balance_groups(imb, [len(p) for p in parts], Y)
    return [frozenset().union(*(parts[i] for i in g)) for g in groups]


@dataclass
class PartitionSample:
    shift: int
    band_of: dict[int, int]
    grid_offsets: dict[int, np.ndarray]
    log_widths: dict[int, float]
    cell_of: dict[int, tuple]
    moved: frozenset[int]
    pre_parts: list[frozenset[int]]
    pre_kinds: list[str]
    parts: list[frozenset[int]]
    provenance: list[list[int]]
    balanced: bool
    Y: int | None = None
    part_of: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.part_of:
            self.part_of = {c: idx for idx, p in enumerate(self.parts) for c in p}


@dataclass
class _Plan:
    epsilon: float
    dim: int
    b: int
    coords: np.ndarray
    finite: list[int]
    bucket: dict[int, int]
    colocated: list[frozenset[int]]
    filtered_out: list[int]
    tethers: list[tuple[int, int]]
    is_opt: np.ndarray


_plans: "weakref.WeakKeyDictionary[FilterResult, dict]" = weakref.WeakKeyDictionary()


def _plan(filt: FilterResult, epsilon: float, dim: int) -> _Plan:
    cache = _plans.setdefault(filt, {})
    key = (epsilon, dim)
    if key in cache:
        return cache[key]
    paired = filt.paired
    coords = paired.coords()
    if coords.shape[1] != dim:
        raise ValueError(f"dimension {dim} does not match instance dimension {coords.shape[1]}")
    kept = sorted(filt.kept)
    bucket, finite, zero = {}, [], []
    for c in kept:
        a = bucket_index(float(filt.cross_dist[c]), epsilon)
        if a is None:
            zero.append(c)
        else:
            bucket[c] = a
            finite.append(c)
    colocated, used = [], set()
    zero_set = set(zero)
    for c in zero:
        if c in used:
            continue
        twin = filt.partner.get(c)
        if twin in zero_set and twin not in used and paired.centre_dist[c, twin] == 0:
            colocated.append(frozenset((c, twin)))
            used.update((c, twin))
        else:
            colocated.append(frozenset((c,)))
            used.add(c)
    filtered_out = sorted(set(range(paired.size)) - filt.kept)
    tethers = [(o, i) for o, i in filt.tethers if o in bucket and i in bucket]
    plan = _Plan(epsilon, dim, band_count(epsilon), coords, finite, bucket, colocated,
                 filtered_out, tethers, paired.is_opt)
    cache[key] = plan
    return plan


def _cells(plan: _Plan, members: list[int], band: int, rng, offsets, widths) -> dict[int, tuple]:
    logw = log_cell_width(band, plan.epsilon, plan.dim)
    widths[band] = logw
    if logw > _LOG_MAX:
        offsets[band] = np.full(plan.dim, np.inf)
        return {c: (band,) + (0,) * plan.dim for c in members}
    if logw < _LOG_TINY:
        offsets[band] = np.zeros(plan.dim)
        return {c: (band,) + tuple(plan.coords[c].tolist()) for c in members}
    width = math.exp(logw)
    beta = rng.uniform(0.0, width, size=plan.dim)
    offsets[band] = beta
    idx = np.floor((plan.coords[members] - beta) / width).astype(np.int64)
    return {c: (band,) + tuple(row) for c, row in zip(members, idx.tolist())}


def sample_partition(filt: FilterResult, epsilon: float, dim: int, rng, *, balanced: bool = True,
                     Y: int | None = None) -> PartitionSample:
    """Draw one random partition of all centres of both solutions.

    With ``balanced`` the parts are merged until each has as many optimum as
    local centres. ``Y`` bounds the pre-merge part size for the merge rule;
    by default the largest pre-merge part is used.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not filt.paired.instance.metric.is_euclidean:
        raise ValueError("partition sampling needs a Euclidean metric")
    plan = _plan(filt, epsilon, dim)
    shift = int(rng.integers(plan.b))
    band_of = {c: band_of_bucket(plan.bucket[c], shift, plan.b) for c in plan.finite}
    members: dict[int, list[int]] = {}
    for c in plan.finite:
        members.setdefault(band_of[c], []).append(c)
    offsets: dict[int, np.ndarray] = {}
    widths: dict[int, float] = {}
    cell_of: dict[int, tuple] = {}
    for band in sorted(members):
        cell_of.update(_cells(plan, members[band], band, rng, offsets, widths))

    moved = set()
    placed = dict(cell_of)
    for o, i in plan.tethers:
        if cell_of[o] != cell_of[i]:
            moved.add(o)
            placed[o] = cell_of[i]
    by_cell: dict[tuple, set[int]] = {}
    for c in plan.finite:
        by_cell.setdefault(placed[c], set()).add(c)

    pre = [(min(p), "cell", frozenset(p)) for p in by_cell.values()]
    pre += [(min(p), "colocated", p) for p in plan.colocated]
    pre += [(c, "filtered", frozenset((c,))) for c in plan.filtered_out]
    pre.sort(key=lambda t: t[0])
    pre_parts = [p for _, _, p in pre]
    pre_kinds = [k for _, k, _ in pre]

    if balanced:
        Y = max(len(p) for p in pre_parts) if Y is None else Y
        imb = [int(plan.is_opt[list(p)].sum()) * 2 - len(p) for p in pre_parts]
        groups = balance_groups(imb, [len(p) for p in pre_parts], Y)
        parts = [frozenset().union(*(pre_parts[i] for i in g)) for g in groups]
    else:
        groups = [[i] for i in range(len(pre_parts))]
        parts = list(pre_parts)
    return PartitionSample(shift, band_of, offsets, widths, cell_of, frozenset(moved), pre_parts,
                           pre_kinds, parts, groups, balanced, Y)
