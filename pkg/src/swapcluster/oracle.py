"""Exhaustive exact solvers for tiny instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import COST_RTOL, Instance

DEFAULT_LIMIT = 10**7
MAX_BEST_SETS = 64
_BATCH = 4096


class OracleLimitError(ValueError):
    def __init__(self, required: int, limit: int):
        super().__init__(f"enumeration needs {required} subsets, limit is {limit}")
        self.required = required
        self.limit = limit


@dataclass
class OracleResult:
    best_cost: float
    best_sets: list[tuple[int, ...]] = field(default_factory=list)
    enumerated: int = 0


def _scan(instance: Instance, sizes, result: OracleResult) -> OracleResult:
    dist = instance.point_cand
    pcost = instance.point_cost
    rows = np.arange(instance.n)[:, None]
    pay = instance.objective.pays_opening
    f = instance.opening_costs
    found: list[tuple[float, tuple[int, ...]]] = []
    best = math.inf
    for size in sizes:
        combos = itertools.combinations(range(instance.m), size)
        while True:
            chunk = list(itertools.islice(combos, _BATCH))
            if not chunk:
                break
            idx = np.asarray(chunk, dtype=np.int64)
            sub = dist[:, idx]  # (n, batch, size)
            nearest = idx[np.arange(len(idx))[None, :], np.argmin(sub, axis=2)]
            costs = pcost[rows, nearest].sum(axis=0)
            if pay:
                costs = costs + f[idx].sum(axis=1)
            result.enumerated += len(chunk)
            low = float(costs.min())
            if low < best:
                best = low
            cut = best + COST_RTOL * abs(best)
            for pos in np.flatnonzero(costs <= cut):
                found.append((float(costs[pos]), chunk[pos]))
            found = [(c, s) for c, s in found if c <= cut]
    result.best_cost = best
    result.best_sets = [s for _, s in found][:MAX_BEST_SETS]
    return result


def exact_lq(instance: Instance, limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Optimal ``k``-subset by enumerating all of them in lexicographic order."""
    k = instance.objective.k
    if instance.objective.family != "lq":
        raise ValueError("exact_lq needs an lq objective")
    required = math.comb(instance.m, k)
    if required > limit:
        raise OracleLimitError(required, limit)
    return _scan(instance, [k], OracleResult(math.inf))


def exact_ufl(instance: Instance, limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Optimal nonempty subset, enumerated by size then lexicographically."""
    if instance.objective.family != "ufl":
        raise ValueError("exact_ufl needs a ufl objective")
    required = 2**instance.m - 1
    if required > limit:
        raise OracleLimitError(required, limit)
    return _scan(instance, range(1, instance.m + 1), OracleResult(math.inf))


def exact_gkm(instance: Instance, limit: int = DEFAULT_LIMIT) -> OracleResult:
    """Optimal subset with between 1 and ``k`` centres."""
    if instance.objective.family != "gkm":
        raise ValueError("exact_gkm needs a gkm objective")
    k = instance.objective.k
    required = sum(math.comb(instance.m, s) for s in range(1, k + 1))
    if required > limit:
        raise OracleLimitError(required, limit)
    return _scan(instance, range(1, k + 1), OracleResult(math.inf))


def exact(instance: Instance, limit: int = DEFAULT_LIMIT) -> OracleResult:
    solver = {"lq": exact_lq, "ufl": exact_ufl, "gkm": exact_gkm}
    return solver[instance.objective.family](instance, limit)
