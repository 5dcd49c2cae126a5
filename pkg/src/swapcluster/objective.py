"""Nearest-centre assignment and cost evaluation for every objective family."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .core import Instance

FAMILIES = ("lq", "ufl", "gkm")


class InfeasibleError(ValueError):
    """A centre set violates the objective's cardinality constraint."""


@dataclass(frozen=True)
class ObjectiveSpec:
    """Objective family.

    ``lq`` sums ``w_j * dist**q`` over exactly ``k`` open centres; ``ufl``
    adds opening costs and drops the cardinality bound; ``gkm`` adds opening
    costs with ``1 <= |open| <= k``. Opening costs live on the candidates.
    """

    family: str
    q: float = 2.0
    k: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown objective family {self.family!r}")
        if not (math.isfinite(self.q) and self.q >= 1):
            raise ValueError("q must be a real >= 1")
        object.__setattr__(self, "q", float(self.q))
        if self.family == "ufl":
            object.__setattr__(self, "k", None)
        elif self.k is None or int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        else:
            object.__setattr__(self, "k", int(self.k))

    @classmethod
    def lq(cls, q: float, k: int) -> "ObjectiveSpec":
        return cls("lq", q, k)

    @classmethod
    def ufl(cls, q: float = 1.0) -> "ObjectiveSpec":
        return cls("ufl", q, None)

    @classmethod
    def gkm(cls, k: int, q: float = 1.0) -> "ObjectiveSpec":
        return cls("gkm", q, k)

    @property
    def pays_opening(self) -> bool:
        return self.family != "lq"

    def feasible_size(self, size: int) -> bool:
        if self.family == "lq":
            return size == self.k
        if self.family == "gkm":
            return 1 <= size <= self.k
        return size >= 1


@dataclass(frozen=True, eq=False)
class Solution:
    open: tuple[int, ...]
    assign: np.ndarray
    per_point_cost: np.ndarray
    total_cost: float

    @property
    def opening_cost(self) -> float:
        return self.total_cost - float(self.per_point_cost.sum())


def _check_open(instance: "Instance", open_ids: Iterable[int]) -> np.ndarray:
    cols = np.array(sorted({int(i) for i in open_ids}), dtype=np.int64)
    if len(cols) == 0:
        raise InfeasibleError("open centre set is empty")
    if cols[0] < 0 or cols[-1] >= instance.m:
        raise InfeasibleError("open centre id out of range")
    if not instance.objective.feasible_size(len(cols)):
        raise InfeasibleError(
            f"{len(cols)} open centres infeasible for {instance.objective.family} (k={instance.objective.k})"
        )
    return cols


def assign_all(instance: "Instance", open_ids: Iterable[int]) -> Solution:
    """Assign each point to its nearest open centre, lowest candidate id on ties."""
    cols = _check_open(instance, open_ids)
    sub = instance.point_cand[:, cols]
    assign = cols[np.argmin(sub, axis=1)]
    rows = np.arange(instance.n)
    per_point = instance.point_cost[rows, assign].copy()
    total = float(per_point.sum())
    if instance.objective.pays_opening:
        total += float(instance.opening_costs[cols].sum())
    per_point.setflags(write=False)
    assign.setflags(write=False)
    return Solution(tuple(int(c) for c in cols), assign, per_point, total)


def solution_cost(instance: "Instance", open_ids: Iterable[int]) -> float:
    return assign_all(instance, open_ids).total_cost


def moved_assignment(instance: "Instance", solution: Solution, drop, add) -> tuple[np.ndarray, np.ndarray]:
    """New assignment after a move, re-evaluating only the points it can affect."""
    dist = instance.point_cand
    rows = np.arange(instance.n)
    assign = solution.assign
    new_assign = assign.copy()
    if add:
        add_cols = np.array(sorted(add), dtype=np.int64)
        sub = dist[:, add_cols]
        best = np.argmin(sub, axis=1)
        best_d = sub[rows, best]
        best_c = add_cols[best]
        cur_d = dist[rows, assign]
        closer = (best_d < cur_d) | ((best_d == cur_d) & (best_c < assign))
        new_assign[closer] = best_c[closer]
    if drop:
        orphan = np.isin(assign, np.fromiter(drop, dtype=np.int64, count=len(drop)))
        if orphan.any():
            keep = sorted((set(solution.open) - set(drop)) | set(add))
            cols = np.array(keep, dtype=np.int64)
            sub = dist[np.ix_(orphan, cols)]
            new_assign[orphan] = cols[np.argmin(sub, axis=1)]
    return new_assign, instance.point_cost[rows, new_assign]


def cost_delta_swap(instance: "Instance", solution: Solution, drop=(), add=()) -> float:
    """Cost change of closing ``drop`` and opening ``add``.

    Equals ``assign_all(new).total_cost - solution.total_cost``; only points
    whose centre closes, or that sit closer to an added centre, are touched.
    """
    drop, add = frozenset(drop), frozenset(add)
    if not drop and not add:
        return 0.0
    open_set = set(solution.open)
    if not drop <= open_set:
        raise InfeasibleError("drop contains centres that are not open")
    if add & open_set:
        raise InfeasibleError("add contains centres that are already open")
    if any(not 0 <= i < instance.m for i in add):
        raise InfeasibleError("add contains an invalid candidate id")
    size = len(open_set) - len(drop) + len(add)
    if size < 1 or not instance.objective.feasible_size(size):
        raise InfeasibleError(f"move leaves {size} open centres")
    _, new_cost = moved_assignment(instance, solution, drop, add)
    delta = float(new_cost.sum() - solution.per_point_cost.sum())
    if instance.objective.pays_opening:
        f = instance.opening_costs
        delta += float(sum(f[i] for i in add) - sum(f[i] for i in drop))
    return delta


def apply_move(instance: "Instance", solution: Solution, drop=(), add=()) -> Solution:
    return assign_all(instance, (set(solution.open) - set(drop)) | set(add))
