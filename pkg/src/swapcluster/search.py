"""Multi-swap local search for k-clustering, facility location and generalized k-median."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .core import COST_RTOL, Instance
from .objective import InfeasibleError, Solution, apply_move, assign_all, cost_delta_swap
from .seeding import initial_centres

log = logging.getLogger(__name__)

Move = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass
class SearchConfig:
    rho: int = 1
    acceptance: str = "strict"
    epsilon: float | None = None
    max_iterations: int | None = None
    improvement: str = "first"
    init: str = "dsampling"
    parallel_moves: bool = False
    workers: int = 4
    window: int = 64
    seed: int | None = None

    def __post_init__(self):
        if int(self.rho) != self.rho or self.rho < 1:
            raise ValueError("rho must be a positive integer")
        if self.acceptance not in ("strict", "scaled"):
            raise ValueError("acceptance must be 'strict' or 'scaled'")
        if self.acceptance == "scaled":
            if self.epsilon is None or not 0 < self.epsilon < 1:
                raise ValueError("scaled acceptance needs epsilon in (0, 1)")
        if self.improvement not in ("first", "best"):
            raise ValueError("improvement must be 'first' or 'best'")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.workers < 1 or self.window < 1:
            raise ValueError("workers and window must be >= 1")


@dataclass(frozen=True)
class Step:
    drop: tuple[int, ...]
    add: tuple[int, ...]
    cost_before: float
    cost_after: float


@dataclass
class SearchTrace:
    initial: Solution
    final: Solution
    steps: list[Step] = field(default_factory=list)
    certified_local_opt: bool = False

    @property
    def iterations(self) -> int:
        return len(self.steps)


def enumerate_moves(instance: Instance, open_ids: Sequence[int], rho: int) -> Iterator[Move]:
    """Admissible ``(drop, add)`` moves in canonical order.

    Ordered by ``|drop| + |add|``, then the sorted drop ids, then the sorted add
    ids. For ``lq`` only equal-size swaps appear; for ``ufl`` and ``gkm`` any
    add and/or drop of at most ``rho`` centres keeping the set feasible.
    """
    opened = tuple(sorted(open_ids))
    spare = tuple(i for i in range(instance.m) if i not in set(opened))
    obj = instance.objective
    if rho < 1:
        return
    if obj.family == "lq":
        for s in range(1, min(rho, len(opened), len(spare)) + 1):
            for drop in itertools.combinations(opened, s):
                for add in itertools.combinations(spare, s):
                    yield drop, add
        return
    max_drop, max_add = min(rho, len(opened)), min(rho, len(spare))
    for total in range(1, max_drop + max_add + 1):
        batch = []
        for sd in range(max(0, total - max_add), min(max_drop, total) + 1):
            sa = total - sd
            if not obj.feasible_size(len(opened) - sd + sa):
                continue
            for drop in itertools.combinations(opened, sd):
                for add in itertools.combinations(spare, sa):
                    batch.append((drop, add))
        batch.sort()
        yield from batch


def acceptance_factor(instance: Instance, config: SearchConfig) -> float:
    """Multiplier a move's cost must reach under scaled acceptance."""
    if config.acceptance != "scaled":
        return 1.0
    obj = instance.objective
    if obj.family == "lq":
        return 1.0 - config.epsilon / obj.k
    return 1.0 - config.epsilon / (2 * instance.m)


def _accepts(before: float, after: float, factor: float, scaled: bool) -> bool:
    if not after < before - COST_RTOL * abs(before):
        return False
    return not scaled or after <= factor * before


class _Evaluator:
    def __init__(self, instance: Instance, config: SearchConfig):
        self.instance = instance
        self.config = config
        self.factor = acceptance_factor(instance, config)
        self.scaled = config.acceptance == "scaled"
        self.pool = ThreadPoolExecutor(config.workers) if config.parallel_moves else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def _windows(self, moves):
        it = iter(moves)
        while True:
            chunk = list(itertools.islice(it, self.config.window))
            if not chunk:
                return
            yield chunk

    def _deltas(self, sol: Solution, chunk):
        fn = lambda mv: cost_delta_swap(self.instance, sol, mv[0], mv[1])
        if self.pool is None:
            return [fn(mv) for mv in chunk]
        return list(self.pool.map(fn, chunk))

    def find(self, sol: Solution) -> tuple[Move, float] | None:
        before = sol.total_cost
        moves = enumerate_moves(self.instance, sol.open, self.config.rho)
        best = None
        for chunk in self._windows(moves):
            for mv, delta in zip(chunk, self._deltas(sol, chunk)):
                if not _accepts(before, before + delta, self.factor, self.scaled):
                    continue
                if self.config.improvement == "first":
                    return mv, delta
                if best is None or delta < best[1]:
                    best = (mv, delta)
        return best


def _run(instance: Instance, config: SearchConfig, start: Sequence[int]) -> SearchTrace:
    if config.rho > instance.m:
        raise ValueError(f"rho={config.rho} exceeds the number of candidates {instance.m}")
    current = assign_all(instance, start)
    trace = SearchTrace(initial=current, final=current)
    ev = _Evaluator(instance, config)
    try:
        while config.max_iterations is None or trace.iterations < config.max_iterations:
            found = ev.find(current)
            if found is None:
                trace.certified_local_opt = True
                break
            (drop, add), _ = found
            nxt = apply_move(instance, current, drop, add)
            trace.steps.append(Step(drop, add, current.total_cost, nxt.total_cost))
            log.debug("step %d: drop %s add %s -> %.12g", trace.iterations, drop, add, nxt.total_cost)
            current = nxt
    finally:
        ev.close()
    trace.final = current
    return trace


def _rng(instance: Instance, config: SearchConfig):
    return np.random.default_rng(instance.rng_seed if config.seed is None else config.seed)


def local_search_lq(instance: Instance, config: SearchConfig, initial: Sequence[int] | None = None) -> SearchTrace:
    """Swap up to ``rho`` centres at a time while the cost improves; keeps exactly ``k`` open."""
    obj = instance.objective
    if obj.family != "lq":
        raise ValueError("local_search_lq needs an lq objective")
    if initial is None:
        initial = initial_centres(instance, config.init, obj.k, _rng(instance, config))
    elif len(set(initial)) != obj.k:
        raise InfeasibleError(f"initial set must have exactly k={obj.k} centres")
    return _run(instance, config, initial)


def local_search_ufl(instance: Instance, config: SearchConfig, initial: Sequence[int] | None = None) -> SearchTrace:
    """Add and/or drop up to ``rho`` centres at a time; starts from every candidate open."""
    if instance.objective.family != "ufl":
        raise ValueError("local_search_ufl needs a ufl objective")
    if initial is None:
        initial = range(instance.m)
    return _run(instance, config, initial)


def local_search_gkm(instance: Instance, config: SearchConfig, initial: Sequence[int] | None = None) -> SearchTrace:
    """Add and/or drop up to ``rho`` centres while between 1 and ``k`` stay open."""
    obj = instance.objective
    if obj.family != "gkm":
        raise ValueError("local_search_gkm needs a gkm objective")
    if initial is None:
        initial = initial_centres(instance, config.init, obj.k, _rng(instance, config))
    elif not 1 <= len(set(initial)) <= obj.k:
        raise InfeasibleError(f"initial set must have between 1 and k={obj.k} centres")
    return _run(instance, config, initial)


def local_search(instance: Instance, config: SearchConfig, initial=None) -> SearchTrace:
    engine = {"lq": local_search_lq, "ufl": local_search_ufl, "gkm": local_search_gkm}
    return engine[instance.objective.family](instance, config, initial)
