"""Reference heuristics to compare local search against."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import Instance, powq
from ..objective import Solution, assign_all
from ..seeding import dsampling_seed

__all__ = ["LloydResult", "dsampling_seed", "lloyd_baseline", "snap_to_candidates"]


@dataclass
class LloydResult:
    solution: Solution
    unsnapped_cost: float
    centroids: np.ndarray
    iterations: int


def snap_to_candidates(instance: Instance, centres: np.ndarray) -> tuple[int, ...]:
    """Map continuous centres to distinct candidates, nearest free one first.

    Centres are processed in order; a centre whose nearest candidate is
    already taken gets the nearest free one, so the result keeps ``len(centres)``
    distinct ids.
    """
    dist = instance.metric.pairwise(np.asarray(centres, dtype=float), instance.candidates.locs)
    taken: set[int] = set()
    for row in dist:
        order = np.lexsort((np.arange(instance.m), row))
        taken.add(int(next(c for c in order if int(c) not in taken)))
    return tuple(sorted(taken))


def _nearest(points: np.ndarray, centres: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centres[None, :, :]
    return np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)


def lloyd_baseline(instance: Instance, max_iters: int = 100, init=None, rng=None) -> LloydResult:
    """Lloyd's alternation of nearest-centre assignment and weighted centroids.

    Starts from ``init`` (a ``(k, d)`` array) or from ``k`` distinct points
    drawn uniformly at random. Stops when the centroids or the assignment stop
    changing, or after ``max_iters`` updates. The final centroids are snapped
    to candidates to give a discrete solution; the continuous cost is kept in
    ``unsnapped_cost``.
    """
    if not instance.metric.is_euclidean:
        raise ValueError("Lloyd's method needs a Euclidean metric")
    if instance.objective.family != "lq":
        raise ValueError("Lloyd's method needs an lq objective")
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    k = instance.objective.k
    pts = instance.points.locs
    w = instance.weights
    if init is None:
        rng = np.random.default_rng(instance.rng_seed) if rng is None else rng
        if k > instance.n:
            raise ValueError(f"k={k} exceeds the number of points")
        centres = pts[np.sort(rng.choice(instance.n, size=k, replace=False))].copy()
    else:
        centres = np.array(init, dtype=float)
        if centres.shape != (k, instance.metric.dim):
            raise ValueError(f"init must have shape ({k}, {instance.metric.dim})")

    label = _nearest(pts, centres)
    iterations = 0
    while iterations < max_iters:
        new = centres.copy()
        for c in range(k):
            mask = label == c
            if w[mask].sum() > 0:
                new[c] = np.average(pts[mask], axis=0, weights=w[mask])
        if np.array_equal(new, centres):
            break
        centres = new
        iterations += 1
        relabel = _nearest(pts, centres)
        if np.array_equal(relabel, label):
            break
        label = relabel

    gap = np.sqrt(((pts - centres[_nearest(pts, centres)]) ** 2).sum(axis=1))
    unsnapped = float(w @ powq(gap, instance.objective.q))
    return LloydResult(assign_all(instance, snap_to_candidates(instance, centres)), unsnapped, centres, iterations)
