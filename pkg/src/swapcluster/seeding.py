"""Initial centre sets for the local search engines."""

from __future__ import annotations

import numpy as np

from .core import Instance, powq


def dsampling_seed(instance: Instance, size: int | None = None, rng=None) -> tuple[int, ...]:
    """k-means++ style seeding over the candidate set.

    A point is drawn with probability proportional to ``w_j * dist(j, S)**q``
    (``w_j`` alone for the first draw) and its nearest unopened candidate is
    opened. When every remaining point is already covered at zero cost the
    lowest unopened candidate ids fill the rest.
    """
    size = instance.objective.k if size is None else size
    if size is None or not 1 <= size <= instance.m:
        raise ValueError(f"cannot seed {size} centres from {instance.m} candidates")
    rng = np.random.default_rng(instance.rng_seed) if rng is None else rng
    dist = instance.point_cand
    w = instance.weights
    chosen: list[int] = []
    closed = np.ones(instance.m, dtype=bool)
    cur = None
    while len(chosen) < size:
        mass = w.copy() if cur is None else w * powq(cur, instance.objective.q)
        total = mass.sum()
        if total > 0:
            j = int(rng.choice(instance.n, p=mass / total))
            order = np.lexsort((np.arange(instance.m), dist[j]))
            pick = int(next(c for c in order if closed[c]))
        else:
            pick = int(np.flatnonzero(closed)[0])
        chosen.append(pick)
        closed[pick] = False
        col = dist[:, pick]
        cur = col.copy() if cur is None else np.minimum(cur, col)
    return tuple(sorted(chosen))


def initial_centres(instance: Instance, policy: str, size: int, rng) -> tuple[int, ...]:
    if policy == "dsampling":
        return dsampling_seed(instance, size, rng)
    if policy == "first-k":
        return tuple(range(size))
    if policy == "arbitrary":
        return tuple(sorted(int(i) for i in rng.choice(instance.m, size=size, replace=False)))
    raise ValueError(f"unknown init policy {policy!r}")
