"""Pairing a local optimum with a global optimum, and the greedy filtering of both.

Centres of the two solutions are cloned into a common id space: optimum
centres first (ids ``0..|O|-1``, in candidate order), then local centres.
A candidate used by both solutions therefore appears twice, at distance 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ..core import Instance


@dataclass(frozen=True, eq=False)
class PairedSolutions:
    instance: Instance
    local: tuple[int, ...]
    optimum: tuple[int, ...]
    disjointified: bool = True

    @classmethod
    def build(cls, instance: Instance, local: Sequence[int], optimum: Sequence[int]) -> "PairedSolutions":
        loc, opt = tuple(sorted(set(local))), tuple(sorted(set(optimum)))
        if not loc or not opt:
            raise ValueError("both solutions must be nonempty")
        for c in loc + opt:
            if not 0 <= c < instance.m:
                raise ValueError(f"candidate id {c} out of range")
        return cls(instance, loc, opt)

    @property
    def size(self) -> int:
        return len(self.optimum) + len(self.local)

    @cached_property
    def candidate_of(self) -> np.ndarray:
        """Candidate id behind every centre clone."""
        return np.array(self.optimum + self.local, dtype=np.int64)

    @cached_property
    def is_opt(self) -> np.ndarray:
        flag = np.zeros(self.size, dtype=bool)
        flag[: len(self.optimum)] = True
        return flag

    @property
    def opt_ids(self) -> range:
        return range(len(self.optimum))

    @property
    def local_ids(self) -> range:
        return range(len(self.optimum), self.size)

    @cached_property
    def centre_dist(self) -> np.ndarray:
        c = self.candidate_of
        return self.instance.cand_cand[np.ix_(c, c)]

    @cached_property
    def point_dist(self) -> np.ndarray:
        """``(n, centres)`` distances from every point to every clone."""
        return self.instance.point_cand[:, self.candidate_of]

    def coords(self) -> np.ndarray:
        if not self.instance.metric.is_euclidean:
            raise ValueError("coordinates need a Euclidean metric")
        return self.instance.candidates.locs[self.candidate_of]


@dataclass(frozen=True, eq=False)
class FilterResult:
    """Filtered centre sets and the maps built on them.

    ``cross_dist[i]`` is the distance from centre ``i`` to the nearest centre
    of the other solution. ``proxy`` maps every centre to a kept centre of
    its own side; ``partner`` maps each kept centre to its nearest kept centre
    on the other side. ``anchor[i]`` is the closest centre among those whose
    partner is ``i``. Tether pairs ``(anchor[i], i)`` must never be split;
    net pairs are close (optimum, local) pairs that should rarely be split.
    """

    paired: PairedSolutions
    epsilon: float
    cross_dist: np.ndarray
    kept_opt: tuple[int, ...]
    kept_local: tuple[int, ...]
    proxy: np.ndarray
    partner: dict[int, int]
    point_local: np.ndarray
    point_opt: np.ndarray
    point_local_proxy: np.ndarray
    point_opt_proxy: np.ndarray
    anchor: dict[int, int]
    tethers: tuple[tuple[int, int], ...]
    net_pairs: tuple[tuple[int, int], ...]

    @cached_property
    def kept(self) -> frozenset[int]:
        return frozenset(self.kept_opt) | frozenset(self.kept_local)


def _nearest(dist_row: np.ndarray, among: Sequence[int]) -> int:
    """Nearest of ``among`` (sorted ids), lowest id on ties."""
    ids = np.asarray(among, dtype=np.int64)
    return int(ids[np.argmin(dist_row[ids])])


def _filter_side(ids: Sequence[int], cross: np.ndarray, dist: np.ndarray, epsilon: float,
                 proxy: np.ndarray) -> list[int]:
    kept: list[int] = []
    for c in sorted(ids, key=lambda i: (cross[i], i)):
        close = [o for o in kept if dist[c, o] <= epsilon * cross[c]]
        if close:
            proxy[c] = min(close, key=lambda o: (dist[c, o], o))
        else:
            proxy[c] = c
            kept.append(c)
    return sorted(kept)


def compute_D_and_filter(paired: PairedSolutions, epsilon: float) -> FilterResult:
    """Cross distances, greedy filtering of both sides and the derived maps.

    Each side is scanned in nondecreasing cross distance (ties by id); a
    centre within ``epsilon * cross_dist`` of an already kept centre is
    dropped and proxied by the nearest such centre.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if not paired.disjointified:
        raise ValueError("solutions must be disjointified")
    dist = paired.centre_dist
    opt, loc = list(paired.opt_ids), list(paired.local_ids)
    cross = np.empty(paired.size)
    cross[opt] = dist[np.ix_(opt, loc)].min(axis=1)
    cross[loc] = dist[np.ix_(loc, opt)].min(axis=1)

    proxy = np.empty(paired.size, dtype=np.int64)
    kept_opt = _filter_side(opt, cross, dist, epsilon, proxy)
    kept_local = _filter_side(loc, cross, dist, epsilon, proxy)

    partner = {i: _nearest(dist[i], kept_local) for i in kept_opt}
    partner.update({i: _nearest(dist[i], kept_opt) for i in kept_local})

    pdist = paired.point_dist
    point_opt = np.asarray(opt, dtype=np.int64)[np.argmin(pdist[:, opt], axis=1)]
    point_local = np.asarray(loc, dtype=np.int64)[np.argmin(pdist[:, loc], axis=1)]

    preimage: dict[int, list[int]] = {}
    for i in kept_opt:
        preimage.setdefault(partner[i], []).append(i)
    anchor = {i: min(pre, key=lambda o: (dist[i, o], o)) for i, pre in sorted(preimage.items())}
    tethers = tuple((anchor[i], i) for i in sorted(anchor) if epsilon * dist[anchor[i], i] <= cross[i])
    net = tuple(
        (o, i)
        for o in kept_opt
        for i in kept_local
        if dist[i, o] <= cross[i] / epsilon and cross[o] >= epsilon * cross[i]
    )
    for arr in (cross, proxy, point_local, point_opt):
        arr.setflags(write=False)
    return FilterResult(
        paired=paired,
        epsilon=epsilon,
        cross_dist=cross,
        kept_opt=tuple(kept_opt),
        kept_local=tuple(kept_local),
        proxy=proxy,
        partner=partner,
        point_local=point_local,
        point_opt=point_opt,
        point_local_proxy=proxy[point_local],
        point_opt_proxy=proxy[point_opt],
        anchor=anchor,
        tethers=tethers,
        net_pairs=net,
    )
