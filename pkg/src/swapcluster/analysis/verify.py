"""Executable checks of the filtering, partitioning and swap-accounting inequalities."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..core import powq
from .filtering import FilterResult
from .partition import PartitionSample, sample_partition
from .theory import log10_cell_bound, log10_part_bound

# Category bounds on the summed per-point cost change, k-means only:
# sum_P delta_j <= slope * c*_j - c_j * (1 if slope else 0) + coef * (c*_j + c_j).
_CATEGORY_BOUNDS = {
    "lucky": (True, lambda e: 6 * e),
    "long": (True, lambda e: 44 * e),
    "bad": (False, lambda e: 71.0),
    "good-subcase-A": (True, lambda e: 24 * e),
    "good-subcase-B": (True, lambda e: 24 * e),
}
CATEGORIES = tuple(_CATEGORY_BOUNDS)
ASSERT_EPSILON = 0.05
LEMMA3_FACTOR = 5.0


def _tol(filt: FilterResult) -> float:
    scale = float(filt.paired.instance.point_cand.max(initial=0.0))
    scale = max(scale, float(filt.paired.centre_dist.max(initial=0.0)), 1.0)
    return 1e-9 * scale


def check_filter(filt: FilterResult) -> dict[str, list]:
    """Exhaustive proxy, separation, partner-distance, point-radius and zero-pair checks."""
    eps = filt.epsilon
    dist = filt.paired.centre_dist
    cross = filt.cross_dist
    tol = _tol(filt)
    out: dict[str, list] = {k: [] for k in ("proxy", "separation", "partner", "point_radius", "zero_pairs")}

    for c in range(filt.paired.size):
        if dist[c, filt.proxy[c]] > eps * cross[c] + tol:
            out["proxy"].append({"centre": c, "dist": float(dist[c, filt.proxy[c]]), "limit": float(eps * cross[c])})
    kept = sorted(filt.kept)
    for x, a in enumerate(kept):
        for b in kept[x + 1:]:
            need = eps * max(cross[a], cross[b])
            if dist[a, b] < need - tol:
                out["separation"].append({"pair": (a, b), "dist": float(dist[a, b]), "limit": float(need)})
    for c in kept:
        d = dist[c, filt.partner[c]]
        if d < cross[c] - tol or d > (1 + eps) * cross[c] + tol:
            out["partner"].append({"centre": c, "dist": float(d), "cross": float(cross[c])})

    pdist = filt.paired.point_dist
    for j in range(filt.paired.instance.n):
        s, o = filt.point_local[j], filt.point_opt[j]
        reach = pdist[j, s] + pdist[j, o]
        for near, proxy in ((s, filt.point_local_proxy[j]), (o, filt.point_opt_proxy[j])):
            if cross[proxy] > cross[near] + tol or cross[near] > reach + tol:
                out["point_radius"].append({"point": j, "centre": int(near), "proxy": int(proxy),
                                            "cross": float(cross[near]), "reach": float(reach)})
    for pair in filt.tethers + filt.net_pairs:
        if sum(cross[c] == 0 for c in pair) == 1:
            out["zero_pairs"].append(pair)
    return out


class PartCache:
    """Per-part quantities, memoized: swapped centre set, cost changes, reach checks."""

    def __init__(self, filt: FilterResult):
        self.filt = filt
        paired = filt.paired
        inst = paired.instance
        self.q = inst.objective.q
        self.local = frozenset(paired.local_ids)
        self.opt = frozenset(paired.opt_ids)
        base = paired.point_dist[:, list(paired.local_ids)].min(axis=1)
        self.base_pow = powq(base, self.q)
        self.weights = inst.weights
        self.tol = _tol(filt)
        self._delta: dict[frozenset, np.ndarray] = {}
        self._reach: dict[frozenset, list] = {}

    def swapped(self, part: frozenset[int]) -> frozenset[int]:
        """Centres open after closing the local side of ``part`` and opening its optimum side."""
        return (self.local - part) | (self.opt & part)

    def delta(self, part: frozenset[int]) -> np.ndarray:
        """Unweighted per-point change ``dist(j, swapped)**q - dist(j, local)**q``."""
        got = self._delta.get(part)
        if got is None:
            cols = sorted(self.swapped(part))
            new = self.filt.paired.point_dist[:, cols].min(axis=1)
            got = powq(new, self.q) - self.base_pow
            self._delta[part] = got
        return got

    def reach_violations(self, part: frozenset[int]) -> list:
        """Centres farther than ``5 * cross_dist`` from the kept centres open after the swap."""
        got = self._reach.get(part)
        if got is None:
            filt = self.filt
            avail = sorted(self.swapped(part) & filt.kept)
            got = []
            if not avail:
                got.append({"part": sorted(part), "reason": "no kept centre open"})
            else:
                near = filt.paired.centre_dist[:, avail].min(axis=1)
                limit = LEMMA3_FACTOR * filt.cross_dist
                for c in np.flatnonzero(near > limit + self.tol):
                    got.append({"part": sorted(part), "centre": int(c), "dist": float(near[c]),
                                "limit": float(limit[c])})
                open_set = set(avail)
                for o, i in filt.tethers:
                    if o not in open_set and i not in open_set:
                        got.append({"part": sorted(part), "tether": (o, i), "reason": "tether fully closed"})
            self._reach[part] = got
        return got

    def witness(self, part: frozenset[int], rho: int) -> tuple[bool, float] | None:
        """Weighted cost change of the test swap for ``part``; ``None`` if the swap is not a legal move."""
        paired = self.filt.paired
        obj = paired.instance.objective
        closing, opening = part & self.local, part & self.opt
        cand = paired.candidate_of
        after = {int(cand[c]) for c in self.swapped(part)}
        if obj.family == "lq":
            if len(closing) != len(opening) or len(closing) > rho:
                return None
        else:
            if len(closing) > rho or len(opening) > rho or not obj.feasible_size(len(after)):
                return None
        change = float(self.weights @ self.delta(part))
        if obj.pays_opening:
            f = paired.instance.opening_costs
            change += float(sum(f[cand[c]] for c in opening) - sum(f[cand[c]] for c in closing))
        total = float(self.weights @ self.base_pow)
        return change >= -1e-9 * max(total, 1.0), change


_caches: dict[int, tuple[FilterResult, PartCache]] = {}


def part_cache(filt: FilterResult) -> PartCache:
    hit = _caches.get(id(filt))
    if hit is None or hit[0] is not filt:
        if len(_caches) > 64:
            _caches.clear()
        hit = (filt, PartCache(filt))
        _caches[id(filt)] = hit
    return hit[1]


@dataclass
class SampleCheck:
    covers: bool = True
    unbalanced: list = field(default_factory=list)
    cut_tethers: list = field(default_factory=list)
    oversized_cells: list = field(default_factory=list)
    oversized_parts: list = field(default_factory=list)
    reach: list = field(default_factory=list)
    witness: list = field(default_factory=list)
    witnessed: int = 0

    @property
    def ok(self) -> bool:
        return (self.covers and not self.unbalanced and not self.cut_tethers and not self.oversized_cells
                and not self.oversized_parts and not self.reach and not self.witness)


def check_sample(filt: FilterResult, sample: PartitionSample, epsilon: float, dim: int,
                 rho: int | None = None, cache: PartCache | None = None) -> SampleCheck:
    cache = part_cache(filt) if cache is None else cache
    paired = filt.paired
    res = SampleCheck()
    seen = [c for p in sample.parts for c in p]
    res.covers = len(seen) == paired.size and set(seen) == set(range(paired.size))
    if sample.balanced:
        for idx, p in enumerate(sample.parts):
            if len(p & cache.opt) != len(p & cache.local):
                res.unbalanced.append(idx)
    for o, i in filt.tethers:
        if sample.part_of.get(o) != sample.part_of.get(i):
            res.cut_tethers.append((o, i))
    cell_bound = log10_cell_bound(epsilon, dim)
    for idx, p in enumerate(sample.pre_parts):
        if math.log10(len(p)) > cell_bound:
            res.oversized_cells.append(idx)
    part_bound = log10_part_bound(epsilon, dim)
    for idx, p in enumerate(sample.parts):
        if math.log10(len(p)) > part_bound:
            res.oversized_parts.append(idx)
        res.reach.extend(cache.reach_violations(p))
        if rho is not None:
            got = cache.witness(p, rho)
            if got is not None:
                res.witnessed += 1
                if not got[0]:
                    res.witness.append({"part": sorted(p), "change": got[1]})
    return res


def verify_lemmas(filt: FilterResult, sample: PartitionSample, epsilon: float, dim: int | None = None,
                  rho: int | None = None) -> dict:
    """Pass/fail report with witnesses for one filtered pair and one partition sample."""
    dim = filt.paired.instance.metric.dim if dim is None else dim
    flt = check_filter(filt)
    chk = check_sample(filt, sample, epsilon, dim, rho)

    def entry(violations):
        return {"pass": not violations, "violations": violations}

    return {
        "filter_proxy": entry(flt["proxy"]),
        "filter_separation": entry(flt["separation"]),
        "partner_distance": entry(flt["partner"]),
        "point_radius": entry(flt["point_radius"]),
        "zero_pairs": entry(flt["zero_pairs"]),
        "partition_covers": {"pass": chk.covers},
        "balanced": entry(chk.unbalanced),
        "tethers_uncut": entry(chk.cut_tethers),
        "cell_size": entry([{"pre_part": i, "size": len(sample.pre_parts[i])} for i in chk.oversized_cells]),
        "part_size": entry([{"part": i, "size": len(sample.parts[i])} for i in chk.oversized_parts]),
        "reach": entry(chk.reach),
        "local_optimality": entry(chk.witness) | {"checked_parts": chk.witnessed},
    }


def _trial_rng(seed: int, trial: int):
    return np.random.default_rng([seed, trial])


def estimate_cut_probability(filt: FilterResult, epsilon: float, dim: int, trials: int, seed: int = 0,
                             balanced: bool = True) -> dict:
    """Empirical frequency with which each net pair lands in different parts."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cuts = Counter()
    for t in range(trials):
        sample = sample_partition(filt, epsilon, dim, _trial_rng(seed, t), balanced=balanced)
        for pair in filt.net_pairs:
            if sample.part_of[pair[0]] != sample.part_of[pair[1]]:
                cuts[pair] += 1
    freq = {pair: cuts[pair] / trials for pair in filt.net_pairs}
    return {"frequencies": freq, "max": max(freq.values(), default=0.0), "trials": trials}


def cut_slack(epsilon: float, trials: int) -> float:
    """Allowed empirical cut frequency: ``eps`` plus three binomial standard errors."""
    return epsilon + 3 * math.sqrt(epsilon * (1 - epsilon) / trials)


def classify_and_account(filt: FilterResult, sample: PartitionSample) -> dict:
    """Classify every point and compare its summed test-swap cost change to its category bound.

    Bounds are the k-means ones and are only evaluated when ``q == 2``; they
    are derived for small ``epsilon`` and flagged as asserted only for
    ``epsilon <= 0.05``.
    """
    eps = filt.epsilon
    paired = filt.paired
    q = paired.instance.objective.q
    cache = part_cache(filt)
    cross = filt.cross_dist
    dist = paired.centre_dist
    net = set(filt.net_pairs)
    part_of = sample.part_of
    total = np.zeros(paired.instance.n)
    for p in sample.parts:
        total += cache.delta(p)
    pdist = paired.point_dist
    tol = _tol(filt) ** 2 if q == 2 else _tol(filt)
    rows = []
    summary = {c: {"count": 0, "violations": 0} for c in CATEGORIES}
    for j in range(paired.instance.n):
        s, s_bar, o_bar = filt.point_local[j], filt.point_local_proxy[j], filt.point_opt_proxy[j]
        if part_of[s] != part_of[s_bar]:
            cat = "lucky"
        elif dist[s_bar, o_bar] > cross[s_bar] / eps:
            cat = "long"
        elif (o_bar, s_bar) in net and part_of[o_bar] != part_of[s_bar]:
            cat = "bad"
        elif cross[o_bar] >= eps * cross[s_bar]:
            cat = "good-subcase-A"
        else:
            cat = "good-subcase-B"
        c = float(powq(pdist[j, s], q))
        c_star = float(powq(pdist[j, filt.point_opt[j]], q))
        row = {"point": j, "category": cat, "sum_delta": float(total[j]), "c": c, "c_star": c_star,
               "bound": None, "holds": None}
        if q == 2:
            has_gain, coef = _CATEGORY_BOUNDS[cat]
            bound = (c_star - c if has_gain else 0.0) + coef(eps) * (c_star + c)
            row["bound"] = bound
            row["holds"] = bool(total[j] <= bound + tol)
            summary[cat]["violations"] += int(not row["holds"])
        summary[cat]["count"] += 1
        rows.append(row)
    return {"epsilon": eps, "q": q, "asserted": q == 2 and eps <= ASSERT_EPSILON,
            "points": rows, "summary": summary}


@dataclass
class TrialSummary:
    trials: int
    epsilon: float
    parts_total: int = 0
    max_part_size: int = 0
    max_cell_size: int = 0
    not_covering: int = 0
    unbalanced: int = 0
    cut_tethers: int = 0
    oversized_cells: int = 0
    oversized_parts: int = 0
    reach_violations: int = 0
    witness_checked: int = 0
    witness_violations: int = 0
    cut_counts: dict = field(default_factory=dict)
    accounting: dict | None = None
    examples: list = field(default_factory=list)

    @property
    def cut_frequencies(self) -> dict:
        return {pair: n / self.trials for pair, n in self.cut_counts.items()}

    @property
    def max_cut_frequency(self) -> float:
        return max(self.cut_frequencies.values(), default=0.0)


def run_trials(filt: FilterResult, epsilon: float, dim: int, trials: int, seed: int = 0,
               rho: int | None = None, balanced: bool = True, keep_examples: int = 5,
               account: bool = False) -> TrialSummary:
    """Sample ``trials`` partitions and tally every structural check across them.

    With ``account`` every sample is also classified point by point and the
    per-category counts and bound violations are summed into ``accounting``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cache = part_cache(filt)
    out = TrialSummary(trials, epsilon, cut_counts={pair: 0 for pair in filt.net_pairs})
    if account:
        out.accounting = {c: {"count": 0, "violations": 0} for c in CATEGORIES}
    for t in range(trials):
        sample = sample_partition(filt, epsilon, dim, _trial_rng(seed, t), balanced=balanced)
        chk = check_sample(filt, sample, epsilon, dim, rho, cache)
        out.parts_total += len(sample.parts)
        out.max_part_size = max(out.max_part_size, max(len(p) for p in sample.parts))
        out.max_cell_size = max(out.max_cell_size, max(len(p) for p in sample.pre_parts))
        out.not_covering += int(not chk.covers)
        out.unbalanced += len(chk.unbalanced)
        out.cut_tethers += len(chk.cut_tethers)
        out.oversized_cells += len(chk.oversized_cells)
        out.oversized_parts += len(chk.oversized_parts)
        out.reach_violations += len(chk.reach)
        out.witness_checked += chk.witnessed
        out.witness_violations += len(chk.witness)
        for pair in filt.net_pairs:
            if sample.part_of[pair[0]] != sample.part_of[pair[1]]:
                out.cut_counts[pair] += 1
        if account:
            for cat, row in classify_and_account(filt, sample)["summary"].items():
                out.accounting[cat]["count"] += row["count"]
                out.accounting[cat]["violations"] += row["violations"]
        if not chk.ok and len(out.examples) < keep_examples:
            out.examples.append({"trial": t, "reach": chk.reach[:3], "witness": chk.witness[:3],
                                 "cut_tethers": chk.cut_tethers[:3], "unbalanced": chk.unbalanced[:3]})
    return out
