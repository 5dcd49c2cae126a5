"""Instances, metrics, candidate policies and the ``clusterspec v1`` file format."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .objective import ObjectiveSpec

# Relative tolerance used whenever two costs are compared.
COST_RTOL = 1e-12


class InstanceError(ValueError):
    """An instance violates one of its structural invariants."""


class ParseError(InstanceError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Metric:
    """Either Euclidean over coordinates, or an explicit symmetric matrix."""

    kind: str
    dim: int | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "euclidean":
            if self.dim is None or self.dim < 1:
                raise InstanceError("euclidean metric needs dimension >= 1")
        elif self.kind == "matrix":
            m = np.asarray(self.matrix, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
                raise InstanceError("metric matrix must be square and nonempty")
            if not np.all(np.isfinite(m)):
                raise InstanceError("metric matrix has non-finite entries")
            if np.any(m < 0):
                raise InstanceError("metric has negative distances")
            if np.any(np.diag(m) != 0):
                raise InstanceError("metric diagonal not zero")
            if not np.array_equal(m, m.T):
                raise InstanceError("metric not symmetric")
            object.__setattr__(self, "matrix", _frozen(m, float))
        else:
            raise InstanceError(f"unknown metric kind {self.kind!r}")

    @classmethod
    def euclidean(cls, dim: int) -> "Metric":
        return cls("euclidean", dim=dim)

    @classmethod
    def explicit(cls, matrix) -> "Metric":
        return cls("matrix", matrix=matrix)

    @property
    def is_euclidean(self) -> bool:
        return self.kind == "euclidean"

    @property
    def size(self) -> int | None:
        return None if self.matrix is None else self.matrix.shape[0]

    def pairwise(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Distances between two location arrays (coordinates or matrix indices)."""
        if self.is_euclidean:
            diff = a[:, None, :] - b[None, :, :]
            return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return self.matrix[np.ix_(a, b)]


@dataclass(frozen=True, eq=False)
class PointSet:
    locs: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        locs = np.asarray(self.locs)
        if len(locs) == 0:
            raise InstanceError("point set is empty")
        w = np.ones(len(locs)) if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (len(locs),):
            raise InstanceError("one weight per point required")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InstanceError("weights must be finite and nonnegative")
        if locs.dtype.kind == "f" and locs.ndim == 2 and not np.all(np.isfinite(locs)):
            raise InstanceError("point coordinates must be finite")
        object.__setattr__(self, "locs", _frozen(locs, locs.dtype))
        object.__setattr__(self, "weights", _frozen(w, float))

    @classmethod
    def from_coords(cls, coords, weights=None) -> "PointSet":
        arr = np.asarray(coords, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(arr, weights)

    @classmethod
    def from_indices(cls, indices, weights=None) -> "PointSet":
        return cls(np.asarray(indices, dtype=np.int64), weights)

    def __len__(self) -> int:
        return len(self.locs)


@dataclass(frozen=True, eq=False)
class CandidateSet:
    locs: np.ndarray
    opening_costs: np.ndarray

    def __post_init__(self):
        locs = np.asarray(self.locs)
        if len(locs) == 0:
            raise InstanceError("candidate set is empty")
        f = np.zeros(len(locs)) if self.opening_costs is None else np.asarray(self.opening_costs, float)
        if f.shape != (len(locs),):
            raise InstanceError("one opening cost per candidate required")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise InstanceError("opening costs must be finite and nonnegative")
        object.__setattr__(self, "locs", _frozen(locs, locs.dtype))
        object.__setattr__(self, "opening_costs", _frozen(f, float))

    @classmethod
    def from_coords(cls, coords, opening_costs=None) -> "CandidateSet":
        arr = np.asarray(coords, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(arr, opening_costs)

    @classmethod
    def from_indices(cls, indices, opening_costs=None) -> "CandidateSet":
        return cls(np.asarray(indices, dtype=np.int64), opening_costs)

    def __len__(self) -> int:
        return len(self.locs)


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable clustering instance.

    Points are identified by ``("p", j)`` and candidates by ``("c", i)``;
    ids, not coordinates, are identity, so colocated entries are fine.
    """

    points: PointSet
    candidates: CandidateSet
    metric: Metric
    objective: ObjectiveSpec
    rng_seed: int = 0

    def __post_init__(self):
        for name, locs in (("point", self.points.locs), ("candidate", self.candidates.locs)):
            if self.metric.is_euclidean:
                if locs.ndim != 2 or locs.shape[1] != self.metric.dim:
                    raise InstanceError(f"{name} coordinates must have dimension {self.metric.dim}")
            else:
                if locs.ndim != 1 or locs.dtype.kind not in "iu":
                    raise InstanceError(f"{name} entries must be matrix indices")
                if np.any(locs < 0) or np.any(locs >= self.metric.size):
                    raise InstanceError(f"{name} index out of range")
        k = self.objective.k
        if self.objective.family != "ufl" and k > len(self.candidates):
            raise InstanceError(f"k={k} exceeds number of candidates {len(self.candidates)}")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return len(self.candidates)

    @property
    def weights(self) -> np.ndarray:
        return self.points.weights

    @property
    def opening_costs(self) -> np.ndarray:
        return self.candidates.opening_costs

    @cached_property
    def point_cand(self) -> np.ndarray:
        """``(n, m)`` point-to-candidate distances."""
        d = self.metric.pairwise(self.points.locs, self.candidates.locs)
        d.setflags(write=False)
        return d

    @cached_property
    def cand_cand(self) -> np.ndarray:
        d = self.metric.pairwise(self.candidates.locs, self.candidates.locs)
        d.setflags(write=False)
        return d

    @cached_property
    def point_cost(self) -> np.ndarray:
        """``(n, m)`` weighted per-point costs ``w_j * dist**q``."""
        c = self.weights[:, None] * powq(self.point_cand, self.objective.q)
        c.setflags(write=False)
        return c

    def _loc(self, ref):
        kind, idx = ref
        if kind == "p":
            locs = self.points.locs
        elif kind == "c":
            locs = self.candidates.locs
        else:
            raise InstanceError(f"invalid id {ref!r}")
        if not 0 <= idx < len(locs):
            raise InstanceError(f"invalid id {ref!r}")
        return locs[idx : idx + 1]

    def with_objective(self, objective: ObjectiveSpec) -> "Instance":
        return Instance(self.points, self.candidates, self.metric, objective, self.rng_seed)

    def with_seed(self, seed: int) -> "Instance":
        return Instance(self.points, self.candidates, self.metric, self.objective, seed)


def powq(x, q: float):
    """``x**q`` with exact fast paths for k-median and k-means."""
    if q == 1:
        return np.array(x, dtype=float, copy=True)
    if q == 2:
        x = np.asarray(x, dtype=float)
        return x * x
    return np.power(x, q)


def distance(instance: Instance, a, b) -> float:
    """Distance between two ids, each ``("p", j)`` or ``("c", i)``."""
    return float(instance.metric.pairwise(instance._loc(a), instance._loc(b))[0, 0])


def spot_check_triangle(instance: Instance, samples: int = 10_000, seed: int = 0) -> list[tuple]:
    """Return violating ``(a, b, c)`` triples among random locations; empty if none found."""
    refs = [("p", j) for j in range(instance.n)] + [("c", i) for i in range(instance.m)]
    locs_p, locs_c = instance.points.locs, instance.candidates.locs
    allocs = np.concatenate([locs_p, locs_c])
    full = instance.metric.pairwise(allocs, allocs)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(refs), size=(samples, 3))
    ab, bc, ac = full[idx[:, 0], idx[:, 1]], full[idx[:, 1], idx[:, 2]], full[idx[:, 0], idx[:, 2]]
    scale = max(float(full.max()), 1.0)
    bad = np.nonzero(ac > ab + bc + 1e-12 * scale)[0]
    return [tuple(refs[t] for t in idx[r]) for r in bad]


def make_candidates(points: PointSet, policy: str = "points", *, resolution: float | None = None,
                    supplied: CandidateSet | None = None, metric: Metric | None = None) -> CandidateSet:
    """Build a candidate set.

    ``policy`` is ``"points"`` (one candidate per distinct point location),
    ``"grid"`` (corners of the occupied cells of a grid laid over the bounding
    box; Euclidean only) or ``"user"`` (return ``supplied`` unchanged).
    """
    if points is None or len(points) == 0:
        raise InstanceError("point set is empty")
    locs = points.locs
    if policy == "user":
        if supplied is None:
            raise InstanceError("user policy needs a supplied candidate set")
        return supplied
    if policy == "points":
        if locs.ndim == 1:
            _, first = np.unique(locs, return_index=True)
        else:
            _, first = np.unique(locs, axis=0, return_index=True)
        return CandidateSet(locs[np.sort(first)].copy(), None)
    if policy == "grid":
        if (metric is not None and not metric.is_euclidean) or locs.ndim != 2 or locs.dtype.kind != "f":
            raise InstanceError("grid candidates need a Euclidean metric")
        if resolution is None or not resolution > 0:
            raise InstanceError("grid resolution must be positive")
        lo, hi = locs.min(axis=0), locs.max(axis=0)
        ncells = np.maximum(np.ceil((hi - lo) / resolution).astype(np.int64), 1)
        cells = np.minimum(np.floor((locs - lo) / resolution).astype(np.int64), ncells - 1)
        d = locs.shape[1]
        offsets = np.array(np.meshgrid(*([[0, 1]] * d), indexing="ij")).reshape(d, -1).T
        corners = set()
        for cell in {tuple(c) for c in cells}:
            for off in offsets:
                corners.add(tuple(np.asarray(cell) + off))
        ordered = sorted(corners)
        coords = lo + resolution * np.asarray(ordered, dtype=float)
        return CandidateSet(coords, None)
    raise InstanceError(f"unknown candidate policy {policy!r}")


# --------------------------------------------------------------------- file IO

def _fmt(x: float) -> str:
    return repr(float(x))


def _parse_float(tok: str, lineno: int) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(lineno, f"expected a number, got {tok!r}") from None
    if not math.isfinite(val):
        raise ParseError(lineno, f"non-finite number {tok!r}")
    return val


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, f"expected an integer, got {tok!r}") from None


def _kv(tokens: Iterable[str], lineno: int, allowed: Sequence[str]) -> tuple[list[str], dict[str, str]]:
    plain, opts = [], {}
    for tok in tokens:
        if "=" in tok:
            key, _, val = tok.partition("=")
            if key not in allowed:
                raise ParseError(lineno, f"unexpected option {key!r}")
            if key in opts:
                raise ParseError(lineno, f"duplicate option {key!r}")
            opts[key] = val
        else:
            if opts:
                raise ParseError(lineno, "options must follow positional values")
            plain.append(tok)
    return plain, opts


def _parse_objective(tokens: list[str], lineno: int) -> ObjectiveSpec:
    if not tokens:
        raise ParseError(lineno, "objective family missing")
    family, rest = tokens[0], tokens[1:]
    plain, opts = _kv(rest, lineno, ("q", "k"))
    if plain:
        raise ParseError(lineno, f"unexpected tokens {plain}")
    try:
        if family == "lq":
            if "q" not in opts or "k" not in opts:
                raise ParseError(lineno, "lq objective needs q= and k=")
            return ObjectiveSpec.lq(_parse_float(opts["q"], lineno), _parse_int(opts["k"], lineno))
        q = _parse_float(opts["q"], lineno) if "q" in opts else 1.0
        if family == "ufl":
            if "k" in opts:
                raise ParseError(lineno, "ufl objective takes no k")
            return ObjectiveSpec.ufl(q)
        if family == "gkm":
            if "k" not in opts:
                raise ParseError(lineno, "gkm objective needs k=")
            return ObjectiveSpec.gkm(_parse_int(opts["k"], lineno), q)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(lineno, str(exc)) from None
    raise ParseError(lineno, f"unknown objective family {family!r}")


def parse_instance(text: str, rng_seed: int = 0) -> Instance:
    lines = [(no, ln.strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError(1, "empty instance file")
    it = iter(lines)

    no, ln = next(it)
    if ln.split() != ["clusterspec", "v1"]:
        raise ParseError(no, "expected header 'clusterspec v1'")

    no, ln = next(it, (no + 1, ""))
    toks = ln.split()
    if len(toks) != 3 or toks[0] != "metric" or toks[1] not in ("euclidean", "matrix"):
        raise ParseError(no, "expected 'metric euclidean <d>' or 'metric matrix <m>'")
    mode, size = toks[1], _parse_int(toks[2], no)
    if size < 1:
        raise ParseError(no, "metric size must be >= 1")

    no, ln = next(it, (no + 1, ""))
    toks = ln.split()
    if not toks or toks[0] != "objective":
        raise ParseError(no, "expected objective line")
    objective = _parse_objective(toks[1:], no)

    pts, wts, cands, fcs, rows = [], [], [], [], []
    for no, ln in it:
        toks = ln.split()
        head, body = toks[0], toks[1:]
        if head in ("point", "candidate"):
            opt_key = "w" if head == "point" else "f"
            if mode == "euclidean":
                plain, opts = _kv(body, no, (opt_key,))
                if len(plain) != size:
                    raise ParseError(no, f"{head} needs {size} coordinates, got {len(plain)}")
                loc = [_parse_float(t, no) for t in plain]
            else:
                plain, opts = _kv(body, no, ("idx", opt_key))
                if plain or "idx" not in opts:
                    raise ParseError(no, f"{head} in matrix mode needs idx=<i>")
                loc = _parse_int(opts["idx"], no)
                if not 0 <= loc < size:
                    raise ParseError(no, f"idx {loc} out of range")
            extra = _parse_float(opts[opt_key], no) if opt_key in opts else None
            if head == "point":
                pts.append(loc)
                wts.append(1.0 if extra is None else extra)
            else:
                cands.append(loc)
                fcs.append(0.0 if extra is None else extra)
        elif head == "matrixrow":
            if mode != "matrix":
                raise ParseError(no, "matrixrow only allowed in matrix mode")
            if len(body) != size:
                raise ParseError(no, f"matrixrow needs {size} entries, got {len(body)}")
            rows.append([_parse_float(t, no) for t in body])
        else:
            raise ParseError(no, f"unknown directive {head!r}")

    if not pts:
        raise InstanceError("point set is empty")
    if mode == "euclidean":
        metric = Metric.euclidean(size)
        points = PointSet.from_coords(np.asarray(pts, float).reshape(len(pts), size), wts)
        if cands:
            candidates = CandidateSet.from_coords(np.asarray(cands, float).reshape(len(cands), size), fcs)
        else:
            candidates = make_candidates(points, "points")
    else:
        if len(rows) != size:
            raise InstanceError(f"expected {size} matrixrow lines, got {len(rows)}")
        metric = Metric.explicit(rows)
        points = PointSet.from_indices(pts, wts)
        candidates = CandidateSet.from_indices(cands if cands else sorted(set(pts)), fcs if cands else None)
    return Instance(points, candidates, metric, objective, rng_seed)


def load_instance(path, rng_seed: int = 0) -> Instance:
    text = Path(path).read_text(encoding="utf-8")
    return parse_instance(text, rng_seed)


def format_instance(instance: Instance) -> str:
    obj = instance.objective
    metric = instance.metric
    out = ["clusterspec v1"]
    if metric.is_euclidean:
        out.append(f"metric euclidean {metric.dim}")
    else:
        out.append(f"metric matrix {metric.size}")
    if obj.family == "lq":
        out.append(f"objective lq q={_fmt(obj.q)} k={obj.k}")
    elif obj.family == "ufl":
        out.append(f"objective ufl q={_fmt(obj.q)}")
    else:
        out.append(f"objective gkm k={obj.k} q={_fmt(obj.q)}")

    def loc_text(loc):
        if metric.is_euclidean:
            return " ".join(_fmt(x) for x in loc)
        return f"idx={int(loc)}"

    for loc, w in zip(instance.points.locs, instance.weights):
        extra = "" if w == 1.0 else f" w={_fmt(w)}"
        out.append(f"point {loc_text(loc)}{extra}")
    for loc, f in zip(instance.candidates.locs, instance.opening_costs):
        extra = "" if f == 0.0 else f" f={_fmt(f)}"
        out.append(f"candidate {loc_text(loc)}{extra}")
    if not metric.is_euclidean:
        for row in metric.matrix:
            out.append("matrixrow " + " ".join(_fmt(x) for x in row))
    return "\n".join(out) + "\n"


def save_instance(instance: Instance, path) -> None:
    Path(path).write_text(format_instance(instance), encoding="utf-8")


def instances_equal(a: Instance, b: Instance) -> bool:
    """Bit-exact comparison of everything the file format carries."""
    def same(x, y):
        return x.shape == y.shape and x.dtype.kind == y.dtype.kind and np.array_equal(x, y)

    return (
        a.metric.kind == b.metric.kind
        and a.metric.dim == b.metric.dim
        and (a.metric.matrix is None) == (b.metric.matrix is None)
        and (a.metric.matrix is None or same(a.metric.matrix, b.metric.matrix))
        and a.objective == b.objective
        and same(a.points.locs, b.points.locs)
        and same(a.weights, b.weights)
        and same(a.candidates.locs, b.candidates.locs)
        and same(a.opening_costs, b.opening_costs)
    )
