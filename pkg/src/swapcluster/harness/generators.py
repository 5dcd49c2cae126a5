"""Seeded synthetic instance families."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..core import CandidateSet, Instance, InstanceError, Metric, PointSet
from ..objective import ObjectiveSpec

KINDS = ("uniform-cube", "gaussian-mixture", "line", "lloyd-adversarial")
_LINE_OFFSETS = (0.0, 1.0, 5.0)


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a synthetic instance; identical specs give identical instances.

    ``family`` selects the objective; for ``ufl`` and ``gkm`` every candidate
    gets an opening cost drawn uniformly from ``[0, opening_scale]``.
    """

    kind: str
    n: int = 10
    d: int = 2
    centers: int = 3
    sigma: float = 1.0
    seed: int = 0
    family: str = "lq"
    k: int | None = 2
    q: float = 2.0
    opening_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InstanceError(f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.n < 1:
            raise InstanceError("n must be >= 1")
        if self.d < 1:
            raise InstanceError("d must be >= 1")
        if self.kind == "gaussian-mixture":
            if not self.sigma > 0:
                raise InstanceError("sigma must be > 0")
            if self.centers < 1:
                raise InstanceError("centers must be >= 1")
        if self.kind == "lloyd-adversarial" and self.n < 6:
            raise InstanceError("lloyd-adversarial needs n >= 6")
        if self.opening_scale < 0:
            raise InstanceError("opening_scale must be >= 0")

    def objective(self) -> ObjectiveSpec:
        if self.family == "ufl":
            return ObjectiveSpec.ufl(self.q)
        if self.family == "gkm":
            return ObjectiveSpec.gkm(self.k, self.q)
        return ObjectiveSpec.lq(self.q, self.k)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InstanceError(f"unknown generator fields: {', '.join(sorted(unknown))}")
        return cls(**data)


def _coords(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.kind == "uniform-cube":
        return rng.uniform(0.0, 1.0, size=(spec.n, spec.d))
    if spec.kind == "gaussian-mixture":
        means = rng.uniform(0.0, 1.0, size=(spec.centers, spec.d))
        label = rng.integers(spec.centers, size=spec.n)
        return means[label] + rng.normal(0.0, spec.sigma, size=(spec.n, spec.d))
    if spec.kind == "line":
        x = np.array([10.0 * (i // 3) + _LINE_OFFSETS[i % 3] for i in range(spec.n)])
        out = np.zeros((spec.n, spec.d))
        out[:, 0] = x
        return out
    # Two bridge points on the midline, the rest in four groups at the corners
    # of a wide, flat rectangle. Lloyd seeded with one top and one bottom point
    # on the same side settles on the horizontal split, whose centroids snap
    # onto the bridges; that costs about 100x the vertical split. Always planar.
    bridges = np.array([[5.0, 0.0], [5.0, 1.0]])
    corners = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    group = np.arange(spec.n - 2) % 4
    jitter = rng.uniform(-0.01, 0.01, size=(spec.n - 2, 2))
    return np.concatenate([bridges, corners[group] + jitter])


def generate(spec: GeneratorSpec) -> Instance:
    """Build the instance described by ``spec``; candidates are the points themselves."""
    rng = np.random.default_rng(spec.seed)
    coords = _coords(spec, rng)
    objective = spec.objective()
    if objective.family != "ufl" and objective.k > spec.n:
        raise InstanceError(f"k={objective.k} exceeds n={spec.n}")
    costs = None
    if objective.pays_opening:
        costs = rng.uniform(0.0, spec.opening_scale, size=spec.n)
    return Instance(
        PointSet.from_coords(coords),
        CandidateSet.from_coords(coords.copy(), costs),
        Metric.euclidean(coords.shape[1]),
        objective,
        rng_seed=spec.seed,
    )
