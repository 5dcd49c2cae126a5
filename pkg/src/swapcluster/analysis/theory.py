"""Theoretical swap sizes and part-size bounds, all in log10 space."""

from __future__ import annotations

import math

VARIANTS = ("euclidean", "doubling", "lq")


def _check(epsilon: float, dim: int) -> None:
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if dim < 1:
        raise ValueError("dimension must be >= 1")


def theory_rho(epsilon: float, dim: int, variant: str = "euclidean", q: float = 2.0) -> float:
    """``log10`` of the swap size that makes local search a ``(1+eps)``-approximation.

    ``euclidean``: ``32 (2d)^(8d) eps^(-36 d / eps)``.
    ``doubling``:  ``32 d^(16d) eps^(-256 d / eps)``.
    ``lq``:        ``d^d (2^q / eps)^(d 2^q / eps)``; only the shape of this one
    is known, so every hidden constant is taken as 1 (see :func:`has_stated_constants`).
    """
    _check(epsilon, dim)
    inv = math.log10(1.0 / epsilon)
    if variant == "euclidean":
        return math.log10(32) + 8 * dim * math.log10(2 * dim) + 36 * dim / epsilon * inv
    if variant == "doubling":
        return math.log10(32) + 16 * dim * math.log10(dim) + 256 * dim / epsilon * inv
    if variant == "lq":
        if q < 1:
            raise ValueError("q must be >= 1")
        base = 2.0**q / epsilon
        return dim * math.log10(dim) + dim * 2.0**q / epsilon * math.log10(base)
    raise ValueError(f"unknown variant {variant!r}")


def has_stated_constants(variant: str) -> bool:
    return variant in ("euclidean", "doubling")


def log10_cell_bound(epsilon: float, dim: int) -> float:
    """``log10`` of the pre-merge part size bound ``2 (2d)^(2d) eps^(-9d/eps)``."""
    _check(epsilon, dim)
    return math.log10(2) + 2 * dim * math.log10(2 * dim) + 9 * dim / epsilon * math.log10(1.0 / epsilon)


def log10_part_bound(epsilon: float, dim: int) -> float:
    """``log10`` of the merged part size bound ``2 Y^4`` with ``Y`` the cell bound."""
    return math.log10(2) + 4 * log10_cell_bound(epsilon, dim)
