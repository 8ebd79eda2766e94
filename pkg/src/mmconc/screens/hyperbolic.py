"""Constant curvature hyperbolic space on the open unit ball.

Distances are those of the Poincare ball scaled by 1/sqrt(-curvature). Tangent
vectors are expressed in an orthonormal frame, so their Euclidean norm is the
length of the geodesic they generate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import OutOfDisk, ScreenMismatch

BOUNDARY_TOL = 1e-13


def _check_inside(x: np.ndarray) -> None:
    r = np.linalg.norm(x, axis=-1)
    if np.any(r >= 1.0 - BOUNDARY_TOL) or not np.all(np.isfinite(r)):
        raise OutOfDisk(f"point norm {np.max(r):.17g} not inside the open unit ball")


def mobius_add(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """x (+) y for a single x of shape (d,) and y of shape (d,) or (k, d)."""
    y = np.asarray(y, dtype=float)
    Y = np.atleast_2d(y)
    xy = Y @ x
    x2 = x @ x
    y2 = np.sum(Y * Y, axis=1)
    num = (1.0 + 2.0 * xy + y2)[:, None] * x + (1.0 - x2) * Y
    out = num / (1.0 + 2.0 * xy + x2 * y2)[:, None]
    return out[0] if y.ndim == 1 else out


def poincare_distance(x, y) -> np.ndarray:
    """Unit-curvature distance 2 asinh(|x-y| / sqrt((1-|x|^2)(1-|y|^2))), broadcasting."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    diff = np.linalg.norm(x - y, axis=-1)
    cx = 1.0 - np.sum(x * x, axis=-1)
    cy = 1.0 - np.sum(y * y, axis=-1)
    return 2.0 * np.arcsinh(diff / np.sqrt(cx * cy))


def phi_distortion(x) -> np.ndarray:
    """x / (1 - |x|): the radial stretch of the disk onto R^n."""
    x = np.asarray(x, dtype=float)
    _check_inside(x)
    r = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / (1.0 - r)


@dataclass(frozen=True)
class HyperbolicScreen:
    dim: int
    curvature: float = -1.0
    kind = "hyperbolic"

    def __post_init__(self):
        if not self.curvature < 0:
            raise ValueError("hyperbolic curvature must be negative")

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(-self.curvature)

    @property
    def spec(self) -> str:
        return f"hyperbolic:{self.dim}:{self.curvature:g}"

    def as_points(self, pts) -> np.ndarray:
        a = np.asarray(pts, dtype=float)
        if a.ndim == 1:
            a = a[None, :] if self.dim > 1 else a[:, None]
        if a.shape[-1] != self.dim:
            raise ScreenMismatch(f"{self.spec} expects {self.dim}-vectors, got {a.shape}")
        _check_inside(a)
        return a

    def take(self, pts, idx) -> np.ndarray:
        return np.asarray(pts)[list(idx) if not isinstance(idx, np.ndarray) else idx]

    def distance(self, x, y) -> float:
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        _check_inside(x)
        _check_inside(y)
        return float(self.scale * poincare_distance(x, y))

    def distances_from(self, x, pts) -> np.ndarray:
        return self.scale * poincare_distance(np.asarray(x, float)[None, :], np.asarray(pts, float))

    def pairwise(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float)
        D = self.scale * poincare_distance(p[:, None, :], p[None, :, :])
        np.fill_diagonal(D, 0.0)
        return D

    def log(self, base, y) -> np.ndarray:
        """exp_base^{-1}(y) in orthonormal coordinates; y may be a batch."""
        base = np.asarray(base, float)
        y = np.asarray(y, float)
        _check_inside(base)
        _check_inside(y)
        w = mobius_add(-base, y)
        nw = np.linalg.norm(w, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(nw > 0, 2.0 * self.scale * np.arctanh(np.minimum(nw, 1.0 - 1e-16)) / nw, 2.0 * self.scale)
        return factor * w

    def exp(self, base, v) -> np.ndarray:
        base = np.asarray(base, float)
        v = np.asarray(v, float)
        _check_inside(base)
        nv = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(nv > 0, np.tanh(nv / (2.0 * self.scale)) / nv, 1.0 / (2.0 * self.scale))
        out = mobius_add(base, factor * v)
        _check_inside(out)
        return out

    def geodesic(self, a, b, t):
        return self.exp(a, t * self.log(a, b))
