from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ScreenMismatch


@dataclass(frozen=True)
class EuclideanScreen:
    dim: int
    kind = "euclid"

    @property
    def spec(self) -> str:
        return f"euclid:{self.dim}"

    def as_points(self, pts) -> np.ndarray:
        a = np.asarray(pts, dtype=float)
        if a.ndim == 1 and self.dim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[1] != self.dim:
            raise ScreenMismatch(f"{self.spec} expects points of dimension {self.dim}, got {a.shape}")
        return a

    def take(self, pts, idx) -> np.ndarray:
        return np.asarray(pts)[list(idx) if not isinstance(idx, np.ndarray) else idx]

    def distance(self, a, b) -> float:
        return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))

    def distances_from(self, a, pts) -> np.ndarray:
        return np.linalg.norm(np.asarray(pts) - np.asarray(a), axis=-1)

    def pairwise(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float)
        if p.shape[1] == 1:
            return np.abs(p[:, 0, None] - p[None, :, 0])
        diff = p[:, None, :] - p[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def exp(self, base, v):
        return np.asarray(base) + np.asarray(v)

    def log(self, base, y):
        return np.asarray(y) - np.asarray(base)

    def geodesic(self, a, b, t):
        a = np.asarray(a, float)
        return a + t * (np.asarray(b, float) - a)
