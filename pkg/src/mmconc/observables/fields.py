"""Scalar fields, screen maps, Lipschitz audits and the Report record."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import FamilyNotLipschitz, ScreenMismatch
from ..mmcore import FiniteMMSpace

LIP_TOL = 1e-9
MODES = ("exact", "lower_estimate", "upper_estimate")


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    lipschitz: float = 1.0
    name: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ScreenMap:
    screen: Any
    points: Any
    lipschitz: float = 1.0
    name: str = ""

    def __len__(self) -> int:
        return len(self.points)

    def image_distances(self, idx=None) -> np.ndarray:
        pts = self.points if idx is None else self.screen.take(self.points, idx)
        return self.screen.pairwise(pts)

    @classmethod
    def from_field(cls, f: ScalarField, name: str | None = None) -> "ScreenMap":
        from ..screens import EuclideanScreen

        return cls(EuclideanScreen(1), f.values[:, None].copy(), f.lipschitz, name or f.name)


def lipschitz_excess(space: FiniteMMSpace, image_dist: np.ndarray, L: float = 1.0) -> float:
    """max over support pairs of d_Y - L d_X (<= 0 for an L-Lipschitz map)."""
    s = space.support
    if len(s) < 2:
        return 0.0
    if image_dist.shape[0] == space.n and len(s) < space.n:
        image_dist = image_dist[np.ix_(s, s)]
    return float(np.max(image_dist - L * space.dist[np.ix_(s, s)]))


def field_excess(space: FiniteMMSpace, values, L: float = 1.0) -> float:
    v = np.asarray(values, dtype=float)[space.support]
    return lipschitz_excess(space.restrict_to_support(), np.abs(v[:, None] - v[None, :]), L)


def audit_field(space: FiniteMMSpace, f: ScalarField, tol: float = LIP_TOL) -> None:
    if len(f) != space.n:
        raise FamilyNotLipschitz(f"field {f.name!r} has {len(f)} values for {space.n} points")
    ex = field_excess(space, f.values, f.lipschitz)
    if ex > tol:
        raise FamilyNotLipschitz(f"field {f.name!r} breaks its Lipschitz constant by {ex:.3g}")


def audit_map(space: FiniteMMSpace, F: ScreenMap, tol: float = LIP_TOL, screen=None) -> None:
    if screen is not None and F.screen != screen:
        raise ScreenMismatch(f"map targets {F.screen.spec}, expected {screen.spec}")
    if len(F) != space.n:
        raise FamilyNotLipschitz(f"map {F.name!r} has {len(F)} images for {space.n} points")
    s = space.support
    ex = lipschitz_excess(space.restrict_to_support(), F.image_distances(s), F.lipschitz)
    if ex > tol:
        raise FamilyNotLipschitz(f"map {F.name!r} breaks its Lipschitz constant by {ex:.3g}")


def stack_fields(fields) -> np.ndarray:
    return np.vstack([f.values for f in fields]) if fields else np.zeros((0, 0))


def _plain(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    return x


@dataclass
class Report:
    name: str
    value: float
    mode: str
    params: dict = field(default_factory=dict)
    family: str | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown report mode {self.mode!r}")
        self.value = float(self.value)

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["name"], d["value"], d["mode"], d.get("params", {}), d.get("family"), d.get("seed"))
