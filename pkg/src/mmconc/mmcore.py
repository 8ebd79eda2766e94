"""Finite metric measure spaces: validation, subsets, neighborhoods, push-forwards."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    BadSpace,
    EmptySubset,
    NegativeWeight,
    TriangleViolation,
)

TRIANGLE_TOL = 1e-9
MERGE_TOL = 1e-12
# relative slack used whenever a mass is compared against a threshold
MASS_RTOL = 1e-12

# full O(n^3) triangle check up to this size, random triples beyond
FULL_TRIANGLE_CHECK = 300
SPOT_TRIPLES = 200_000


def mass_tol(m: float) -> float:
    return MASS_RTOL * max(1.0, abs(m))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FiniteMMSpace:
    labels: tuple
    dist: np.ndarray
    weights: np.ndarray
    coords: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    @property
    def diameter(self) -> float:
        s = self.support
        if len(s) < 2:
            return 0.0
        return float(self.dist[np.ix_(s, s)].max())

    def restrict_to_support(self) -> "FiniteMMSpace":
        s = self.support
        if len(s) == self.n:
            return self
        coords = None if self.coords is None else self.coords[s]
        return FiniteMMSpace(
            tuple(self.labels[i] for i in s),
            _frozen(self.dist[np.ix_(s, s)]),
            _frozen(self.weights[s]),
            None if coords is None else _frozen(coords),
            dict(self.meta),
        )

    def summary(self) -> dict:
        return {
            "n": self.n,
            "mass": self.mass,
            "diameter": self.diameter,
            "support_size": int(len(self.support)),
        }

    def __repr__(self) -> str:
        return f"FiniteMMSpace(n={self.n}, mass={self.mass:.6g}, diam={self.diameter:.6g})"


def check_triangle(dist: np.ndarray, tol: float = TRIANGLE_TOL, rng=None) -> None:
    """Raise TriangleViolation on the worst violating triple found."""
    n = len(dist)
    if n < 3:
        return
    if n <= FULL_TRIANGLE_CHECK:
        worst = (0.0, None)
        for j in range(n):
            via = dist[:, j, None] + dist[None, j, :]
            slack = dist - via
            k = int(np.argmax(slack))
            if slack.flat[k] > worst[0]:
                worst = (float(slack.flat[k]), (k // n, j, k % n))
        if worst[0] > tol:
            i, j, k = worst[1]
            raise TriangleViolation(i, j, k, worst[0])
        return
    rng = np.random.default_rng(0) if rng is None else rng
    i, j, k = rng.integers(0, n, size=(3, SPOT_TRIPLES))
    slack = dist[i, k] - dist[i, j] - dist[j, k]
    t = int(np.argmax(slack))
    if slack[t] > tol:
        raise TriangleViolation(int(i[t]), int(j[t]), int(k[t]), float(slack[t]))


def build_space(
    labels: Sequence | None,
    dist_matrix,
    weights=None,
    coords=None,
    meta: dict | None = None,
    check: bool = True,
) -> FiniteMMSpace:
    d = np.asarray(dist_matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise BadSpace(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if n == 0:
        raise BadSpace("space has no points")
    w = np.full(n, 1.0 / n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise BadSpace(f"expected {n} weights, got shape {w.shape}")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(w))):
        raise BadSpace("non-finite entries")
    if np.any(w < 0):
        i = int(np.argmin(w))
        raise NegativeWeight(f"weight of point {i} is {w[i]}")
    if not np.any(w > 0):
        raise BadSpace("at least one weight must be positive")
    if check:
        if np.any(d < 0):
            raise BadSpace("negative distance")
        if np.max(np.abs(np.diag(d)), initial=0.0) > TRIANGLE_TOL:
            raise BadSpace("nonzero diagonal")
        asym = np.abs(d - d.T)
        if asym.max() > TRIANGLE_TOL:
            i, j = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise AsymmetricMatrix(f"d[{i}][{j}] != d[{j}][{i}]")
        check_triangle(d)
    labels = tuple(range(n)) if labels is None else tuple(labels)
    if len(labels) != n:
        raise BadSpace(f"expected {n} labels, got {len(labels)}")
    c = None
    if coords is not None:
        c = _frozen(coords)
        if c.shape[0] != n:
            raise BadSpace("coords do not match point count")
    return FiniteMMSpace(labels, _frozen(d), _frozen(w), c, dict(meta or {}))


@dataclass(frozen=True, eq=False)
class SubsetMask:
    space: FiniteMMSpace
    members: np.ndarray

    @classmethod
    def of(cls, space: FiniteMMSpace, indices) -> "SubsetMask":
        m = np.zeros(space.n, dtype=bool)
        m[list(indices)] = True
        m.setflags(write=False)
        return cls(space, m)

    @property
    def mass(self) -> float:
        return float(self.space.weights[self.members].sum())

    @property
    def indices(self) -> list[int]:
        return np.flatnonzero(self.members).tolist()

    def __len__(self) -> int:
        return int(self.members.sum())

    def __le__(self, other: "SubsetMask") -> bool:
        return bool(np.all(~self.members | other.members))


def set_distance(space: FiniteMMSpace, members: np.ndarray) -> np.ndarray:
    """d(y, A) for every point y."""
    return space.dist[:, members].min(axis=1)


def neighborhood(space: FiniteMMSpace, A: SubsetMask, r: float, closed: bool = True) -> SubsetMask:
    if not A.members.any():
        raise EmptySubset("neighborhood of the empty set")
    d = set_distance(space, A.members)
    inside = d <= r if closed else d < r
    inside.setflags(write=False)
    return SubsetMask(space, inside)


@dataclass(frozen=True, eq=False)
class PushforwardMeasure:
    screen: Any
    atoms: Any  # ndarray (k, dim) for vector screens, list of TreePoint for trees
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self) -> int:
        return len(self.weights)

    def pairwise(self) -> np.ndarray:
        return self.screen.pairwise(self.atoms)

    def as_space(self, check: bool = True) -> FiniteMMSpace:
        return build_space(None, self.pairwise(), self.weights, check=check)


def merge_atoms(screen, points, weights, tol: float = MERGE_TOL):
    """Collapse points closer than tol; returns (atoms, weights, owner index per input)."""
    weights = np.asarray(weights, dtype=float)
    n = len(weights)
    if n == 0:
        return screen.take(points, []), weights, np.zeros(0, dtype=int)
    D = screen.pairwise(points)
    owner = np.full(n, -1)
    reps = []
    for i in range(n):
        if owner[i] >= 0:
            continue
        close = np.flatnonzero((D[i] < tol) & (owner < 0))
        owner[close] = len(reps)
        reps.append(i)
    w = np.bincount(owner, weights=weights, minlength=len(reps))
    return screen.take(points, reps), w, owner


def pushforward(fmap, space: FiniteMMSpace) -> PushforwardMeasure:
    """f_*(mu): image atoms of the support points with coincident images merged."""
    s = space.support
    pts = fmap.screen.take(fmap.points, s)
    atoms, w, _ = merge_atoms(fmap.screen, pts, space.weights[s])
    w.setflags(write=False)
    return PushforwardMeasure(fmap.screen, atoms, w)
