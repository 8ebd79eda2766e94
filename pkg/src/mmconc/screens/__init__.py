"""Target geometries for 1-Lipschitz maps."""
from __future__ import annotations

from ..errors import BadSpec
from .euclidean import EuclideanScreen
from .hyperbolic import HyperbolicScreen, mobius_add, phi_distortion, poincare_distance
from .tree import MetricTree, TreePoint

__all__ = [
    "EuclideanScreen",
    "HyperbolicScreen",
    "MetricTree",
    "TreePoint",
    "mobius_add",
    "parse_screen",
    "phi_distortion",
    "poincare_distance",
    "screen_distance",
]


def screen_distance(screen, a, b) -> float:
    return float(screen.distance(a, b))


def parse_screen(spec: str):
    """'euclid:k', 'hyperbolic:n:kappa' or 'tree:<path to json>'."""
    kind, _, rest = spec.partition(":")
    try:
        if kind in ("euclid", "euclidean", "R"):
            return EuclideanScreen(int(rest or 1))
        if kind in ("hyperbolic", "hyp", "H"):
            n, _, kappa = rest.partition(":")
            return HyperbolicScreen(int(n or 2), float(kappa) if kappa else -1.0)
        if kind == "tree":
            if not rest:
                raise BadSpec("tree screen needs a file path: tree:<path>")
            return MetricTree.from_json(rest)
    except (ValueError, OSError) as exc:
        raise BadSpec(f"bad screen spec {spec!r}: {exc}") from None
    raise BadSpec(f"unknown screen kind {kind!r} in {spec!r}")
