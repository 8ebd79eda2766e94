"""Pre-Levy mean of a measure on a metric tree: a point splitting it into thirds."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMeasure
from ..mmcore import PushforwardMeasure, mass_tol
from ..screens.tree import MetricTree, TreePoint


@dataclass
class TreeSplit:
    point: TreePoint
    mass_first: float   # nu(T'), T' the union of the chosen branches with p
    mass_second: float  # nu(T''), the other branches with p
    first_branches: list  # one point in each chosen branch, adjacent to p
    second_branches: list


def _branches(sub: MetricTree, v: int, w_at: np.ndarray, sub_mass: np.ndarray):
    """(neighbor, open mass) for every branch at vertex v of the rooted tree."""
    out = []
    total = w_at.sum()
    for c in sub.children[v]:
        out.append((c, float(sub_mass[c])))
    if sub.parent[v] >= 0:
        out.append((int(sub.parent[v]), float(total - sub_mass[v])))
    return out


def pre_levy_mean_tree(nu: PushforwardMeasure) -> TreeSplit:
    """Find p and T = T' u T'' with T' n T'' = {p} and both masses >= m/3."""
    if len(nu) == 0 or not nu.mass > 0:
        raise EmptyMeasure("measure has no mass")
    T: MetricTree = nu.screen
    sub, where, back = T.subdivide(list(nu.atoms))
    V = len(sub.vertices)
    w_at = np.zeros(V)
    np.add.at(w_at, where, nu.weights)
    m = float(w_at.sum())
    tol = mass_tol(m)
    sub_mass = w_at.copy()
    for v in reversed(sub.order):
        if sub.parent[v] >= 0:
            sub_mass[sub.parent[v]] += sub_mass[v]

    # walk towards the unique branch (if any) carrying open mass > 2m/3
    v, prev = 0, -1
    while True:
        heavy = [(b, mb) for b, mb in _branches(sub, v, w_at, sub_mass) if mb > 2 * m / 3 + tol]
        if not heavy or heavy[0][0] == prev:
            break
        prev, v = v, heavy[0][0]

    branches = sorted(_branches(sub, v, w_at, sub_mass), key=lambda bm: (-bm[1], bm[0]))
    wp = float(w_at[v])
    first, got = [], 0.0
    if wp < m / 3 - tol:
        for b, mb in branches:
            if wp + got >= m / 3 - tol:
                break
            first.append(b)
            got += mb
    chosen = set(first)
    second = [b for b, _ in branches if b not in chosen]
    mass_first = wp + got
    mass_second = m - got

    def anchor(b):
        # a point strictly inside the edge from v toward b
        if sub.parent[b] == v:
            return _sub_to_tree(T, back, b, 0.5 * sub.up_len[b])
        return _sub_to_tree(T, back, v, 0.5 * sub.up_len[v])

    return TreeSplit(
        _sub_to_tree(T, back, v, 0.0),
        float(mass_first),
        float(mass_second),
        [anchor(b) for b in first],
        [anchor(b) for b in second],
    )


def _sub_to_tree(T: MetricTree, back, u: int, h: float) -> TreePoint:
    base = back[u]
    return T.canonical(base.v, base.h + h)


def split_masses(nu: PushforwardMeasure, split: TreeSplit) -> tuple[float, float]:
    """Recompute nu(T') and nu(T'') from the branch anchors, independently of the walk."""
    T: MetricTree = nu.screen
    p = split.point
    first = second = 0.0
    for a, w in zip(nu.atoms, nu.weights):
        dap = T.distance(a, p)
        if dap <= 1e-12:
            first += w
            second += w
            continue

        def inside(anchor):
            return T.distance(a, anchor) < dap + T.distance(anchor, p) - 1e-12

        if any(inside(b) for b in split.first_branches):
            first += w
        elif any(inside(b) for b in split.second_branches):
            second += w
    return first, second
