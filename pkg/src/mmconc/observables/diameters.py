"""Partial diameter of a finitely supported measure and observable diameter."""
from __future__ import annotations

import numpy as np

from ..errors import ModeUnavailable
from ..mmcore import FiniteMMSpace, PushforwardMeasure, mass_tol, pushforward
from .fields import Report, ScreenMap, audit_map

ENUM_LIMIT = 20
PD_MODES = ("auto", "exact_1d", "enumerate", "ball_estimate", "ball_lower")
# captured-set diameters are only evaluated for this many smallest balls
BALL_CANDIDATES = 8


def pd_1d(x, w, need: float) -> float:
    """Shortest window of sorted reals carrying mass >= need."""
    if need <= 0:
        return 0.0
    x = np.asarray(x, dtype=float).ravel()
    order = np.argsort(x, kind="stable")
    x, w = x[order], np.asarray(w, dtype=float)[order]
    c = np.concatenate([[0.0], np.cumsum(w)])
    need = need - mass_tol(c[-1])
    if c[-1] < need:
        return np.inf
    if need <= 0:
        return 0.0
    # for each left end i, smallest right end j >= i with c[j+1] - c[i] >= need
    j = np.maximum(np.searchsorted(c, c[:-1] + need, side="left") - 1, np.arange(len(x)))
    i = np.flatnonzero(j < len(x))
    return float(np.min(x[j[i]] - x[i]))


def _max_clique_weight(adj: list[int], w: np.ndarray, goal: float) -> bool:
    """Is there a clique with weight >= goal in the graph given by bitmask rows?"""
    n = len(w)
    order = np.argsort(-w)
    rank_w = w[order]
    # remap bits so that heavy vertices come first
    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    radj = [0] * n
    for i in range(n):
        m = 0
        a = adj[order[i]]
        for j in range(n):
            if a >> order[j] & 1:
                m |= 1 << j
        radj[i] = m

    def mass(mask: int) -> float:
        s = 0.0
        while mask:
            low = mask & -mask
            s += rank_w[low.bit_length() - 1]
            mask ^= low
        return s

    def grow(cur: float, cand: int) -> bool:
        if cur >= goal:
            return True
        if cur + mass(cand) < goal:
            return False
        while cand:
            low = cand & -cand
            i = low.bit_length() - 1
            cand ^= low
            if grow(cur + rank_w[i], cand & radj[i]):
                return True
            if cur + mass(cand) < goal:
                return False
        return False

    return grow(0.0, (1 << n) - 1)


def pd_enumerate(D: np.ndarray, w, need: float) -> float:
    """Exact minimum diameter of an atom subset with mass >= need (<= 20 atoms)."""
    if need <= 0:
        return 0.0
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n > ENUM_LIMIT:
        raise ModeUnavailable(f"enumerate mode handles at most {ENUM_LIMIT} atoms, got {n}")
    goal = need - mass_tol(w.sum())
    if w.sum() < goal:
        return np.inf
    if w.max() >= goal:
        return 0.0
    levels = np.unique(D[np.triu_indices(n, 1)])
    lo, hi = 0, len(levels) - 1

    def feasible(t: float) -> bool:
        adj = []
        for i in range(n):
            row = np.flatnonzero(D[i] <= t)
            adj.append(sum(1 << int(j) for j in row if j != i))
        return _max_clique_weight(adj, w, goal)

    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def _ball_radii(D: np.ndarray, w: np.ndarray, need: float):
    order = np.argsort(D, axis=1, kind="stable")
    ds = np.take_along_axis(D, order, axis=1)
    cw = np.cumsum(w[order], axis=1)
    k = np.argmax(cw >= need - mass_tol(w.sum()), axis=1)
    return ds[np.arange(len(w)), k], order, k


def pd_ball(D: np.ndarray, w, need: float, lower: bool = False) -> float:
    """Ball bounds on the partial diameter.

    Upper: the best ball around an atom capturing the mass, measured by the
    smaller of 2r and the diameter of what it captures. Lower: any optimal
    subset lies in the ball of radius diam around each of its atoms.
    """
    if need <= 0:
        return 0.0
    w = np.asarray(w, dtype=float)
    if w.sum() < need - mass_tol(w.sum()):
        return np.inf
    r, order, k = _ball_radii(D, w, need)
    if lower:
        return float(r.min())
    best = 2.0 * r
    for c in np.argsort(r, kind="stable")[:BALL_CANDIDATES]:
        members = order[c, : k[c] + 1]
        best[c] = min(best[c], D[np.ix_(members, members)].max())
    return float(best.min())


def _resolve_mode(nu: PushforwardMeasure, mode: str) -> str:
    if mode != "auto":
        return mode
    if nu.screen.kind == "euclid" and nu.screen.dim == 1:
        return "exact_1d"
    if len(nu) <= 12:
        return "enumerate"
    return "ball_estimate"


def pd_value(D: np.ndarray, w, need: float, mode: str, coords=None) -> float:
    if mode == "exact_1d":
        if coords is None:
            raise ModeUnavailable("exact_1d needs real-line atoms")
        return pd_1d(coords, w, need)
    if mode == "enumerate":
        return pd_enumerate(D, w, need)
    if mode == "ball_estimate":
        return pd_ball(D, w, need)
    if mode == "ball_lower":
        return pd_ball(D, w, need, lower=True)
    raise ModeUnavailable(f"unknown partial diameter mode {mode!r}")


_REPORT_MODE = {
    "exact_1d": "exact",
    "enumerate": "exact",
    "ball_estimate": "upper_estimate",
    "ball_lower": "lower_estimate",
}


def partial_diameter(nu: PushforwardMeasure, kappa: float, mode: str = "auto") -> Report:
    """diam(nu, m - kappa): smallest diameter of a set of mass >= m - kappa."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    mode = _resolve_mode(nu, mode)
    need = nu.mass - kappa
    params = {"kappa": kappa, "threshold": need, "pd_mode": mode}
    if need <= mass_tol(nu.mass):
        return Report("partial_diameter", 0.0, "exact", params)
    if mode == "exact_1d":
        if not (nu.screen.kind == "euclid" and nu.screen.dim == 1):
            raise ModeUnavailable("exact_1d needs a one-dimensional Euclidean screen")
        val = pd_1d(np.asarray(nu.atoms)[:, 0], nu.weights, need)
    else:
        val = pd_value(nu.pairwise(), nu.weights, need, mode)
    return Report("partial_diameter", val, _REPORT_MODE[mode], params)


def map_partial_diameter(space: FiniteMMSpace, F: ScreenMap, kappa: float, mode: str = "auto") -> float:
    return partial_diameter(pushforward(F, space), kappa, mode).value


def obs_diameter(space: FiniteMMSpace, screen, kappa: float, family, pd_mode: str = "auto", audit: bool = True) -> Report:
    """Largest partial diameter over a family of 1-Lipschitz maps."""
    best = 0.0
    used = set()
    for F in family:
        if audit:
            audit_map(space, F, screen=screen)
        r = partial_diameter(pushforward(F, space), kappa, pd_mode)
        used.add(r.params["pd_mode"])
        best = max(best, r.value)
    params = {"kappa": kappa, "screen": screen.spec, "pd_mode": sorted(used), "family_size": len(family)}
    mode = "lower_estimate"
    if used and used <= {"ball_estimate"}:
        # sup over a family of upper bounds is neither bound in general
        params["note"] = "per-map values are upper bounds"
    return Report("obs_diameter", best, mode, params)
