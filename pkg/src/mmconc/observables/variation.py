"""Lp-variation and central radius of maps, with their observable versions."""
from __future__ import annotations

import numpy as np

from ..mmcore import FiniteMMSpace, PushforwardMeasure, mass_tol, pushforward
from .fields import Report, ScreenMap, audit_map


def lp_from_distances(D: np.ndarray, w: np.ndarray, p: float) -> float:
    """(sum_ij w_i w_j D_ij^p)^(1/p); p = inf gives the max over pairs of positive mass."""
    w = np.asarray(w, dtype=float)
    if np.isinf(p):
        pos = w > 0
        sub = D[np.ix_(pos, pos)]
        return float(sub.max()) if sub.size else 0.0
    if not p > 0:
        raise ValueError("p must be positive")
    return float((w @ (D**p) @ w) ** (1.0 / p))


def lp_variation(F: ScreenMap, space: FiniteMMSpace, p: float) -> float:
    s = space.support
    return lp_from_distances(F.image_distances(s), space.weights[s], p)


def obs_lp_variation(space: FiniteMMSpace, screen, p: float, family, audit: bool = True) -> Report:
    best = 0.0
    for F in family:
        if audit:
            audit_map(space, F, screen=screen)
        best = max(best, lp_variation(F, space, p))
    return Report("obs_lp_variation", best, "lower_estimate", {"p": p, "screen": screen.spec, "family_size": len(family)})


def radius_capturing(dist: np.ndarray, w: np.ndarray, need: float) -> float:
    """Smallest rho with mass{dist <= rho} >= need (0 when need <= 0)."""
    if need <= 0:
        return 0.0
    order = np.argsort(dist, kind="stable")
    cum = np.cumsum(w[order])
    k = int(np.argmax(cum >= need - mass_tol(w.sum())))
    return float(dist[order][k])


def central_radius(nu: PushforwardMeasure, kappa: float, center=None) -> Report:
    """CRad(nu, m - kappa): closed ball around the barycenter capturing m - kappa."""
    from ..barycenter import barycenter

    need = nu.mass - kappa
    params = {"kappa": kappa}
    if need <= mass_tol(nu.mass):
        return Report("central_radius", 0.0, "exact", params)
    b = barycenter(nu).point if center is None else center
    if nu.screen.kind == "tree":
        d = np.array([nu.screen.distance(b, a) for a in nu.atoms])
    else:
        d = nu.screen.distances_from(b, nu.atoms)
    return Report("central_radius", radius_capturing(d, nu.weights, need), "exact", params)


def obs_central_radius(space: FiniteMMSpace, screen, kappa: float, family, audit: bool = True) -> Report:
    best = 0.0
    for F in family:
        if audit:
            audit_map(space, F, screen=screen)
        best = max(best, central_radius(pushforward(F, space), kappa).value)
    return Report("obs_central_radius", best, "lower_estimate", {"kappa": kappa, "screen": screen.spec, "family_size": len(family)})
