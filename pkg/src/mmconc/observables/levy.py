"""Levy mean and radius, concentration function, separation distance."""
from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import connected_components

from ..errors import ModeUnavailable
from ..mmcore import FiniteMMSpace, mass_tol
from .fields import Report, audit_field, stack_fields

ALPHA_EXACT_LIMIT = 20
SEP_EXACT_LIMIT = 13


# ---------------------------------------------------------------- Levy mean

def levy_means(F: np.ndarray, w: np.ndarray):
    """Rows of F are fields on the atoms with weights w (all positive).

    Returns arrays (a, b, mid): a is the smallest value with lower mass >= m/2,
    b the largest with upper mass >= m/2.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    w = np.asarray(w, dtype=float)
    m = w.sum()
    half = 0.5 * m - mass_tol(m)
    order = np.argsort(F, axis=1, kind="stable")
    fs = np.take_along_axis(F, order, axis=1)
    ws = w[order]
    cum = np.cumsum(ws, axis=1)
    tail = m - cum + ws
    rows = np.arange(len(F))
    a = fs[rows, np.argmax(cum >= half, axis=1)]
    last = F.shape[1] - 1 - np.argmax((tail >= half)[:, ::-1], axis=1)
    b = fs[rows, last]
    return a, b, 0.5 * (a + b)


def levy_mean(values, space_or_weights):
    """(a_f, b_f, m_f) for a real function on a space (or on weighted atoms)."""
    if isinstance(space_or_weights, FiniteMMSpace):
        s = space_or_weights.support
        v = np.asarray(values, dtype=float)[s]
        w = space_or_weights.weights[s]
    else:
        w = np.asarray(space_or_weights, dtype=float)
        keep = w > 0
        v, w = np.asarray(values, dtype=float)[keep], w[keep]
    a, b, mid = levy_means(v[None, :], w)
    return float(a[0]), float(b[0]), float(mid[0])


def levy_radii(F: np.ndarray, w: np.ndarray, kappa: float) -> np.ndarray:
    """inf{rho > 0 : mass(|f - m_f| >= rho) <= kappa} for every row f of F.

    With deviations sorted decreasingly u_(1) >= u_(2) >= ... and cumulative
    masses c_k, the answer is u_(k0+1) where k0 is the largest k with c_k <= kappa.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[1] == 0:
        return np.zeros(len(F))
    w = np.asarray(w, dtype=float)
    _, _, mid = levy_means(F, w)
    dev = np.abs(F - mid[:, None])
    order = np.argsort(-dev, axis=1, kind="stable")
    ds = np.take_along_axis(dev, order, axis=1)
    cum = np.cumsum(w[order], axis=1)
    k0 = np.sum(cum <= kappa + mass_tol(w.sum()), axis=1)
    n = F.shape[1]
    out = np.where(k0 < n, ds[np.arange(len(F)), np.minimum(k0, n - 1)], 0.0)
    return np.maximum(out, 0.0)


def levy_radius(space: FiniteMMSpace, kappa: float, family, audit: bool = True, family_name: str | None = None) -> Report:
    """Largest Levy radius over a family of 1-Lipschitz fields."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if audit:
        for f in family:
            audit_field(space, f)
    params = {"kappa": kappa, "family_size": len(family)}
    s = space.support
    if kappa >= space.mass - mass_tol(space.mass) or len(s) < 2 or not family:
        return Report("levy_radius", 0.0, "lower_estimate", params, family_name)
    F = stack_fields(family)[:, s]
    vals = levy_radii(F, space.weights[s], kappa)
    params["argmax"] = int(np.argmax(vals))
    return Report("levy_radius", float(vals.max()), "lower_estimate", params, family_name)


# ---------------------------------------------------- concentration function

def _bitmask_masses(w: np.ndarray) -> np.ndarray:
    n = len(w)
    masks = np.arange(1 << n, dtype=np.int64)
    mass = np.zeros(1 << n)
    for i in range(n):
        mass += w[i] * ((masks >> i) & 1)
    return mass


def _neighbor_masks(D: np.ndarray, r: float) -> list[int]:
    """Bitmask of the open ball of radius r around each point."""
    return [int(sum(1 << int(j) for j in np.flatnonzero(D[y] < r))) for y in range(len(D))]


def alpha_exact_many(D: np.ndarray, w: np.ndarray, radii, return_sets: bool = False):
    """Exact alpha(r) for several r by enumerating every subset of the atoms."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n > ALPHA_EXACT_LIMIT:
        raise ModeUnavailable(f"exact alpha handles at most {ALPHA_EXACT_LIMIT} support points, got {n}")
    m = w.sum()
    masks = np.arange(1 << n, dtype=np.int64)
    ok = _bitmask_masses(w) >= 0.5 * m - mass_tol(m)
    cand = masks[ok]
    vals, sets = [], []
    for r in np.atleast_1d(radii):
        if r <= 0:
            # A_{+0} is empty, so the best A leaves everything outside
            vals.append(float(m))
            sets.append(cand[0] if len(cand) else 0)
            continue
        outside = np.zeros(len(cand))
        for y, nb in enumerate(_neighbor_masks(D, r)):
            outside += w[y] * ((cand & nb) == 0)
        k = int(np.argmax(outside))
        vals.append(float(outside[k]))
        sets.append(int(cand[k]))
    vals = np.array(vals)
    if return_sets:
        return vals, sets
    return vals


def alpha_objective(D: np.ndarray, w: np.ndarray, members: np.ndarray, r: float) -> float:
    """mass of X minus the open r-neighborhood of the member set."""
    if not members.any():
        return float(w.sum())
    d = D[:, members].min(axis=1)
    return float(w[d >= r].sum())


def _halfmass_sublevels(D: np.ndarray, w: np.ndarray, fields: np.ndarray):
    """Minimal sublevel sets of each field row that carry half the mass."""
    m = w.sum()
    half = 0.5 * m - mass_tol(m)
    order = np.argsort(fields, axis=1, kind="stable")
    cum = np.cumsum(w[order], axis=1)
    k = np.argmax(cum >= half, axis=1)
    fs = np.take_along_axis(fields, order, axis=1)
    cut = fs[np.arange(len(fields)), k]
    return fields <= cut[:, None]


def alpha_estimate(D: np.ndarray, w: np.ndarray, r: float, extra_fields=None, rng=None, n_random: int = 64) -> float:
    """Lower bound for alpha(r) from candidate half-mass sets."""
    w = np.asarray(w, dtype=float)
    fields = [D, -D]
    if extra_fields is not None and len(extra_fields):
        f = np.asarray(extra_fields, dtype=float)
        fields += [f, -f]
    cands = _halfmass_sublevels(D, w, np.vstack(fields))
    best = max(alpha_objective(D, w, c, r) for c in cands)
    rng = np.random.default_rng(0) if rng is None else rng
    m = w.sum()
    n = len(w)
    if n > 200:
        n_random = 0  # each greedy run is quadratic per step
    for _ in range(n_random):
        # grow a set from a random seed point, adding the point that keeps the
        # neighborhood smallest
        members = np.zeros(n, dtype=bool)
        members[rng.integers(n)] = True
        near = D[:, members].min(axis=1) < r
        while w[members].sum() < 0.5 * m - mass_tol(m):
            cover = (D < r) & ~near[None, :]
            cost = cover.astype(float) @ w
            cost[members] = np.inf
            cost += rng.uniform(0, 1e-12, n)
            j = int(np.argmin(cost))
            members[j] = True
            near |= D[j] < r
        best = max(best, alpha_objective(D, w, members, r))
    return float(best)


def concentration_function(space: FiniteMMSpace, r: float, mode: str = "auto", extra_fields=None, seed: int = 0) -> Report:
    """alpha_X(r) = sup over mu(A) >= m/2 of mu(X minus the open r-neighborhood of A)."""
    if not r > 0:
        raise ValueError("r must be positive")
    sp = space.restrict_to_support()
    if mode == "auto":
        mode = "exact" if sp.n <= 16 else "estimate"
    params = {"r": r}
    if mode == "exact":
        val = alpha_exact_many(sp.dist, sp.weights, [r])[0]
        return Report("alpha", val, "exact", params)
    if mode != "estimate":
        raise ModeUnavailable(f"unknown alpha mode {mode!r}")
    ef = None if extra_fields is None else np.asarray(extra_fields)[:, space.support]
    val = alpha_estimate(sp.dist, sp.weights, r, ef, np.random.default_rng(seed))
    return Report("alpha", val, "lower_estimate", params, seed=seed)


# ------------------------------------------------------ separation distance

def _set_distance_table(D: np.ndarray) -> np.ndarray:
    """row mask -> d(y, set) for every subset bitmask (row 0 is +inf)."""
    n = len(D)
    out = np.full((1 << n, n), np.inf)
    for i in range(n):
        lo = 1 << i
        out[lo : 2 * lo] = np.minimum(out[:lo], D[i])
    return out


def sep_exact2(D: np.ndarray, w: np.ndarray, k0: float, k1: float) -> float:
    """Exact Sep(X; k0, k1) by enumerating the first set."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    if n > SEP_EXACT_LIMIT:
        raise ModeUnavailable(f"exact Sep handles at most {SEP_EXACT_LIMIT} points, got {n}")
    m = w.sum()
    tol = mass_tol(m)
    if max(k0, k1) > m + tol:
        return 0.0
    ok = _bitmask_masses(w) >= k0 - tol
    ok[0] = False
    dist = _set_distance_table(D)[ok]
    order = np.argsort(-dist, axis=1, kind="stable")
    ds = np.take_along_axis(dist, order, axis=1)
    cum = np.cumsum(w[order], axis=1)
    reach = cum >= k1 - tol
    k = np.argmax(reach, axis=1)
    feasible = reach[np.arange(len(k)), k]
    if not feasible.any():
        return 0.0
    return float(ds[np.arange(len(k)), k][feasible].max())


def _component_assign(D: np.ndarray, w: np.ndarray, kappas, t: float) -> bool:
    """Can whole components of the graph {d < t} be dealt out to meet every threshold?"""
    m = w.sum()
    ncomp, lab = connected_components(D < t, directed=False)
    if ncomp < len(kappas):
        return False
    cm = np.bincount(lab, weights=w, minlength=ncomp)
    deficit = np.array(kappas, dtype=float)
    got = np.zeros(len(kappas), dtype=bool)
    for c in np.argsort(-cm, kind="stable"):
        # prefer labels still empty, then the one missing the most
        key = np.where(got, deficit, deficit + 2 * m + 1)
        i = int(np.argmax(key))
        if got[i] and deficit[i] <= 0:
            break
        deficit[i] -= cm[c]
        got[i] = True
    return bool(got.all() and np.all(deficit <= mass_tol(m)))


def sep_estimate(D: np.ndarray, w: np.ndarray, kappas) -> float:
    """Lower bound: largest candidate distance with a component assignment."""
    w = np.asarray(w, dtype=float)
    n = len(w)
    levels = np.unique(D[np.triu_indices(n, 1)])[::-1]
    levels = levels[levels > 0]
    if len(levels) <= 2000:
        for t in levels:
            if _component_assign(D, w, kappas, t):
                return float(t)
        return 0.0
    lo, hi = 0, len(levels)  # search for the first feasible level
    if not _component_assign(D, w, kappas, levels[-1]):
        return 0.0
    hi = len(levels) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _component_assign(D, w, kappas, levels[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def separation(space: FiniteMMSpace, kappas, mode: str = "auto") -> Report:
    """Sep(X; k_0, ..., k_N) over nonempty subsets with mu(X_i) >= k_i."""
    kappas = [float(k) for k in kappas]
    if len(kappas) < 2 or min(kappas) < 0:
        raise ValueError("separation needs at least two nonnegative thresholds")
    params = {"kappas": kappas}
    m = space.mass
    if max(kappas) > m + mass_tol(m):
        return Report("separation", 0.0, "exact", params)
    if mode == "auto":
        mode = "exact" if len(kappas) == 2 and space.n <= SEP_EXACT_LIMIT else "estimate"
    if mode == "exact":
        if len(kappas) != 2:
            raise ModeUnavailable("exact separation handles two thresholds")
        val = sep_exact2(space.dist, space.weights, *kappas)
        return Report("separation", val, "exact", params)
    if mode != "estimate":
        raise ModeUnavailable(f"unknown separation mode {mode!r}")
    val = sep_estimate(space.dist, space.weights, kappas)
    return Report("separation", val, "lower_estimate", params)
