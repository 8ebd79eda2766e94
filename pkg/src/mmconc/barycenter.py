"""Barycenters, t-means and minimizer sets on screens; variance inequalities."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMeasure, NoConvergence, OutOfDisk, ScreenMismatch
from .mmcore import FiniteMMSpace, PushforwardMeasure
from .screens.tree import MetricTree, TreePoint

BARY_TOL = 1e-10
BARY_MAX_ITER = 10_000
FLAT_GAP = 1e-10
FLAT_SEP = 1e-6
# relative objective noise tolerated while polishing a t-mean
ROUNDING = 1e-14
MAX_ATOM_STARTS = 32
TOP_ATOM_STARTS = 16


@dataclass
class BarycenterResult:
    point: object
    residual: float
    iterations: int
    flat_region: bool = False
    value: float = 0.0  # sum of w * d(point, atom)^2


@dataclass
class TMeanResult:
    t: float
    point: object
    value: float
    spread: float = 0.0
    flat_region: bool = False
    candidates: list = field(default_factory=list)


@dataclass
class MinimizerSet:
    exponents: np.ndarray
    points: list
    diameter: float
    results: list = field(default_factory=list)


def _nonempty(nu: PushforwardMeasure):
    if len(nu) == 0 or not nu.mass > 0:
        raise EmptyMeasure("measure has no mass")


def objective(screen, atoms, w, x, t: float = 2.0) -> float:
    """sum_i w_i d(x, a_i)^t."""
    if screen.kind == "tree":
        d = np.array([screen.distance(x, a) for a in atoms])
    else:
        d = screen.distances_from(x, atoms)
    return float(np.sum(w * d**t))


# ------------------------------------------------------------ barycenters

def euclidean_barycenter(nu: PushforwardMeasure) -> BarycenterResult:
    _nonempty(nu)
    a = np.asarray(nu.atoms, dtype=float)
    x = nu.weights @ a / nu.mass
    return BarycenterResult(x, 0.0, 0, value=objective(nu.screen, a, nu.weights, x))


def riemannian_barycenter(nu: PushforwardMeasure, tol: float = BARY_TOL, max_iter: int = BARY_MAX_ITER) -> BarycenterResult:
    """Gradient descent x <- exp_x(tau * mean log_x(a)) from the Euclidean mean of the atoms.

    tau = 1 / mean(u coth u), u = d / scale, bounds the Hessian of the objective at x,
    so the step neither overshoots nor depends on comparing nearly equal objective values.
    """
    _nonempty(nu)
    H = nu.screen
    a = np.asarray(nu.atoms, dtype=float)
    w = nu.weights
    m = nu.mass
    if len(w) == 1:
        return BarycenterResult(a[0].copy(), 0.0, 0)
    x = w @ a / m
    res = np.inf
    for it in range(max_iter + 1):
        L = H.log(x, a)
        g = w @ L / m
        res = float(np.linalg.norm(g))
        if res <= tol:
            return BarycenterResult(x, res, it, value=objective(H, a, w, x))
        u = np.linalg.norm(L, axis=1) / H.scale
        with np.errstate(invalid="ignore", divide="ignore"):
            h = np.where(u > 1e-8, u / np.tanh(u), 1.0)
        tau = m / float(w @ h)
        while True:
            try:
                xn = H.exp(x, tau * g)
                break
            except OutOfDisk:
                tau *= 0.5
                if tau < 1e-12:
                    raise NoConvergence("barycenter step leaves the disk") from None
        x = xn
    raise NoConvergence(f"barycenter residual {res:.3g} after {max_iter} iterations")


def _tree_setup(nu: PushforwardMeasure):
    T: MetricTree = nu.screen
    sub, where, back = T.subdivide(list(nu.atoms))
    D = sub.vertex_distance_matrix()[:, where]  # vertex x atom
    return T, sub, np.array(where), back, D


def _tree_edges(sub: MetricTree, where, D):
    """(child u, parent p, length, atoms below u) for every edge of sub."""
    for u in range(len(sub.vertices)):
        p = int(sub.parent[u])
        if p < 0:
            continue
        below = np.array([sub.is_ancestor(u, int(a)) for a in where])
        yield u, p, float(sub.up_len[u]), below


def _tree_point(T: MetricTree, back, u: int, h: float) -> TreePoint:
    base = back[u]
    return T.canonical(base.v, base.h + h)


def tree_barycenter(nu: PushforwardMeasure) -> BarycenterResult:
    """Exact minimizer of sum w d(x, a)^2, solving the quadratic on every edge."""
    _nonempty(nu)
    T, sub, where, back, D = _tree_setup(nu)
    w = nu.weights
    W = w.sum()
    vals = (D**2) @ w
    best_u = int(np.argmin(vals))
    best = (float(vals[best_u]), best_u, 0.0)
    for u, p, L, below in _tree_edges(sub, where, D):
        # x at height h above u: d = D[u] + h below, D[p] + L - h elsewhere
        num = np.sum(w[~below] * (D[p, ~below] + L)) - np.sum(w[below] * D[u, below])
        h = min(max(num / W, 0.0), L)
        d = np.where(below, D[u] + h, D[p] + L - h)
        val = float(np.sum(w * d**2))
        if val < best[0]:
            best = (val, u, h)
    val, u, h = best
    return BarycenterResult(_tree_point(T, back, u, h), 0.0, 0, value=val)


def barycenter(nu: PushforwardMeasure) -> BarycenterResult:
    kind = nu.screen.kind
    if kind == "euclid":
        return euclidean_barycenter(nu)
    if kind == "hyperbolic":
        return riemannian_barycenter(nu)
    if kind == "tree":
        return tree_barycenter(nu)
    raise ScreenMismatch(f"no barycenter for screen kind {kind!r}")


# ---------------------------------------------------------------- t-means

def _tree_tmean(nu: PushforwardMeasure, t: float) -> TMeanResult:
    T, sub, where, back, D = _tree_setup(nu)
    w = nu.weights
    cands = [(float((D[u] ** t) @ w), u, 0.0) for u in range(len(sub.vertices))]
    if t > 1:
        # convex on each edge: golden-section search
        gr = (np.sqrt(5) - 1) / 2
        for u, p, L, below in _tree_edges(sub, where, D):
            def f(h):
                return float(np.sum(w * np.where(below, D[u] + h, D[p] + L - h) ** t))

            lo, hi = 0.0, L
            c, d = hi - gr * (hi - lo), lo + gr * (hi - lo)
            fc, fd = f(c), f(d)
            while hi - lo > 1e-12 * max(1.0, L):
                if fc < fd:
                    hi, d, fd = d, c, fc
                    c = hi - gr * (hi - lo)
                    fc = f(c)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + gr * (hi - lo)
                    fd = f(d)
            h = 0.5 * (lo + hi)
            cands.append((f(h), u, h))
    # for t <= 1 the objective is concave along each edge, so vertices suffice
    best = min(c[0] for c in cands)
    near = [c for c in cands if c[0] - best < FLAT_GAP]
    near.sort()
    pts = [_tree_point(T, back, u, h) for _, u, h in near]
    spread = max((T.distance(p, q) for p in pts for q in pts), default=0.0)
    flat = t <= 1 and spread > FLAT_SEP
    if not flat:
        pts = pts[:1]
        spread = 0.0
    return TMeanResult(t, pts[0], best, spread, flat, pts)


def _weiszfeld_step(screen, atoms, w, x, t: float):
    """Tangent step toward the weighted Weiszfeld point, or None when x should stay put."""
    L = screen.log(x, atoms)
    d = np.linalg.norm(L, axis=1)
    away = d > 1e-12
    if t <= 1 and not away.all():
        # sitting on an atom: for t < 1 it is a local minimum; for t = 1
        # leave only if the pull of the other atoms beats the atom's weight
        if t < 1:
            return None
        pull = (w[away] / d[away]) @ L[away]
        if np.linalg.norm(pull) <= w[~away].sum():
            return None
    coef = np.zeros_like(d)
    coef[away] = w[away] * t * d[away] ** (t - 2)
    denom = coef.sum()
    if denom <= 0:
        return None
    return coef @ L / denom


def _descend(screen, atoms, w, x, t: float, max_iter: int = 500, history: list | None = None):
    """Weiszfeld-type descent with backtracking; only strict decreases are accepted.

    For t > 1 a final polish keeps taking full steps while they contract and the
    objective stays within rounding of its best value, which pins the minimizer
    well below the square root of machine precision.
    """
    val = objective(screen, atoms, w, x, t)
    if history is not None:
        history.append(val)
    for _ in range(max_iter):
        step = _weiszfeld_step(screen, atoms, w, x, t)
        if step is None:
            break
        eta = 1.0
        moved = False
        while eta > 1e-12:
            try:
                xn = screen.exp(x, eta * step)
                vn = objective(screen, atoms, w, xn, t)
            except OutOfDisk:
                vn = np.inf
            if vn < val:
                moved = True
                break
            eta *= 0.5
        if not moved:
            break
        gain = val - vn
        x, val = xn, vn
        if history is not None:
            history.append(val)
        if gain <= 1e-15 * max(1.0, abs(val)) or eta * np.linalg.norm(step) < 1e-13:
            break
    if t > 1:
        prev = np.inf
        for _ in range(100):
            step = _weiszfeld_step(screen, atoms, w, x, t)
            n = np.inf if step is None else float(np.linalg.norm(step))
            if not n < 0.9 * prev or n < 1e-15:
                break
            try:
                xn = screen.exp(x, step)
            except OutOfDisk:
                break
            vn = objective(screen, atoms, w, xn, t)
            if vn > val + ROUNDING * max(1.0, abs(val)):
                break
            x, val, prev = xn, min(val, vn), n
    return x, val


def t_mean_minimizer(nu: PushforwardMeasure, t: float, seed: int = 0, n_perturb: int = 8, history: list | None = None) -> TMeanResult:
    """Minimize x -> sum w d(x, a)^t by multi-start descent (exact scan on trees)."""
    _nonempty(nu)
    if not 0 < t <= 2:
        raise ValueError("t must lie in (0, 2]")
    screen = nu.screen
    if screen.kind == "tree":
        return _tree_tmean(nu, t)
    atoms = np.asarray(nu.atoms, dtype=float)
    w = nu.weights
    if len(w) == 1:
        return TMeanResult(t, atoms[0].copy(), 0.0, 0.0, False, [atoms[0].copy()])
    starts = list(atoms)
    if len(atoms) > MAX_ATOM_STARTS:
        vals = np.array([objective(screen, atoms, w, a, t) for a in atoms])
        starts = list(atoms[np.argsort(vals, kind="stable")[:TOP_ATOM_STARTS]])
    b = barycenter(nu).point
    starts.append(b)
    rng = np.random.Generator(np.random.PCG64(seed))
    radius = float(np.max(screen.distances_from(b, atoms)))
    for _ in range(n_perturb):
        v = rng.standard_normal(len(b))
        v *= rng.uniform(0.0, 0.25) * radius / max(np.linalg.norm(v), 1e-300)
        try:
            starts.append(screen.exp(b, v))
        except OutOfDisk:
            pass
    runs = [_descend(screen, atoms, w, x0, t, history=history if i == 0 else None) for i, x0 in enumerate(starts)]
    best = min(v for _, v in runs)
    near = sorted((v, tuple(x)) for x, v in runs if v - best < FLAT_GAP)
    pts = [np.array(x) for _, x in near]
    D = screen.pairwise(np.array(pts)) if len(pts) > 1 else np.zeros((1, 1))
    spread = float(D.max())
    flat = t <= 1 and spread > FLAT_SEP
    if not flat:
        pts, spread = pts[:1], 0.0
    return TMeanResult(t, pts[0], best, spread, flat, pts)


def minimizer_set(nu: PushforwardMeasure, s: float, t: float, grid_size: int = 33, seed: int = 0, n_perturb: int = 8) -> MinimizerSet:
    """t-means over an exponent grid in [s, t] and the diameter of the collected points."""
    if not 0 < s <= t:
        raise ValueError("need 0 < s <= t")
    exps = np.linspace(s, t, grid_size) if grid_size > 1 else np.array([t])
    results = [t_mean_minimizer(nu, float(r), seed=seed, n_perturb=n_perturb) for r in exps]
    pts = [p for r in results for p in r.candidates]
    screen = nu.screen
    if screen.kind == "tree":
        diam = max((screen.distance(p, q) for p in pts for q in pts), default=0.0)
    else:
        diam = float(screen.pairwise(np.array(pts)).max()) if len(pts) > 1 else 0.0
    return MinimizerSet(exps, [r.point for r in results], float(diam), results)


# --------------------------------------------------- variance inequalities

def _pair_sum(D: np.ndarray, w: np.ndarray, p: float) -> float:
    return float(w @ (D**p) @ w)


def sphere_inf_objective(space: FiniteMMSpace, p: float = 2.0) -> float:
    """inf over sample points and pairwise great-circle midpoints of sum w d(x, .)^p."""
    X = np.asarray(space.coords, dtype=float)
    s = space.support
    w = space.weights[s]
    R = float(np.mean(np.linalg.norm(X, axis=1)))
    best = float(np.min((space.dist[:, s] ** p) @ w))
    Y = X[s]
    i, j = np.triu_indices(len(s), 1)
    mids = Y[i] + Y[j]
    norms = np.linalg.norm(mids, axis=1)
    anti = norms < 1e-9 * R
    if anti.any():
        # antipodal pair: any equator point is a midpoint; take one orthogonal to a
        for k in np.flatnonzero(anti):
            a = Y[i[k]]
            e = np.zeros_like(a)
            e[np.argmin(np.abs(a))] = 1.0
            e -= (e @ a) / (a @ a) * a
            mids[k] = e
    mids = R * mids / np.linalg.norm(mids, axis=1, keepdims=True)
    for chunk in np.array_split(np.arange(len(mids)), max(1, len(mids) // 4096)):
        c = np.clip(mids[chunk] @ Y.T / R**2, -1.0, 1.0)
        best = min(best, float(np.min(((R * np.arccos(c)) ** p) @ w)))
    return best


def variance_inequality_report(nu, curvature_sign: str = "nonpositive", p: float = 2.0, form: str | None = None):
    """(lhs, rhs, margin) for a variance inequality.

    nonpositive: lhs = sum w d(b, .)^p at the barycenter b. The "sturm" form
    (p = 2) uses rhs = (1/2m) double sum of d^2, the "jensen" form uses
    rhs = (1/m) double sum of d^p; margin = rhs - lhs.
    nonnegative: nu is a FiniteMMSpace of sphere samples with coords; lhs is the
    inner approximation of inf_x sum w d(x, .)^2, rhs the (1/2m) double sum and
    margin = lhs - rhs.
    """
    if curvature_sign == "nonnegative":
        space: FiniteMMSpace = nu
        s = space.support
        w = space.weights[s]
        rhs = _pair_sum(space.dist[np.ix_(s, s)], w, 2.0) / (2.0 * space.mass)
        lhs = sphere_inf_objective(space, 2.0)
        return lhs, rhs, lhs - rhs
    if curvature_sign != "nonpositive":
        raise ValueError("curvature_sign must be 'nonpositive' or 'nonnegative'")
    form = form or ("sturm" if p == 2 else "jensen")
    if form == "sturm" and p != 2:
        raise ValueError("the sturm form needs p = 2")
    b = barycenter(nu).point
    w = nu.weights
    atoms = nu.atoms if nu.screen.kind == "tree" else np.asarray(nu.atoms)
    lhs = objective(nu.screen, atoms, w, b, p)
    scale = 2.0 * nu.mass if form == "sturm" else nu.mass
    rhs = _pair_sum(nu.pairwise(), w, p) / scale
    return lhs, rhs, rhs - lhs
