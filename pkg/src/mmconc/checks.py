"""Verification battery: each check evaluates one inequality and records its margin."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .barycenter import barycenter, riemannian_barycenter, variance_inequality_report
from .generators import gen_space, map_family, scalar_family
from .mmcore import FiniteMMSpace, mass_tol, pushforward
from .observables.diameters import ENUM_LIMIT, pd_1d, pd_enumerate
from .observables.fields import ScreenMap, lipschitz_excess
from .observables.levy import (
    SEP_EXACT_LIMIT,
    _bitmask_masses,
    _neighbor_masks,
    alpha_exact_many,
    levy_radii,
    sep_exact2,
)
from .observables.tree_mean import pre_levy_mean_tree, split_masses
from .observables.variation import central_radius, lp_from_distances
from .screens import EuclideanScreen, HyperbolicScreen, MetricTree

TOL = 1e-9
P_GRID = (0.5, 1.0, 2.0, np.inf)


@dataclass
class CheckRecord:
    check: str
    anchor: str  # the inequality being checked, lhs <= rhs
    lhs: float
    rhs: float
    margin: float
    passed: bool | None  # None: skipped
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("lhs", "rhs", "margin"):
            d[k] = None if d[k] is None else float(d[k])
        d["params"] = {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in self.params.items()}
        return d


@dataclass
class VerifySuiteResult:
    records: list
    tol: float = TOL

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if r.passed is False]

    def summary(self) -> dict:
        out: dict = {}
        for r in self.records:
            s = out.setdefault(r.check, {"n": 0, "failed": 0, "skipped": 0, "min_margin": np.inf})
            s["n"] += 1
            if r.passed is None:
                s["skipped"] += 1
                continue
            s["failed"] += int(not r.passed)
            s["min_margin"] = min(s["min_margin"], float(r.margin))
        for s in out.values():
            if not np.isfinite(s["min_margin"]):
                s["min_margin"] = None
        return out

    def to_dict(self) -> dict:
        return {"passed": self.passed, "tol": self.tol, "summary": self.summary(), "records": [r.to_dict() for r in self.records]}


def record(check, anchor, lhs, rhs, tol=TOL, **params) -> CheckRecord:
    margin = float(rhs) - float(lhs)
    return CheckRecord(check, anchor, float(lhs), float(rhs), margin, bool(margin >= -tol), params)


def skipped(check, anchor, reason) -> CheckRecord:
    return CheckRecord(check, anchor, np.nan, np.nan, np.nan, None, {"skipped": reason})


def _radii(space: FiniteMMSpace, limit: int | None = None) -> np.ndarray:
    s = space.support
    D = space.dist[np.ix_(s, s)]
    r = np.unique(D[np.triu_indices(len(s), 1)])
    r = r[r > 0]
    if limit is not None and len(r) > limit:
        r = r[np.linspace(0, len(r) - 1, limit).round().astype(int)]
    return r


def _support_space(space):
    return space.restrict_to_support()


def _exact_fields(space: FiniteMMSpace) -> np.ndarray:
    fams = scalar_family(space, "exact_small", audit=False)
    return np.vstack([f.values for f in fams])[:, space.support]


# ------------------------------------------------------ sandwich family

def check_sandwich(space: FiniteMMSpace, kappas=None, fields=None, tol=TOL):
    """LeRad <= ObsDiam(R) <= 2 LeRad over one family, for 0 < kappa < m/2."""
    sp = _support_space(space)
    m = sp.mass
    F = _exact_fields(sp) if fields is None else fields
    kappas = [m * c for c in (0.05, 0.15, 0.25, 0.35, 0.45)] if kappas is None else kappas
    out = []
    for k in kappas:
        lr = float(levy_radii(F, sp.weights, k).max())
        od = max(pd_1d(f, sp.weights, m - k) for f in F)
        out.append(record("levy_sandwich_lower", "LeRad <= ObsDiam", lr, od, tol, kappa=k))
        out.append(record("levy_sandwich_upper", "ObsDiam <= 2 LeRad", od, 2 * lr, tol, kappa=k))
    return out


def check_alpha_levy_radius(space, fields=None, tol=TOL, radii=None):
    """LeRad(X; -2 alpha(r)) <= r."""
    sp = _support_space(space)
    if sp.n > ENUM_LIMIT:
        return [skipped("alpha_levy_radius", "LeRad(-2 alpha(r)) <= r", "support too large")]
    F = _exact_fields(sp) if fields is None else fields
    radii = _radii(sp) if radii is None else radii
    alphas = alpha_exact_many(sp.dist, sp.weights, radii)
    out = []
    for r, a in zip(radii, alphas):
        lr = float(levy_radii(F, sp.weights, 2 * a).max())
        out.append(record("alpha_levy_radius", "LeRad(-2 alpha(r)) <= r", lr, r, tol, r=r, alpha=a))
    return out


def alpha_closed(D, w, radii):
    """alpha with closed neighborhoods: the right limit of alpha at each radius."""
    radii = np.atleast_1d(radii).astype(float)
    nudged = radii + 1e-12 * np.maximum(1.0, radii)
    return alpha_exact_many(D, w, nudged)


def check_alpha_at_twice_levy_radius(space, kappas=None, fields=None, tol=TOL, literal: bool = False):
    """alpha(2 LeRad(X; -kappa)) <= kappa with the half-mass distance family.

    The default evaluates alpha just to the right of 2 LeRad (closed
    neighborhoods): the infimum defining LeRad need not be attained, and at
    the infimum itself the open-neighborhood alpha can exceed kappa.
    """
    sp = _support_space(space)
    if sp.n > ENUM_LIMIT:
        return [skipped("alpha_at_twice_levy_radius", "alpha(2 LeRad(-k)) <= k", "support too large")]
    m = sp.mass
    F = _exact_fields(sp) if fields is None else fields
    kappas = [m * c for c in (0.05, 0.15, 0.25, 0.35, 0.45)] if kappas is None else kappas
    out = []
    for k in kappas:
        lr = float(levy_radii(F, sp.weights, k).max())
        if lr <= 0:
            a = 0.0
        elif literal:
            a = float(alpha_exact_many(sp.dist, sp.weights, [2 * lr])[0])
        else:
            a = float(alpha_closed(sp.dist, sp.weights, [2 * lr])[0])
        name = "alpha_at_twice_levy_radius" + ("_literal" if literal else "")
        out.append(record(name, "alpha(2 LeRad(-k)) <= k", a, k, tol, kappa=k, levy_radius=lr))
    return out


def check_sep_alpha(space, tol=TOL, radii=None):
    """Sep(X; m/2, alpha(r)) >= r whenever alpha(r) > 0."""
    if space.n > SEP_EXACT_LIMIT:
        return [skipped("sep_alpha", "r <= Sep(m/2, alpha(r))", "space too large")]
    sp = _support_space(space)
    radii = _radii(sp) if radii is None else radii
    alphas = alpha_exact_many(sp.dist, sp.weights, radii)
    out = []
    for r, a in zip(radii, alphas):
        if a <= mass_tol(sp.mass):
            continue
        sep = sep_exact2(space.dist, space.weights, 0.5 * space.mass, a)
        out.append(record("sep_alpha", "r <= Sep(m/2, alpha(r))", r, sep, tol, r=r, alpha=a))
    return out


def check_alpha_tail(space, tol=TOL, n_radii: int = 8):
    """mu(X minus A_{+(r0+r)}) <= alpha(r) for every A with mu(A) > alpha(r0)."""
    sp = _support_space(space)
    if sp.n > 16:
        return [skipped("alpha_tail", "mu(X - A_{+(r0+r)}) <= alpha(r)", "support too large")]
    D, w = sp.dist, sp.weights
    radii = _radii(sp, n_radii)
    radii = np.unique(np.concatenate([radii, 0.5 * radii]))
    alphas = alpha_exact_many(D, w, radii)
    masks = np.arange(1 << sp.n, dtype=np.int64)
    mass = _bitmask_masses(w)
    out = []
    for r0, a0 in zip(radii, alphas):
        big = masks[mass > a0 + mass_tol(sp.mass)]
        if len(big) == 0:
            continue
        for r, a in zip(radii, alphas):
            outside = np.zeros(len(big))
            for y, nb in enumerate(_neighbor_masks(D, r0 + r)):
                outside += w[y] * ((big & nb) == 0)
            out.append(record("alpha_tail", "mu(X - A_{+(r0+r)}) <= alpha(r)", outside.max(), a, tol, r0=r0, r=r))
    return out


def _image_space_sep(dist_y: np.ndarray, w: np.ndarray, k0, k1) -> float:
    """Sep of the push-forward measure, with coincident images merged."""
    n = len(w)
    owner = np.full(n, -1)
    reps = []
    for i in range(n):
        if owner[i] < 0:
            close = np.flatnonzero((dist_y[i] < 1e-12) & (owner < 0))
            owner[close] = len(reps)
            reps.append(i)
    wy = np.bincount(owner, weights=w, minlength=len(reps))
    return sep_exact2(dist_y[np.ix_(reps, reps)], wy, k0, k1)


def check_sep_pushforward(space, maps=None, tol=TOL, seed=0, count=12):
    """Sep of a 1-Lipschitz image <= Sep of the source."""
    if space.n > SEP_EXACT_LIMIT:
        return [skipped("sep_pushforward", "Sep(f_* mu) <= Sep(mu)", "space too large")]
    sp = _support_space(space)
    m = sp.mass
    if maps is None:
        maps = map_family(sp, EuclideanScreen(1), "geodesic_embedding", count // 2, seed)
        maps += map_family(sp, EuclideanScreen(2), "mixed", count - count // 2, seed + 1)
    out = []
    pairs = [(m / 2, m / 4), (m / 3, m / 3), (m / 4, m / 2), (0.1 * m, 0.1 * m)]
    src = {pq: sep_exact2(sp.dist, sp.weights, *pq) for pq in pairs}
    for F in maps:
        DY = F.image_distances()
        for pq in pairs:
            out.append(record("sep_pushforward", "Sep(f_* mu) <= Sep(mu)", _image_space_sep(DY, sp.weights, *pq), src[pq], tol, map=F.name, kappas=list(pq)))
    return out


# ----------------------------------------------------------- Lp suite

def _pd_exact(DY, w, need, coords_1d=None):
    if coords_1d is not None:
        return pd_1d(coords_1d, w, need)
    return pd_enumerate(DY, w, need)


def _map_data(space, F: ScreenMap):
    s = space.support
    DY = F.image_distances(s)
    c1 = None
    if F.screen.kind == "euclid" and F.screen.dim == 1:
        c1 = np.asarray(F.points)[s, 0]
    return DY, space.weights[s], c1


def check_lp(space, maps, tol=TOL, ps=P_GRID):
    """Partial diameter vs Lp-variation, and the power-mean comparison of V_p."""
    m = space.mass
    diam = space.diameter
    out = []
    for F in maps:
        DY, w, c1 = _map_data(space, F)
        V = {p: lp_from_distances(DY, w, p) for p in ps}
        for k in (0.1 * m, 0.25 * m, 0.45 * m):
            pd = _pd_exact(DY, w, m - k, c1)
            for p in ps:
                rhs = 2.0 * V[p] / (k * m) ** (0 if np.isinf(p) else 1.0 / p)
                out.append(record("pd_vs_lp_variation", "pd(m-k) <= 2 V_p / (k m)^(1/p)", pd, rhs, tol, map=F.name, kappa=k, p=p))
        if diam > 0:
            for p in [q for q in ps if np.isfinite(q)]:
                for c in (0.1, 0.5, 1.0):
                    k = c * m * diam**p  # keeps k / diam^p <= m
                    K = k / diam**p
                    pd = _pd_exact(DY, w, m - K, c1)
                    rhs = m**2 * pd**p + (2 * m - K) * k
                    out.append(record("lp_variation_tail", "V_p^p <= m^2 pd^p + (2m - k/diam^p) k", V[p] ** p, rhs, tol * max(1.0, rhs), map=F.name, kappa=k, p=p))
        for i, p in enumerate(ps):
            for q in ps[i + 1 :]:
                expo = 1.0 / p - (0.0 if np.isinf(q) else 1.0 / q)
                out.append(record("lp_power_mean", "V_p <= (m^2)^(1/p-1/q) V_q", V[p], (m**2) ** expo * V[q], tol, map=F.name, p=p, q=q))
    return out


# -------------------------------------------------- central radius suite

def check_central_radius(space, maps, tol=TOL, kappas=None):
    m = space.mass
    kappas = [m * c for c in (0.1, 0.25, 0.45)] if kappas is None else kappas
    out = []
    for F in maps:
        nu = pushforward(F, space)
        b = barycenter(nu).point
        DY, w, c1 = _map_data(space, F)
        V1 = lp_from_distances(DY, w, 1.0)
        V2 = lp_from_distances(DY, w, 2.0)
        V3 = lp_from_distances(DY, w, 3.0)
        for k in kappas:
            cr = central_radius(nu, k, center=b).value
            pd = _pd_exact(DY, w, m - k, c1)
            out.append(record("pd_vs_central_radius", "pd <= 2 CRad", pd, 2 * cr, tol, map=F.name, kappa=k))
            if F.screen.kind == "euclid":
                out.append(record("central_radius_vs_pd", "CRad <= pd + (k/m) diam X", cr, pd + k / m * space.diameter, tol, map=F.name, kappa=k))
            for p, V in ((1.0, V1), (2.0, V2), (3.0, V3)):
                out.append(record("central_radius_vs_lp", "CRad <= V_p / (m k)^(1/p)", cr, V / (m * k) ** (1 / p), tol, map=F.name, kappa=k, p=p))
            out.append(record("central_radius_vs_l2", "CRad <= V_2 / sqrt(2 m k)", cr, V2 / np.sqrt(2 * m * k), tol, map=F.name, kappa=k))
    return out


# ------------------------------------------------ hyperbolic log chart

def check_log_chart(space, maps, tol=TOL, ps=(1.0, 2.0, 3.0)):
    """V_p(f) <= 2 V_p(log_z f) and V_2(f) <= sqrt 2 V_2(log_z f) at the barycenter z."""
    out = []
    s = space.support
    w = space.weights[s]
    sp = _support_space(space)
    for F in maps:
        H: HyperbolicScreen = F.screen
        nu = pushforward(F, space)
        z = riemannian_barycenter(nu).point
        pts = np.asarray(F.points)[s]
        T = H.log(z, pts)
        DT = EuclideanScreen(H.dim).pairwise(T)
        DY = H.pairwise(pts)
        out.append(record("log_chart_lipschitz", "|log f(x) - log f(x')| <= d_X(x, x')", lipschitz_excess(sp, DT), 0.0, tol, map=F.name))
        for p in ps:
            out.append(record("log_chart_lp", "V_p(f) <= 2 V_p(log f)", lp_from_distances(DY, w, p), 2 * lp_from_distances(DT, w, p), tol, map=F.name, p=p))
        out.append(record("log_chart_l2", "V_2(f) <= sqrt 2 V_2(log f)", lp_from_distances(DY, w, 2.0), np.sqrt(2) * lp_from_distances(DT, w, 2.0), tol, map=F.name))
    return out


# ----------------------------------------------------- product maps

def check_product(space, k: int = 2, count: int = 10, seed: int = 0, tol=TOL):
    """pd of (f_1..f_k)/sqrt k at m - k kappa <= sqrt k max_i pd of its coordinates at m - kappa."""
    from .generators import make_rng, multi_distance_map

    sp = _support_space(space)
    if sp.n > ENUM_LIMIT:
        return [skipped("product_map", "pd(F, m-k kappa) <= sqrt k max pd(F_i, m-kappa)", "support too large")]
    rng = make_rng(seed)
    m = sp.mass
    out = []
    for j in range(count):
        G = multi_distance_map(sp, k, rng)
        DG = EuclideanScreen(k).pairwise(G)
        for kappa in (0.05 * m, 0.1 * m, 0.2 * m):
            if k * kappa >= m:
                continue
            lhs = pd_enumerate(DG, sp.weights, m - k * kappa)
            rhs = np.sqrt(k) * max(pd_1d(G[:, i], sp.weights, m - kappa) for i in range(k))
            out.append(record("product_map", "pd(F, m-k kappa) <= sqrt k max pd(F_i, m-kappa)", lhs, rhs, tol, k=k, kappa=kappa, map=j))
    return out


# --------------------------------------------------------- trees

def default_tree() -> MetricTree:
    edges = [(0, 1, 1.0), (1, 2, 0.7), (1, 3, 1.3), (0, 4, 0.5), (4, 5, 1.1), (4, 6, 0.4), (6, 7, 0.9)]
    return MetricTree(list(range(8)), edges)


def check_tree_maps(space, tree: MetricTree | None = None, count: int = 10, seed: int = 0, tol=TOL):
    """pd(f_* mu, m - k) <= 2 Sep(X; m/3, k/2) and the pre-Levy split masses."""
    if space.n > SEP_EXACT_LIMIT:
        return [skipped("tree_pd_vs_sep", "pd <= 2 Sep(m/3, k/2)", "space too large")]
    tree = default_tree() if tree is None else tree
    sp = _support_space(space)
    m = sp.mass
    maps = map_family(sp, tree, "mixed", count, seed)
    kappas = [m * c for c in (0.1, 0.3, 0.6)]
    sep = {k: sep_exact2(sp.dist, sp.weights, m / 3, k / 2) for k in kappas}
    out = []
    for F in maps:
        nu = pushforward(F, sp)
        DY = nu.pairwise()
        for k in kappas:
            pd = pd_enumerate(DY, nu.weights, m - k)
            out.append(record("tree_pd_vs_sep", "pd <= 2 Sep(m/3, k/2)", pd, 2 * sep[k], tol, map=F.name, kappa=k))
        out.extend(check_tree_split(nu, tol))
    return out


def check_tree_split(nu, tol=TOL):
    split = pre_levy_mean_tree(nu)
    m = nu.mass
    first, second = split_masses(nu, split)
    return [
        record("tree_split_first", "m/3 <= nu(T')", m / 3, first, tol),
        record("tree_split_second", "m/3 <= nu(T'')", m / 3, second, tol),
    ]


# ------------------------------------------------------ variance

def check_variance(nu, tol=TOL, ps=(1.0, 1.5, 2.0, 3.0)):
    lhs, rhs, _ = variance_inequality_report(nu, "nonpositive", 2.0, "sturm")
    out = [record("variance_cat0", "inf_x int d^2 <= (1/2m) int int d^2", lhs, rhs, tol)]
    for p in ps:
        lhs, rhs, _ = variance_inequality_report(nu, "nonpositive", p, "jensen")
        out.append(record("variance_jensen", "int d(b, .)^p <= (1/m) int int d^p", lhs, rhs, tol, p=p))
    return out


def check_variance_sphere(space, tol=TOL):
    lhs, rhs, _ = variance_inequality_report(space, "nonnegative")
    return [record("variance_nonneg", "(1/2m) int int d^2 <= inf_x int d^2", rhs, lhs, tol)]


# ------------------------------------------------------ battery

def verify_space(space: FiniteMMSpace, seed: int = 0, tol: float = TOL, count: int = 6) -> VerifySuiteResult:
    """Run every per-space check; checks needing exact modes are skipped on large spaces."""
    recs = []
    sp = _support_space(space)
    small = sp.n <= 12
    if small:
        F = _exact_fields(sp)
        recs += check_sandwich(sp, fields=F, tol=tol)
        recs += check_alpha_levy_radius(sp, fields=F, tol=tol)
        recs += check_alpha_at_twice_levy_radius(sp, fields=F, tol=tol)
        recs += check_sep_alpha(sp, tol=tol)
        recs += check_alpha_tail(sp, tol=tol)
        recs += check_sep_pushforward(sp, tol=tol, seed=seed, count=count)
        maps = []
        for j, scr in enumerate((EuclideanScreen(1), EuclideanScreen(2), HyperbolicScreen(2, -1.0), default_tree())):
            maps += map_family(sp, scr, "mixed", count, seed + 10 * j)
        recs += check_lp(sp, maps, tol)
        recs += check_central_radius(sp, maps, tol)
        recs += check_log_chart(sp, [F_ for F_ in maps if F_.screen.kind == "hyperbolic"], tol)
        recs += check_product(sp, 2, count, seed, tol)
        recs += check_tree_maps(sp, count=count, seed=seed, tol=tol)
        for F_ in maps:
            recs += check_variance(pushforward(F_, sp), tol)
    else:
        recs.append(skipped("exact_battery", "exact-mode checks", f"support of {sp.n} points exceeds 12"))
    if space.coords is not None and space.meta.get("kind") == "sphere_sample":
        recs += check_variance_sphere(space, tol)
    return VerifySuiteResult(recs, tol)


def verify_spaces(specs, seed: int = 0, tol: float = TOL, count: int = 6) -> VerifySuiteResult:
    recs = []
    for spec in specs:
        space = gen_space(spec) if isinstance(spec, str) else spec
        recs += verify_space(space, seed, tol, count).records
    return VerifySuiteResult(recs, tol)
