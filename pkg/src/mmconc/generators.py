"""Seeded samplers for mm-spaces and for 1-Lipschitz function and map families.

All randomness goes through ``np.random.Generator(np.random.PCG64(seed))``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from math import lgamma, log, pi

import numpy as np
from scipy.sparse.csgraph import shortest_path
from scipy.spatial.distance import cdist

from .errors import BadSpec, ModeUnavailable, RepairFailed
from .mmcore import FiniteMMSpace, build_space, mass_tol
from .observables.fields import ScalarField, ScreenMap, audit_field, audit_map
from .screens import EuclideanScreen, HyperbolicScreen, MetricTree

SPACE_KINDS = ("two_point", "single_point", "circle_grid", "hamming_cube", "sphere_sample", "random_cloud")
SCALAR_STRATEGIES = ("distance_fields", "halfmass_distance_fields", "random_envelope", "exact_small")
MAP_STRATEGIES = ("multi_distance_embedding", "geodesic_embedding", "repaired_assignment", "exp_chart", "mixed")
ALIASES = {
    "two_point": "two_point",
    "single_point": "single_point",
    "point": "single_point",
    "circle": "circle_grid",
    "circle_grid": "circle_grid",
    "cube": "hamming_cube",
    "hamming_cube": "hamming_cube",
    "sphere": "sphere_sample",
    "sphere_sample": "sphere_sample",
    "cloud": "random_cloud",
    "random_cloud": "random_cloud",
}
HALFMASS_LIMIT = 20
REPAIR_SWEEPS = 1000
PAIR_REPAIR_LIMIT = 60  # pairwise sweeps only below this many points


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def default_seed(cli_seed=None) -> int:
    """--seed wins over MMC_SEED, which wins over 0."""
    if cli_seed is not None:
        return int(cli_seed)
    env = os.environ.get("MMC_SEED")
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise BadSpec(f"MMC_SEED must be an integer, got {env!r}") from None
    return 0


@dataclass
class SpaceSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __str__(self) -> str:
        items = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}:{items},seed={self.seed}" if items else f"{self.kind}:seed={self.seed}"


@dataclass
class FamilySpec:
    strategy: str
    count: int = 32
    seed: int = 0


def _num(v: str):
    try:
        return int(v)
    except ValueError:
        try:
            return float(v)
        except ValueError:
            return v


def parse_space_spec(text: str, seed: int | None = None) -> SpaceSpec:
    """'sphere:n=30,r=1,N=2000,seed=7' and friends. A seed inside the string wins."""
    kind, _, rest = text.partition(":")
    if kind not in ALIASES:
        raise BadSpec(f"unknown space kind {kind!r}")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        k, eq, v = item.partition("=")
        if not eq:
            raise BadSpec(f"expected key=value in {text!r}, got {item!r}")
        params[k.strip()] = _num(v.strip())
    s = params.pop("seed", None)
    if s is None:
        s = default_seed(seed)
    return SpaceSpec(ALIASES[kind], params, int(s))


def sphere_coords(n: int, N: int, r: float, rng: np.random.Generator) -> np.ndarray:
    """N i.i.d. uniform points on the n-sphere of radius r in R^(n+1)."""
    g = rng.standard_normal((N, n + 1))
    return r * g / np.linalg.norm(g, axis=1, keepdims=True)


def sphere_distances(X: np.ndarray, r: float) -> np.ndarray:
    c = np.clip(X @ X.T / r**2, -1.0, 1.0)
    D = r * np.arccos(c)
    np.fill_diagonal(D, 0.0)
    return D


def _get(p: dict, key: str, default, *alts):
    for k in (key, *alts):
        if k in p:
            return p[k]
    return default


def gen_space(spec: SpaceSpec | str, check: bool = True) -> FiniteMMSpace:
    if isinstance(spec, str):
        spec = parse_space_spec(spec)
    p = spec.params
    rng = make_rng(spec.seed)
    kind = spec.kind
    meta = {"spec": str(spec), "kind": kind}
    try:
        if kind == "two_point":
            return build_space(["x1", "x2"], [[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5], coords=[[0.0], [1.0]], meta=meta)
        if kind == "single_point":
            return build_space(["x"], [[0.0]], [float(_get(p, "mass", 1.0))], coords=[[0.0]], meta=meta)
        if kind == "circle_grid":
            N = int(_get(p, "N", 64))
            r = float(_get(p, "r", 1.0))
            th = 2 * pi * np.arange(N) / N
            gap = np.abs(th[:, None] - th[None, :])
            D = r * np.minimum(gap, 2 * pi - gap)
            coords = r * np.column_stack([np.cos(th), np.sin(th)])
            return build_space(None, D, np.full(N, 1.0 / N), coords=coords, meta=meta, check=check)
        if kind == "hamming_cube":
            k = int(_get(p, "k", 4))
            if k > 12:
                raise BadSpec("hamming_cube supports k <= 12")
            bits = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
            D = cdist(bits, bits, "cityblock")
            return build_space(None, D, np.full(1 << k, 1.0 / (1 << k)), coords=bits, meta=meta, check=check)
        if kind == "sphere_sample":
            n = int(_get(p, "n", 2))
            N = int(_get(p, "N", 500))
            if "s" in p:
                r = float(n) ** float(p["s"])
            else:
                r = float(_get(p, "r", 1.0))
            X = sphere_coords(n, N, r, rng)
            meta.update(n=n, r=r)
            return build_space(None, sphere_distances(X, r), np.full(N, 1.0 / N), coords=X, meta=meta, check=check)
        if kind == "random_cloud":
            n = int(_get(p, "n", 10))
            dim = int(_get(p, "dim", 2))
            X = rng.uniform(0.0, 1.0, (n, dim))
            metric = _get(p, "metric", "euclid")
            if metric == "euclid":
                D = cdist(X, X)
            elif metric == "graph":
                # shortest paths over random edge lengths: a generic finite metric
                A = rng.uniform(0.2, 1.0, (n, n))
                A = np.triu(A, 1)
                D = shortest_path(A + A.T, directed=False)
                X = None
            else:
                raise BadSpec(f"unknown random_cloud metric {metric!r}")
            if _get(p, "weights", "random") == "uniform":
                w = np.full(n, 1.0 / n)
            else:
                w = rng.uniform(0.2, 1.0, n)
                w /= w.sum()
            return build_space(None, D, w, coords=X, meta=meta, check=check)
    except (KeyError, ValueError, TypeError) as exc:
        raise BadSpec(f"bad parameters for {kind}: {exc}") from None
    raise BadSpec(f"unknown space kind {kind!r}")


# ------------------------------------------------------------ scalar fields

def lipschitz_envelope(g, space: FiniteMMSpace) -> ScalarField:
    """Largest 1-Lipschitz minorant: f(x) = min_y g(y) + d(x, y)."""
    g = np.asarray(g, dtype=float)
    return ScalarField(np.min(g[None, :] + space.dist, axis=1), 1.0, "envelope")


def halfmass_distance_fields(space: FiniteMMSpace) -> np.ndarray:
    """Rows d(., A) for every subset A of the support with mu(A) >= m/2."""
    s = space.support
    n = len(s)
    if n > HALFMASS_LIMIT:
        raise ModeUnavailable(f"half-mass subsets need at most {HALFMASS_LIMIT} support points, got {n}")
    m = space.mass
    half = 0.5 * m - mass_tol(m)
    Ds = space.dist[s]  # support point x all points
    w = space.weights[s]
    lo_n = min(n, 12)

    def table(rows, wts):
        k = len(rows)
        dist = np.full((1 << k, space.n), np.inf)
        mass = np.zeros(1 << k)
        for i in range(k):
            b = 1 << i
            dist[b : 2 * b] = np.minimum(dist[:b], rows[i])
            mass[b : 2 * b] = mass[:b] + wts[i]
        return dist, mass

    lo_d, lo_m = table(Ds[:lo_n], w[:lo_n])
    hi_d, hi_m = table(Ds[lo_n:], w[lo_n:])
    out = []
    for h in range(len(hi_m)):
        ok = lo_m + hi_m[h] >= half
        if h == 0:
            ok[0] = False
        if ok.any():
            out.append(np.minimum(lo_d[ok], hi_d[h]))
    return np.vstack(out)


def scalar_family(space: FiniteMMSpace, strategy: str = "distance_fields", count: int = 32, seed: int = 0, audit: bool = True) -> list[ScalarField]:
    D = space.dist
    if strategy == "distance_fields":
        fams = [ScalarField(D[i], 1.0, f"d(.,{i})") for i in range(space.n)]
        fams += [ScalarField(-D[i], 1.0, f"-d(.,{i})") for i in range(space.n)]
    elif strategy == "halfmass_distance_fields":
        fams = [ScalarField(row, 1.0, "d(.,A)") for row in halfmass_distance_fields(space)]
    elif strategy == "exact_small":
        fams = scalar_family(space, "distance_fields", audit=False) + scalar_family(space, "halfmass_distance_fields", audit=False)
    elif strategy == "random_envelope":
        rng = make_rng(seed)
        scale = max(space.diameter, 1e-12)
        fams = [lipschitz_envelope(rng.uniform(0.0, scale, space.n), space) for _ in range(count)]
    else:
        raise BadSpec(f"unknown scalar family {strategy!r}")
    if audit:
        for f in fams:
            audit_field(space, f)
    return fams


def _random_field(space: FiniteMMSpace, rng) -> np.ndarray:
    if rng.uniform() < 0.5:
        return space.dist[rng.integers(space.n)].copy()
    return lipschitz_envelope(rng.uniform(0.0, max(space.diameter, 1e-12), space.n), space).values


# ------------------------------------------------------------ screen maps

def multi_distance_map(space: FiniteMMSpace, k: int, rng) -> np.ndarray:
    """x -> (d(x, p_1), ..., d(x, p_k)) / sqrt(k) for random anchors."""
    anchors = rng.choice(space.n, size=k, replace=space.n < k)
    return space.dist[:, anchors] / np.sqrt(k)


def _unit(rng, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def geodesic_map(space: FiniteMMSpace, screen, f: np.ndarray, rng=None):
    """Place the values of a 1-Lipschitz field isometrically along a geodesic of the screen."""
    rng = make_rng(0) if rng is None else rng
    f = np.asarray(f, dtype=float)
    if screen.kind == "euclid":
        return (f - np.median(f))[:, None] * _unit(rng, screen.dim)[None, :]
    if screen.kind == "hyperbolic":
        u = _unit(rng, screen.dim)
        s = f - 0.5 * (f.min() + f.max())
        # keep clear of the boundary; clipping keeps the field 1-Lipschitz
        lim = 2 * screen.scale * 14.0
        s = np.clip(s, -lim, lim)
        return np.tanh(s / (2 * screen.scale))[:, None] * u[None, :]
    if screen.kind == "tree":
        a, b, L = screen.diameter_path()
        s = np.clip(f - f.min(), 0.0, L)
        pa, pb = screen.as_points([screen.vertices[a], screen.vertices[b]])
        return [screen.interpolate(pa, pb, t) for t in s / L]
    raise BadSpec(f"no geodesic embedding for {screen.kind}")


def _random_points(screen, n: int, rng, spread: float):
    if screen.kind == "euclid":
        return rng.normal(0.0, spread, (n, screen.dim))
    if screen.kind == "hyperbolic":
        r = np.tanh(rng.uniform(0.0, spread, n) / (2 * screen.scale))
        return np.array([ri * _unit(rng, screen.dim) for ri in r])
    if screen.kind == "tree":
        E = len(screen.edges)
        if E == 0:
            return [screen.as_points([screen.vertices[0]])[0]] * n
        out = []
        for _ in range(n):
            e = int(rng.integers(E))
            out.append(screen.edge_point(e, rng.uniform(0.0, screen.edges[e][2])))
        return out
    raise BadSpec(f"no random placement for {screen.kind}")


def _center(screen, pts):
    if screen.kind == "tree":
        return pts[0]
    if screen.kind == "hyperbolic":
        return np.zeros(screen.dim)
    return np.mean(pts, axis=0)


def repair_map(space: FiniteMMSpace, screen, pts, max_sweeps: int = REPAIR_SWEEPS):
    """Shrink violating pairs toward their midpoints, then contract globally.

    The final contraction toward a center c by lambda = min d_X / d_Y is
    1-Lipschitz-safe in any CAT(0) screen, so the result always passes the audit.
    """
    n = space.n
    pts = list(pts) if screen.kind == "tree" else np.array(pts, dtype=float)
    DX = space.dist
    if n <= PAIR_REPAIR_LIMIT:
        for _ in range(max_sweeps):
            DY = screen.pairwise(pts)
            bad = np.argwhere(np.triu(DY > DX + 1e-12, 1))
            if len(bad) == 0:
                return pts
            for i, j in bad:
                dy = screen.distance(pts[i], pts[j])
                if dy <= DX[i, j]:
                    continue
                t = 0.5 * (1.0 - DX[i, j] / dy)
                pi_, pj = pts[i], pts[j]
                pts[i] = screen.geodesic(pi_, pj, t)
                pts[j] = screen.geodesic(pj, pi_, t)
    DY = screen.pairwise(pts)
    iu = np.triu_indices(n, 1)
    over = DY[iu] > 0
    if not over.any():
        return pts
    lam = min(1.0, float(np.min(DX[iu][over] / DY[iu][over]))) * (1.0 - 1e-9)
    c = _center(screen, pts)
    out = [screen.geodesic(c, x, lam) for x in pts]
    return out if screen.kind == "tree" else np.array(out)


def exp_chart_map(space: FiniteMMSpace, screen: HyperbolicScreen, rng, radius_cap: float = 3.0) -> np.ndarray:
    """exp_0(G / q) for a clipped, centered multi-distance map G into R^n.

    exp_0 stretches a ball of radius R by at most q = sinh(aR) / (aR), a = sqrt(-curvature),
    so dividing by q keeps the composite 1-Lipschitz.
    """
    a = 1.0 / screen.scale
    G = multi_distance_map(space, screen.dim, rng)
    G = G - G.mean(axis=0)
    R = min(float(np.max(np.linalg.norm(G, axis=1))), radius_cap / a)
    norms = np.linalg.norm(G, axis=1, keepdims=True)
    G = G * np.minimum(1.0, R / np.maximum(norms, 1e-300))
    q = np.sinh(a * R) / (a * R) if R > 0 else 1.0
    V = G / q
    nv = np.linalg.norm(V, axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        fac = np.where(nv > 0, np.tanh(nv / (2 * screen.scale)) / nv, 0.0)
    return fac * V


def _one_map(space, screen, strategy, rng, i):
    if strategy == "multi_distance_embedding":
        if screen.kind != "euclid":
            raise BadSpec("multi_distance_embedding targets Euclidean screens")
        return multi_distance_map(space, screen.dim, rng)
    if strategy == "geodesic_embedding":
        return geodesic_map(space, screen, _random_field(space, rng), rng)
    if strategy == "repaired_assignment":
        spread = max(space.diameter, 1e-6)
        return repair_map(space, screen, _random_points(screen, space.n, rng, spread))
    if strategy == "exp_chart":
        if screen.kind != "hyperbolic":
            raise BadSpec("exp_chart targets hyperbolic screens")
        return exp_chart_map(space, screen, rng)
    raise BadSpec(f"unknown map family {strategy!r}")


def map_family(space: FiniteMMSpace, screen, strategy: str = "mixed", count: int = 32, seed: int = 0, audit: bool = True) -> list[ScreenMap]:
    """Seeded 1-Lipschitz maps into a screen; every member is audited."""
    rng = make_rng(seed)
    if strategy == "mixed":
        pool = {
            "euclid": ["multi_distance_embedding", "geodesic_embedding", "repaired_assignment"],
            "hyperbolic": ["exp_chart", "geodesic_embedding", "repaired_assignment"],
            "tree": ["geodesic_embedding", "repaired_assignment"],
        }[screen.kind]
    elif strategy in MAP_STRATEGIES:
        pool = [strategy]
    else:
        raise BadSpec(f"unknown map family {strategy!r}")
    out = []
    for i in range(count):
        strat = pool[i % len(pool)]
        pts = _one_map(space, screen, strat, rng, i)
        F = ScreenMap(screen, pts, 1.0, f"{strat}#{i}")
        if audit:
            try:
                audit_map(space, F)
            except Exception as exc:
                if strat == "repaired_assignment":
                    raise RepairFailed(str(exc)) from None
                raise
        out.append(F)
    return out


def gaussian_moment(q: float) -> float:
    """M_q = E|g|^q for a standard normal g: 2^(q/2) pi^(-1/2) Gamma((q+1)/2)."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    return float(np.exp(0.5 * q * log(2.0) - 0.5 * log(pi) + lgamma(0.5 * (q + 1.0))))
