"""Desk-scale sweeps over growing sphere dimension."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .barycenter import minimizer_set
from .generators import SpaceSpec, gen_space, make_rng, map_family
from .mmcore import build_space, pushforward
from .observables.diameters import partial_diameter
from .observables.fields import ScreenMap
from .observables.variation import lp_variation
from .screens import EuclideanScreen, parse_screen

COLUMNS = ["n", "screen", "kappa", "p", "obs_diameter", "pd_mode", "mode", "obs_lp_variation", "iset_diameter", "runtime_s"]


@dataclass
class SweepConfig:
    ns: tuple = (5, 10, 20, 40)
    screens: tuple = ("euclid:1", "euclid:3", "hyperbolic:3:-1")
    kappa: float = 0.1
    p: float = 2.0
    N: int = 1000
    radius: float = 1.0
    count: int = 32
    seed: int = 0
    iset: bool = True
    iset_maps: int = 4
    iset_range: tuple = (0.5, 1.0)
    iset_grid: int = 9
    iset_atoms: int = 1000

    def __post_init__(self):
        if not self.ns or min(self.ns) < 1:
            raise ValueError(f"sweep dimensions must be positive, got {self.ns}")
        if self.N < 1 or self.count < 1:
            raise ValueError("N and count must be positive")
        if not 0 < self.kappa:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.iset_range[0] > self.iset_range[1] or self.iset_range[0] <= 0:
            raise ValueError(f"bad exponent range {self.iset_range}")


@dataclass
class SweepTable:
    rows: list = field(default_factory=list)

    def column(self, screen: str, name: str) -> np.ndarray:
        rows = sorted((r for r in self.rows if r["screen"] == screen), key=lambda r: r["n"])
        return np.array([r[name] for r in rows], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _fmt(r[k]) for k in COLUMNS})
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepTable":
        rows = []
        for r in csv.DictReader(io.StringIO(text)):
            row = dict(r)
            row["n"] = int(row["n"])
            for k in ("kappa", "p", "obs_diameter", "obs_lp_variation", "iset_diameter", "runtime_s"):
                row[k] = float(row[k]) if row[k] not in ("", "nan") else float("nan")
            rows.append(row)
        return cls(rows)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _family(space, screen, cfg: SweepConfig, seed: int):
    if screen.kind == "euclid" and screen.dim == 1:
        # distance fields from random base points, as maps into R
        rng = make_rng(seed)
        idx = rng.choice(space.n, size=min(cfg.count, space.n), replace=False)
        return [ScreenMap(screen, space.dist[i][:, None].copy(), 1.0, f"d(.,{i})") for i in idx], "exact_1d"
    if screen.kind == "euclid":
        return map_family(space, screen, "multi_distance_embedding", cfg.count, seed), "ball_estimate"
    if screen.kind == "hyperbolic":
        return map_family(space, screen, "exp_chart", cfg.count, seed), "ball_estimate"
    return map_family(space, screen, "mixed", cfg.count, seed), "ball_estimate"


def _iset(space, fam, cfg: SweepConfig, seed: int) -> float:
    if not cfg.iset:
        return float("nan")
    sub = space
    keep = None
    if space.n > cfg.iset_atoms:
        keep = np.sort(make_rng(seed).choice(space.n, size=cfg.iset_atoms, replace=False))
        w = space.weights[keep]
        sub = build_space(None, space.dist[np.ix_(keep, keep)], w / w.sum() * space.mass, check=False)
    best = 0.0
    for F in fam[: cfg.iset_maps]:
        if keep is not None:
            F = ScreenMap(F.screen, F.screen.take(F.points, keep), F.lipschitz, F.name)
        nu = pushforward(F, sub)
        ms = minimizer_set(nu, cfg.iset_range[0], cfg.iset_range[1], cfg.iset_grid, seed=seed, n_perturb=4)
        best = max(best, ms.diameter)
    return float(best)


def run_sweep(cfg: SweepConfig) -> SweepTable:
    rows = []
    for n in sorted(cfg.ns):
        spec = SpaceSpec("sphere_sample", {"n": n, "N": cfg.N, "r": cfg.radius}, cfg.seed + n)
        space = gen_space(spec, check=False)
        for j, sspec in enumerate(cfg.screens):
            t0 = time.perf_counter()
            screen = parse_screen(sspec)
            fam, pd_mode = _family(space, screen, cfg, cfg.seed + 1000 * j + n)
            od = 0.0
            lp = 0.0
            for F in fam:
                nu = pushforward(F, space)
                od = max(od, partial_diameter(nu, cfg.kappa, pd_mode).value)
                lp = max(lp, lp_variation(F, space, cfg.p))
            iset = _iset(space, fam, cfg, cfg.seed + n)
            rows.append(
                {
                    "n": n,
                    "screen": sspec,
                    "kappa": cfg.kappa,
                    "p": cfg.p,
                    "obs_diameter": od,
                    "pd_mode": pd_mode,
                    "mode": "lower_estimate" if pd_mode == "exact_1d" else "estimate",
                    "obs_lp_variation": lp,
                    "iset_diameter": iset,
                    "runtime_s": round(time.perf_counter() - t0, 3),
                }
            )
    return SweepTable(rows)


def trend_ok(values, ratio: float | None = 0.5) -> bool:
    """Strictly decreasing, and the last value below ratio times the first."""
    v = np.asarray(values, dtype=float)
    dec = bool(np.all(np.diff(v) < 0))
    return dec and (ratio is None or v[-1] < ratio * v[0])
