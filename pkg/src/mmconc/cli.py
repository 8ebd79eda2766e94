"""mmc: analyze a space, run the verification battery, or run a sweep."""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as mio
from .barycenter import barycenter, minimizer_set, t_mean_minimizer, variance_inequality_report
from .checks import verify_space
from .errors import MMError
from .generators import default_seed, gen_space, map_family, parse_space_spec, scalar_family
from .mmcore import mass_tol, pushforward
from .observables import (
    Report,
    ScreenMap,
    audit_map,
    central_radius,
    concentration_function,
    levy_mean,
    levy_radius,
    lp_from_distances,
    obs_central_radius,
    obs_diameter,
    obs_lp_variation,
    pre_levy_mean_tree,
    separation,
)
from .observables.diameters import ENUM_LIMIT, pd_value
from .screens import parse_screen
from .sweep import SweepConfig, run_sweep, trend_ok

FUNCTIONALS = [
    "alpha", "sep", "levy_mean", "levy_radius", "pd", "obs_diameter", "lp", "obs_lp",
    "crad", "obs_crad", "barycenter", "tmean", "iset", "variance", "pre_levy_mean",
]
SCALAR_FAMILIES = {"distance_fields", "halfmass_distance_fields", "exact_small", "random_envelope"}


class UsageError(Exception):
    pass


def load_space_arg(text: str, seed: int):
    if text.endswith(".json") or os.path.isfile(text):
        return mio.load_space(text)
    return gen_space(parse_space_spec(text, seed))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else str(float(x))
    if isinstance(x, np.integer):
        return int(x)
    if hasattr(x, "v") and hasattr(x, "h"):
        return {"vertex": int(x.v), "height": float(x.h)}
    return x


def _emit(payload: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _measure(space, screen, args, seed):
    """Identity when the space carries coordinates in the screen, else the first family map."""
    if screen.kind == "euclid" and space.coords is not None and space.coords.shape[1] == screen.dim:
        F = ScreenMap(screen, np.asarray(space.coords), 1.0, "coords")
        try:
            audit_map(space, F)
            return pushforward(F, space), "coords"
        except MMError:
            pass
    F = map_family(space, screen, args.family or "mixed", 1, seed)[0]
    return pushforward(F, space), F.name


def _space_pd(space, kappa: float, mode: str) -> Report:
    sp = space.restrict_to_support()
    need = sp.mass - kappa
    if mode == "auto":
        mode = "enumerate" if sp.n <= ENUM_LIMIT else "ball_estimate"
    kind = {"enumerate": "exact", "ball_estimate": "upper_estimate", "ball_lower": "lower_estimate"}.get(mode)
    if kind is None:
        raise UsageError(f"pd mode {mode!r} needs a screen; use obs_diameter")
    val = 0.0 if need <= mass_tol(sp.mass) else pd_value(sp.dist, sp.weights, need, mode)
    return Report("partial_diameter", val, kind, {"kappa": kappa, "pd_mode": mode})


def analyze(args) -> Report:
    seed = default_seed(args.seed)
    space = load_space_arg(args.space, seed)
    fn = args.functional
    kappas = args.kappa or [0.1]
    k = kappas[0]
    ps = args.p or [2.0]
    needs_screen = fn in {"obs_diameter", "obs_lp", "crad", "obs_crad", "barycenter", "tmean", "iset", "variance", "pre_levy_mean"}
    screen = parse_screen(args.screen) if needs_screen else None

    if fn == "alpha":
        return concentration_function(space, args.r, "auto" if args.mode == "auto" else args.mode, seed=seed)
    if fn == "sep":
        ks = kappas if len(kappas) > 1 else [k, k]
        return separation(space, ks, "auto" if args.mode == "auto" else args.mode)
    if fn in ("levy_mean", "levy_radius"):
        strat = args.family or "distance_fields"
        if strat not in SCALAR_FAMILIES:
            raise UsageError(f"{fn} needs a scalar family, one of {sorted(SCALAR_FAMILIES)}")
        fam = scalar_family(space, strat, args.count, seed)
        if fn == "levy_radius":
            return levy_radius(space, k, fam, family_name=strat)
        a, b, m = levy_mean(fam[0].values, space)
        return Report("levy_mean", m, "exact", {"a": a, "b": b, "field": fam[0].name}, strat, seed)
    if fn == "pd":
        return _space_pd(space, k, args.mode)
    if fn == "lp":
        s = space.support
        val = lp_from_distances(space.dist[np.ix_(s, s)], space.weights[s], ps[0])
        return Report("lp_variation", val, "exact", {"p": ps[0]})
    if fn in ("obs_diameter", "obs_lp", "obs_crad"):
        strat = args.family or "mixed"
        fam = map_family(space, screen, strat, args.count, seed)
        if fn == "obs_diameter":
            rep = obs_diameter(space, screen, k, fam, pd_mode=args.mode)
        elif fn == "obs_lp":
            rep = obs_lp_variation(space, screen, ps[0], fam)
        else:
            rep = obs_central_radius(space, screen, k, fam)
        rep.family, rep.seed = strat, seed
        rep.params["screen"] = screen.spec
        return rep

    if fn == "variance" and space.meta.get("kind") == "sphere_sample":
        lhs, rhs, margin = variance_inequality_report(space, "nonnegative")
        return Report("variance_margin", margin, "upper_estimate", {"lhs": lhs, "rhs": rhs, "curvature": "nonnegative"}, None, seed)

    nu, src = _measure(space, screen, args, seed)
    params = {"screen": screen.spec, "map": src}
    approx = "exact" if screen.kind in ("euclid", "tree") else "upper_estimate"
    if fn == "crad":
        rep = central_radius(nu, k)
        rep.params.update(params)
        return rep
    if fn == "barycenter":
        res = barycenter(nu)
        params.update(point=res.point, residual=res.residual, iterations=res.iterations)
        return Report("barycenter", res.value, approx, params, None, seed)
    if fn == "tmean":
        res = t_mean_minimizer(nu, ps[0], seed=seed)
        params.update(t=ps[0], point=res.point, flat_region=res.flat_region, spread=res.spread)
        return Report("t_mean", res.value, "upper_estimate", params, None, seed)
    if fn == "iset":
        s, t = (ps[0], ps[1]) if len(ps) > 1 else (ps[0], ps[0])
        ms = minimizer_set(nu, s, t, args.grid, seed=seed)
        params.update(s=s, t=t, grid=args.grid, points=ms.points)
        return Report("iset_diameter", ms.diameter, "lower_estimate", params, None, seed)
    if fn == "variance":
        p = ps[0]
        lhs, rhs, margin = variance_inequality_report(nu, "nonpositive", p)
        params.update(p=p, lhs=lhs, rhs=rhs, curvature="nonpositive")
        return Report("variance_margin", margin, "exact" if approx == "exact" else "lower_estimate", params, None, seed)
    if fn == "pre_levy_mean":
        if screen.kind != "tree":
            raise UsageError("pre_levy_mean needs a tree screen")
        sp_ = pre_levy_mean_tree(nu)
        params.update(point=sp_.point, mass_first=sp_.mass_first, mass_second=sp_.mass_second)
        return Report("pre_levy_mean", min(sp_.mass_first, sp_.mass_second), "exact", params, None, seed)
    raise UsageError(f"unknown functional {fn!r}")


def cmd_analyze(args) -> int:
    rep = analyze(args)
    d = rep.to_dict()
    d["params"] = _jsonable(d["params"])
    _emit(json.dumps(d, sort_keys=True), args.out)
    return 0


def cmd_verify(args) -> int:
    seed = default_seed(args.seed)
    recs = []
    result = None
    for text in args.space:
        r = verify_space(load_space_arg(text, seed), seed=seed, tol=args.tol, count=args.count)
        recs += r.records
        result = r
    result.records = recs
    _emit(json.dumps(_jsonable(result.to_dict()), sort_keys=True), args.out)
    if not result.passed:
        for f in result.failures()[:20]:
            print(f"FAIL {f.check}: lhs={f.lhs:.6g} rhs={f.rhs:.6g} margin={f.margin:.3g}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    seed = default_seed(args.seed)
    cfg = SweepConfig(
        ns=tuple(args.n),
        screens=tuple(args.screen),
        kappa=(args.kappa or [0.1])[0],
        p=(args.p or [2.0])[0],
        N=args.N,
        count=args.count,
        seed=seed,
        iset=not args.no_iset,
    )
    table = run_sweep(cfg)
    _emit(table.to_csv(), args.out)
    if args.check_trend:
        bad = []
        for s in cfg.screens:
            cols = ["obs_diameter"] + ([] if args.no_iset else ["iset_diameter"])
            for c in cols:
                if not trend_ok(table.column(s, c), None):
                    bad.append(f"{s}:{c}")
        if bad:
            print("trend check failed for " + ", ".join(bad), file=sys.stderr)
            return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mmc", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: MMC_SEED or 0)")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--count", type=int, default=32, help="family size")

    a = sub.add_parser("analyze", help="evaluate one functional and print a JSON report")
    common(a)
    a.add_argument("--space", required=True, help="space spec (e.g. 'sphere:n=5,N=200') or JSON file")
    a.add_argument("--screen", default="euclid:1")
    a.add_argument("--functional", required=True, choices=FUNCTIONALS)
    a.add_argument("--kappa", type=float, nargs="+")
    a.add_argument("--p", type=float, nargs="+", help="exponent; tmean uses it as t, iset as s t")
    a.add_argument("--r", type=float, default=0.5)
    a.add_argument("--mode", default="auto")
    a.add_argument("--family", default=None)
    a.add_argument("--grid", type=int, default=33, help="exponent grid size for iset")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the inequality battery; exit 1 on any failure")
    common(v)
    v.add_argument("--space", required=True, nargs="+")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_verify, count=6)

    s = sub.add_parser("sweep", help="sphere sweep over n, CSV output")
    common(s)
    s.add_argument("--n", type=int, nargs="+", default=[5, 10, 20, 40])
    s.add_argument("--N", type=int, default=1000, help="sample points per sphere")
    s.add_argument("--screen", nargs="+", default=["euclid:1", "euclid:3", "hyperbolic:3:-1"])
    s.add_argument("--kappa", type=float, nargs="+")
    s.add_argument("--p", type=float, nargs="+")
    s.add_argument("--no-iset", action="store_true", help="skip the minimizer-set column")
    s.add_argument("--check-trend", action="store_true", help="exit 1 unless every column strictly decreases in n")
    s.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (MMError, UsageError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"mmc: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
