"""Run the sphere sweep and print each column with its trend verdict."""
import argparse

from mmconc.sweep import SweepConfig, run_sweep, trend_ok


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=list(SweepConfig.ns))
    ap.add_argument("--N", type=int, default=SweepConfig.N)
    ap.add_argument("--iset-maps", type=int, default=SweepConfig.iset_maps)
    ap.add_argument("--no-iset", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default=None, help="also write the table here")
    args = ap.parse_args()

    cfg = SweepConfig(ns=tuple(args.n), N=args.N, iset=not args.no_iset, iset_maps=args.iset_maps, seed=args.seed)
    table = run_sweep(cfg)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(table.to_csv())
    cols = ["obs_diameter", "obs_lp_variation"] + ([] if args.no_iset else ["iset_diameter"])
    for s in cfg.screens:
        for c in cols:
            v = table.column(s, c)
            print(f"{s:18s} {c:18s} " + " ".join(f"{x:8.4f}" for x in v) + f"  decreasing={trend_ok(v, None)}")


if __name__ == "__main__":
    main()
