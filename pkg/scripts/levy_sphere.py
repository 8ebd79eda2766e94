"""Empirical tail of the first coordinate on S^n against the Gaussian-type bound 2 exp(-(n-1) eps^2 / 2)."""
import argparse
import math

import numpy as np

from mmconc.generators import make_rng, sphere_coords
from mmconc.observables import levy_mean


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[5, 10, 30, 60])
    ap.add_argument("--N", type=int, default=5000)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.8])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print("n,eps,tail,slack,bound,ok")
    for n in args.n:
        f = sphere_coords(n, args.N, 1.0, make_rng(args.seed + n))[:, 0]
        _, _, mf = levy_mean(f, np.full(args.N, 1.0 / args.N))
        for eps in args.eps:
            ph = float(np.mean(np.abs(f - mf) >= eps))
            slack = 3 * math.sqrt(ph * (1 - ph) / args.N)
            bound = 2 * math.exp(-(n - 1) * eps**2 / 2)
            print(f"{n},{eps},{ph:.5f},{slack:.5f},{bound:.5f},{ph <= bound + slack}")


if __name__ == "__main__":
    main()
