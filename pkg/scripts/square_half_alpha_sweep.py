"""Measured least PA constant of x -> x^2/2 against N and grid size.

The ratio for pairs collapsing onto x = y = 1 tends to a limit fixed by the
derivatives of the iterates at 1, so finer grids approach it from below.
"""

import argparse
import csv
import sys

from palab.conditions import Family, sample_pairs, tightest_constant
from palab.repro import derivative_limit_ratio, square_half_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grids", default="101,1001,10001")
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--horizon", type=int, default=16)
    args = ap.parse_args()

    w = csv.writer(sys.stdout)
    w.writerow(["grid", "N", "alpha_hat", "derivative_limit", "witness_x", "witness_y", "witness_n"])
    for grid in (int(g) for g in args.grids.split(",")):
        X, T = square_half_instance(grid)
        # the supremum sits at the top of the grid, so the top corner suffices for large grids
        window = (max(0.0, 1.0 - 50.0 / (grid - 1)), 1.0)
        pairs = sample_pairs(X, window=window)
        for N in range(1, args.n_max + 1):
            r = tightest_constant(Family.PA, X, T, pairs, N=N, H=args.horizon)
            w.writerow([grid, N, f"{r.estimate:.9f}", f"{derivative_limit_ratio(N):.9f}",
                        r.witness.pair[0], r.witness.pair[1], r.witness.n])


if __name__ == "__main__":
    main()
