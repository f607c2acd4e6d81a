"""Iterations to reach f - f* <= target for the gradient and fast gradient
methods on an ill-conditioned quadratic. Emits CSV on stdout."""
import argparse
import csv
import sys

from imopt.acceptance import iterations_to_gap
from imopt.fgm import FGMConfig, fgm_solve
from imopt.gm import GMConfig, gm_solve
from imopt.problems import quadratic_whole


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--cond", type=float, default=1e4)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--targets", default="1e-2,1e-4,1e-6")
    args = ap.parse_args()
    p = quadratic_whole(args.n, seed=args.seed, cond=args.cond)
    out = csv.writer(sys.stdout)
    out.writerow(["target", "gm_iters", "fgm_iters"])
    for t in (float(s) for s in args.targets.split(",")):
        out.writerow([t, iterations_to_gap(gm_solve, GMConfig, p, t), iterations_to_gap(fgm_solve, FGMConfig, p, t)])


if __name__ == "__main__":
    main()
