"""Plain vs proximal Sinkhorn total sweeps on random instances.

    python3 scripts/sinkhorn_comparison.py --n 6 --seeds 0,1,2 --eps 1e-3
"""
import argparse
import sys

from imopt.bench import compare_sinkhorn, compare_table_csv
from imopt.ot import random_instance


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--gamma-grid", default="1,0.3,0.1,0.03")
    args = ap.parse_args()
    grid = [float(g) for g in args.gamma_grid.split(",")]
    for s in args.seeds.split(","):
        sys.stdout.write(f"# seed {s}\n")
        sys.stdout.write(compare_table_csv(compare_sinkhorn(random_instance(args.n, int(s)), args.eps, grid)))


if __name__ == "__main__":
    main()
