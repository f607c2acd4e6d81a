"""Iteration counts of the universal fast gradient method and universal
mirror prox against eps, for a nonsmooth and a smooth instance of each.
Emits CSV: method, nu, eps, iterations, predicted exponent."""
import csv
import sys

import numpy as np

from imopt.acceptance import EPS_GRID, universal_fgm_problems, universal_mp_operators
from imopt.fgm import fgm_universal_solve
from imopt.prox import EUCLIDEAN
from imopt.sets import EuclideanBall, WholeSpace
from imopt.vi import mirror_prox_universal_solve
from imopt.zoo import make_universal_model, make_vi_operator_model


def main(eps_grid=EPS_GRID):
    out = csv.writer(sys.stdout)
    out.writerow(["method", "nu", "eps", "iterations", "exponent"])
    probs, a, x0 = universal_fgm_problems()
    R2 = 0.5 * float((x0 - a) @ (x0 - a))
    for nu, p in probs.items():
        for eps in eps_grid:
            run = fgm_universal_solve(make_universal_model(p, eps), EUCLIDEAN, WholeSpace(a.size), x0, R2, eps)
            out.writerow(["universal_fgm", nu, eps, run.N, 2 / (1 + 3 * nu)])
    for nu, ((g, nu_, L_nu), n) in universal_mp_operators().items():
        for eps in eps_grid:
            m = make_vi_operator_model(g, L=1.0)
            run = mirror_prox_universal_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(n), 1.0), eps, holder=[(nu_, L_nu)])
            out.writerow(["universal_mp", nu, eps, run.N, 2 / (1 + nu)])


if __name__ == "__main__":
    main()
