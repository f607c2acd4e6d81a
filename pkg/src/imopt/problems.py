"""Seeded test problems with planted minimizers, so f* and x* are known exactly."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .prox import ENTROPY, EUCLIDEAN, ProxSetup
from .sets import Box, FeasibleSet, Simplex, WholeSpace
from .zoo import CompositeProblem, L1Norm, make_composite_model, make_smooth_model


@dataclass
class PlantedProblem:
    name: str
    set: FeasibleSet
    setup: ProxSetup
    A: np.ndarray
    b: np.ndarray
    x_star: np.ndarray
    x0: np.ndarray
    lam: float = 0.0  # weight of an l1 term

    def __post_init__(self):
        eig = np.linalg.eigvalsh(self.A)
        self.L = float(eig[-1])
        self.mu = float(max(eig[0], 0.0))
        self.f_star = self.f(self.x_star)

    def smooth(self, x):
        return 0.5 * float(x @ self.A @ x) - float(self.b @ x)

    def grad(self, x):
        return self.A @ x - self.b

    def f(self, x):
        return self.smooth(x) + self.lam * float(np.abs(x).sum())

    @property
    def R2(self) -> float:
        return self.setup.bregman(self.x0, self.x_star)

    @property
    def L_model(self) -> float:
        """Smoothness constant in the setup's norm (l1 for entropy: max |A_ij|)."""
        if self.setup.kind == "entropy":
            return float(np.abs(self.A).max())
        return self.L

    def model(self, delta: float = 0.0):
        if self.lam > 0:
            return make_composite_model(CompositeProblem(self.smooth, self.grad, L1Norm(self.lam)), self.L_model)
        return make_smooth_model(self.smooth, self.grad, self.L_model, delta)


def random_spd(n: int, rng, cond: float = 10.0, L: float = 1.0) -> np.ndarray:
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eig = L * np.geomspace(1.0 / cond, 1.0, n) if n > 1 else np.array([L])
    A = (Q * eig) @ Q.T
    return 0.5 * (A + A.T)


def quadratic_whole(n: int, seed: int, cond: float = 10.0, L: float = 1.0) -> PlantedProblem:
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, cond, L)
    x_star = rng.standard_normal(n)
    x0 = x_star + rng.standard_normal(n)
    return PlantedProblem("quadratic_whole", WholeSpace(n), EUCLIDEAN, A, A @ x_star, x_star, x0)


def quadratic_box(n: int, seed: int, cond: float = 10.0, L: float = 1.0) -> PlantedProblem:
    """Quadratic on [-1, 1]^n whose minimizer has about a third of its
    coordinates on the bounds (b = A x* + normal-cone vector)."""
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, cond, L)
    x_star = rng.uniform(-0.9, 0.9, n)
    kind = rng.integers(0, 3, n)  # 0 interior, 1 at upper, 2 at lower
    x_star[kind == 1] = 1.0
    x_star[kind == 2] = -1.0
    nu = rng.uniform(0.1, 1.0, n)
    cone = np.where(kind == 1, nu, np.where(kind == 2, -nu, 0.0))
    b = A @ x_star + cone  # grad f(x*) = -cone, pointing out of the box
    x0 = rng.uniform(-1.0, 1.0, n)
    return PlantedProblem("quadratic_box", Box(-1.0, 1.0, n), EUCLIDEAN, A, b, x_star, x0)


def composite_l1_box(n: int, seed: int, lam: float = 0.1, cond: float = 10.0, L: float = 1.0) -> PlantedProblem:
    """1/2 x'Ax - b'x + lam ||x||_1 on [-1, 1]^n with planted zeros, interior
    nonzeros and active bounds."""
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, cond, L)
    kind = rng.integers(0, 4, n)  # 0 zero, 1 interior, 2 upper, 3 lower
    x_star = np.where(kind == 1, rng.uniform(-0.9, 0.9, n), 0.0)
    x_star[kind == 1] += np.sign(x_star[kind == 1]) * 0.05
    x_star[kind == 2] = 1.0
    x_star[kind == 3] = -1.0
    s = np.where(kind == 0, rng.uniform(-0.9, 0.9, n), np.sign(x_star))
    nu = rng.uniform(0.1, 1.0, n)
    cone = np.where(kind == 2, nu, np.where(kind == 3, -nu, 0.0))
    # 0 = A x* - b + lam s + normal-cone term
    b = A @ x_star + lam * s + cone
    x0 = rng.uniform(-1.0, 1.0, n)
    return PlantedProblem("composite_l1_box", Box(-1.0, 1.0, n), EUCLIDEAN, A, b, x_star, x0, lam)


def quadratic_simplex(n: int, seed: int, cond: float = 10.0, L: float = 1.0, setup: ProxSetup = ENTROPY) -> PlantedProblem:
    """Quadratic on the simplex with a planted minimizer touching the boundary."""
    rng = np.random.default_rng(seed)
    A = random_spd(n, rng, cond, L)
    support = rng.random(n) < 0.6
    support[rng.integers(n)] = True
    x_star = np.where(support, rng.uniform(0.2, 1.0, n), 0.0)
    x_star /= x_star.sum()
    tau = rng.standard_normal()
    nu = np.where(support, 0.0, rng.uniform(0.05, 0.5, n))
    # grad f(x*) = tau 1 + nu with nu >= 0 off the support
    b = A @ x_star - tau - nu
    x0 = np.full(n, 1.0 / n)
    return PlantedProblem("quadratic_simplex", Simplex(n), setup, A, b, x_star, x0)


FAMILIES: dict[str, Callable[..., PlantedProblem]] = {
    "quadratic_whole": quadratic_whole,
    "quadratic_box": quadratic_box,
    "composite_l1_box": composite_l1_box,
    "quadratic_simplex": quadratic_simplex,
}


def certificate_suite(count: int = 20, seed: int = 0, n_max: int = 50) -> list[PlantedProblem]:
    """Mixed quadratic and composite instances for certificate checks."""
    rng = np.random.default_rng(seed)
    names = ["quadratic_whole", "quadratic_box", "composite_l1_box", "quadratic_simplex"]
    out = []
    for i in range(count):
        name = names[i % len(names)]
        n = int(rng.integers(2, n_max + 1))
        out.append(FAMILIES[name](n, seed=int(rng.integers(2 ** 31)), cond=float(rng.uniform(2, 50))))
    return out
