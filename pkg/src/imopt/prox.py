"""Prox setups, Bregman divergences and the inexact-argmin accuracy contract."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidArgument, UnsupportedCombination, UnsupportedSet
from .sets import (
    Box,
    EuclideanBall,
    FeasibleSet,
    Product,
    Simplex,
    WholeSpace,
    as_point,
)

ENTROPY_FLOOR = 1e-16


@dataclass(frozen=True)
class ProxSetup:
    """Distance-generating function d and its Bregman divergence V[y](x).

    ``euclidean``: d(x) = ||x - center||^2 / (2 radius^2), 1-strongly convex in l2
    when radius <= 1. ``radius`` != 1 is the rescaled prox function used by the
    restarted mirror prox stages.

    ``entropy``: d(x) = sum x_i ln x_i, 1-strongly convex in l1 on the simplex.
    """

    kind: str = "euclidean"
    center: Optional[np.ndarray] = None
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropy"):
            raise InvalidArgument(f"unknown prox setup {self.kind!r}")
        if self.radius <= 0:
            raise InvalidArgument("radius must be positive")

    @property
    def norm_kind(self) -> str:
        return "l2" if self.kind == "euclidean" else "l1"

    @property
    def is_one_strongly_convex(self) -> bool:
        return self.kind == "entropy" or self.radius <= 1.0

    def omega_bound(self, n: int | None = None) -> float | None:
        if self.kind == "euclidean":
            return 1.0
        if n is None:
            return None
        return 2.0 * math.log(n) if n > 1 else 0.0

    def _entropy_domain(self, x: np.ndarray) -> np.ndarray:
        lo = x.min()
        if lo < -1e-12 or not np.isfinite(x.sum()):
            raise DomainError("entropy prox needs nonnegative finite coordinates")
        return np.maximum(x, ENTROPY_FLOOR) if lo < ENTROPY_FLOOR else x

    def _shift(self, x):
        return x if self.center is None else x - self.center

    def d(self, x) -> float:
        x = as_point(x)
        if self.kind == "euclidean":
            s = self._shift(x)
            return 0.5 * float(s @ s) / self.radius ** 2
        x = self._entropy_domain(x)
        return float(np.sum(x * np.log(x)))

    def grad(self, x) -> np.ndarray:
        x = as_point(x)
        if self.kind == "euclidean":
            return self._shift(x) / self.radius ** 2
        x = self._entropy_domain(x)
        return np.log(x) + 1.0

    def bregman(self, y, x) -> float:
        y = as_point(y)
        x = as_point(x)
        if x.size != y.size:
            raise DimensionMismatch(f"dimensions differ: {y.size} vs {x.size}")
        if self.kind == "euclidean":
            diff = x - y
            return 0.5 * float(diff @ diff) / self.radius ** 2
        x = self._entropy_domain(x)
        y = self._entropy_domain(y)
        val = float(np.sum(x * np.log(x / y) - x + y))
        return max(val, 0.0) if val > -1e-12 else val

    def norm(self, v) -> float:
        v = as_point(v)
        if self.norm_kind == "l2":
            return float(np.linalg.norm(v)) / self.radius
        return float(np.abs(v).sum())

    def dual_norm(self, g) -> float:
        g = as_point(g)
        if self.norm_kind == "l2":
            return float(np.linalg.norm(g)) * self.radius
        return float(np.abs(g).max())

    def scaled(self, center, radius: float) -> "ProxSetup":
        """d_p(x) = d((x - center) / radius); Euclidean only."""
        if self.kind != "euclidean":
            raise UnsupportedCombination("rescaling is implemented for the Euclidean setup")
        return ProxSetup("euclidean", center=as_point(center).copy(), radius=float(radius))


EUCLIDEAN = ProxSetup("euclidean")
ENTROPY = ProxSetup("entropy")


def bregman(setup: ProxSetup, y, x) -> float:
    """V[y](x) = d(x) - d(y) - <grad d(y), x - y>."""
    return setup.bregman(y, x)


@dataclass
class InexactnessBudget:
    """Model error delta, subproblem error delta_tilde, optional per-step schedule.

    ``delta_schedule(k, alpha, A)`` returns an extra delta_k for iteration k given
    the candidate step alpha_{k+1} and A_{k+1}.
    """

    delta: float = 0.0
    delta_tilde: float = 0.0
    delta_schedule: Optional[Callable[[int, float, float], float]] = None

    def __post_init__(self):
        if self.delta < 0 or self.delta_tilde < 0:
            raise InvalidArgument("inexactness budgets must be nonnegative")

    def delta_at(self, k: int, alpha: float, A: float) -> float:
        extra = self.delta_schedule(k, alpha, A) if self.delta_schedule else 0.0
        return self.delta + extra


def accuracy_translate(
    eps_tilde: float,
    mu: float,
    L: float,
    R: float,
    grad_norm_at_opt: float = 0.0,
    grad_zero_at_opt: bool = False,
) -> float:
    """Convert a function-value gap of a strongly convex subproblem into a
    stationarity error delta_tilde usable in the inexact-argmin sense."""
    if mu <= 0 or L <= 0 or R <= 0:
        raise InvalidArgument("mu, L and R must be positive")
    if eps_tilde < 0 or grad_norm_at_opt < 0:
        raise InvalidArgument("eps_tilde and the gradient norm must be nonnegative")
    if grad_zero_at_opt:
        return R * math.sqrt(2.0 * L * eps_tilde)
    return (L * R + grad_norm_at_opt) * math.sqrt(2.0 * eps_tilde / mu)


def stationarity_residual(h, x_tilde, set: FeasibleSet) -> float:
    """max over x in the set of <h, x_tilde - x>; <= delta_tilde means x_tilde is
    a delta_tilde-solution certified by the subgradient h."""
    return set.support_gap(h, x_tilde)


def verify_inexact_stationarity(subgrad, x_tilde, set: FeasibleSet, delta_tilde: float) -> bool:
    """Test-time oracle for the inexact-argmin condition (polytopes and balls)."""
    if isinstance(set, WholeSpace) or not set.has_lmo:
        raise UnsupportedSet("stationarity check needs a polytope or a ball")
    x_tilde = as_point(x_tilde, set.dim)
    h = as_point(subgrad(x_tilde), set.dim)
    v = set.lmo(h)
    return float(h @ (v - x_tilde)) >= -delta_tilde - 1e-12


def prox_center(setup: ProxSetup, set: FeasibleSet) -> np.ndarray:
    """argmin of d over the set."""
    if setup.kind == "euclidean":
        c = np.zeros(set.dim) if setup.center is None else setup.center
        return set.project(c)
    if isinstance(set, Simplex):
        return set.center()
    if isinstance(set, Product) and all(isinstance(s, Simplex) for s in set.sets):
        return np.concatenate([s.center() for s in set.sets])
    raise UnsupportedCombination(f"entropy prox center on {set!r}")


def max_bregman(setup: ProxSetup, z, set: FeasibleSet) -> float:
    """max over u in the set of V[z](u) (the V_max of mirror prox bounds)."""
    z = as_point(z, set.dim)
    if isinstance(set, Product):
        parts = set.split(z)
        return float(sum(max_bregman(setup, zb, sb) for zb, sb in zip(parts, set.sets)))
    if setup.kind == "euclidean":
        r2 = setup.radius ** 2
        if isinstance(set, Box):
            far = np.maximum((set.lower - z) ** 2, (set.upper - z) ** 2)
            return 0.5 * float(far.sum()) / r2
        if isinstance(set, EuclideanBall):
            return 0.5 * (np.linalg.norm(z - set.center) + set.radius) ** 2 / r2
        if isinstance(set, Simplex):
            return max(setup.bregman(z, v) for v in set.vertices())
    elif isinstance(set, Simplex):
        return float(-np.log(np.maximum(z, ENTROPY_FLOOR)).max())
    raise UnsupportedSet(f"no V_max rule for {setup.kind} on {set!r}")


def linear_prox(g, z, alpha: float, setup: ProxSetup, set: FeasibleSet) -> np.ndarray:
    """argmin over the set of alpha <g, x> + V[z](x)."""
    g = as_point(g)
    z = as_point(z)
    if setup.kind == "euclidean":
        step = alpha * setup.radius ** 2
        return set.project(z - step * g)
    if isinstance(set, Simplex):
        return _softmax(np.log(np.maximum(z, ENTROPY_FLOOR)) - alpha * g)
    if isinstance(set, Product) and all(isinstance(s, Simplex) for s in set.sets):
        return np.concatenate(
            [
                _softmax(np.log(np.maximum(zb, ENTROPY_FLOOR)) - alpha * gb)
                for zb, gb in zip(set.split(z), set.split(g))
            ]
        )
    if isinstance(set, WholeSpace):
        # generalized KL on the positive orthant
        return np.maximum(z, ENTROPY_FLOOR) * np.exp(-alpha * g)
    raise UnsupportedCombination(f"entropy prox step on {set!r}")


def linear_prox_residual(g, x, z, alpha: float, setup: ProxSetup, set: FeasibleSet) -> float:
    """Inexact-argmin residual of x for min alpha <g, x> + V[z](x)."""
    h = alpha * as_point(g) + setup.grad(x) - setup.grad(z)
    if setup.kind == "entropy" and isinstance(set, WholeSpace):
        return 0.0 if np.allclose(h, 0.0, atol=1e-12) else float("inf")
    return max(set.support_gap(h, x), 0.0)


def _softmax(s: np.ndarray) -> np.ndarray:
    s = s - s.max()
    e = np.exp(s)
    return e / e.sum()
