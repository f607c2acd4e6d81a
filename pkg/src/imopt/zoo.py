"""Concrete minimization and VI models: smooth, composite, superposition,
proximal, inexact linearization (min-min, saddle, Moreau), universal (Hoelder),
operator VI models and composite saddle models.

Also the two injection wrappers used to exercise the inexactness terms of the
solvers: :class:`ShiftedModel` (model error delta) and :class:`InexactProx`
(subproblem error delta_tilde).
"""
from __future__ import annotations

import itertools
import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InnerSolveFailure, InvalidArgument, UnsupportedCombination, UnsupportedSet
from .models import ModelOracle, VIModelOracle
from .prox import ProxSetup, linear_prox
from .sets import Box, FeasibleSet, Product, Simplex, WholeSpace, as_point


# ---------------------------------------------------------------- simple terms


class SimpleFunction:
    """Convex h with an exact Euclidean prox over the sets it supports."""

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, v, t, set: FeasibleSet) -> np.ndarray:
        """argmin over the set of t h(x) + 1/2 ||x - v||^2."""
        raise NotImplementedError

    def subgrad_toward(self, x, base, t) -> np.ndarray:
        """A subgradient s at x making |base + t s| small coordinatewise."""
        raise NotImplementedError

    def constant_on(self, set: FeasibleSet) -> bool:
        return False


class ZeroFunction(SimpleFunction):
    def value(self, x):
        return 0.0

    def prox(self, v, t, set):
        return set.project(v)

    def subgrad_toward(self, x, base, t):
        return np.zeros_like(as_point(x))

    def constant_on(self, set):
        return True


@dataclass
class L1Norm(SimpleFunction):
    lam: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArgument("lambda must be nonnegative")

    def value(self, x):
        return self.lam * float(np.abs(as_point(x)).sum())

    def prox(self, v, t, set):
        v = as_point(v)
        if isinstance(set, (Box, WholeSpace)):
            soft = np.sign(v) * np.maximum(np.abs(v) - t * self.lam, 0.0)
            return set.project(soft)
        if isinstance(set, Simplex):
            return set.project(v)
        raise UnsupportedCombination(f"l1 prox over {set!r}")

    def subgrad_toward(self, x, base, t):
        x = as_point(x)
        s = np.sign(x)
        zero = np.abs(x) <= 1e-15
        if t * self.lam > 0:
            s = np.where(zero, np.clip(-base / (t * self.lam), -1.0, 1.0), s)
        return self.lam * s

    def constant_on(self, set):
        return isinstance(set, Simplex) or self.lam == 0


@dataclass
class SquaredNorm(SimpleFunction):
    """h(x) = c/2 ||x||^2."""

    c: float = 1.0

    def value(self, x):
        x = as_point(x)
        return 0.5 * self.c * float(x @ x)

    def prox(self, v, t, set):
        # isotropic quadratic: projection of the unconstrained minimizer is exact
        return set.project(as_point(v) / (1.0 + t * self.c))

    def subgrad_toward(self, x, base, t):
        return self.c * as_point(x)


@dataclass
class LinearFunction(SimpleFunction):
    """h(x) = <c, x>."""

    c: np.ndarray

    def __post_init__(self):
        self.c = as_point(self.c)

    def value(self, x):
        return float(self.c @ as_point(x))

    def prox(self, v, t, set):
        return set.project(as_point(v) - t * self.c)

    def subgrad_toward(self, x, base, t):
        return self.c


def _as_simple(h) -> SimpleFunction:
    if h is None:
        return ZeroFunction()
    if isinstance(h, SimpleFunction):
        return h
    raise InvalidArgument(f"not a simple function: {h!r}")


def composite_prox(g, h: SimpleFunction, z, alpha, setup: ProxSetup, set: FeasibleSet):
    """argmin over the set of alpha (<g, x> + h(x)) + V[z](x)."""
    if h.constant_on(set) or isinstance(h, ZeroFunction):
        return linear_prox(g, z, alpha, setup, set)
    if setup.kind != "euclidean":
        raise UnsupportedCombination(f"{type(h).__name__} with the entropy setup")
    t = alpha * setup.radius ** 2
    return h.prox(as_point(z) - t * as_point(g), t, set)


def composite_residual(g, h: SimpleFunction, x, z, alpha, setup: ProxSetup, set: FeasibleSet):
    base = alpha * as_point(g) + setup.grad(x) - setup.grad(z)
    if not h.constant_on(set):
        base = base + alpha * h.subgrad_toward(x, base, alpha)
    return max(set.support_gap(base, x), 0.0)


# ---------------------------------------------------------------- minimization models


class SmoothModel(ModelOracle):
    """psi(x, y) = <grad f(y), x - y>; f_delta = f - shift."""

    linear = True

    def __init__(self, f, grad, L, delta: float = 0.0):
        if L is not None and L <= 0:
            raise InvalidArgument("L must be positive")
        if delta < 0:
            raise InvalidArgument("delta must be nonnegative")
        self._f = f
        self._grad = grad
        self.L = L
        self.delta = float(delta)

    def f_value(self, y):
        return float(self._f(as_point(y)))

    def f_delta(self, y):
        return self.f_value(y) - self.delta

    def grad(self, y):
        return as_point(self._grad(as_point(y))).copy()

    def psi(self, x, y):
        return float(self.grad(y) @ (as_point(x) - as_point(y)))

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        return linear_prox(self.grad(y), z, alpha, setup, set), 0.0


def make_smooth_model(f, grad, L, delta: float = 0.0) -> SmoothModel:
    """Gradient linearization of an L-smooth f. A positive ``delta`` lowers
    f_delta by delta, which makes it a (delta, L)-model with exactly that error."""
    return SmoothModel(f, grad, L, delta)


@dataclass
class CompositeProblem:
    """f = g + h with g smooth (value and gradient) and h simple."""

    g: Callable
    grad_g: Callable
    h: Optional[SimpleFunction] = None

    def value(self, x):
        return float(self.g(x)) + _as_simple(self.h).value(x)


class CompositeModel(ModelOracle):
    def __init__(self, p: CompositeProblem, L):
        if L <= 0:
            raise InvalidArgument("L must be positive")
        self.p = p
        self.h = _as_simple(p.h)
        self.L = L
        self.delta = 0.0

    def f_value(self, y):
        return self.p.value(as_point(y))

    def grad(self, y):
        return as_point(self.p.grad_g(as_point(y)))

    def psi(self, x, y):
        x, y = as_point(x), as_point(y)
        return float(self.grad(y) @ (x - y)) + self.h.value(x) - self.h.value(y)

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        return composite_prox(self.grad(y), self.h, z, alpha, setup, set), 0.0

    def residual_fn(self, y, z, alpha, setup, set):
        g = self.grad(y)
        return lambda x: composite_residual(g, self.h, x, z, alpha, setup, set)


def make_composite_model(p: CompositeProblem, L, setup: Optional[ProxSetup] = None) -> CompositeModel:
    h = _as_simple(p.h)
    if setup is not None and setup.kind == "entropy" and isinstance(h, L1Norm) and h.lam > 0:
        raise UnsupportedCombination("l1 composite term needs the Euclidean setup")
    return CompositeModel(p, L)


@dataclass
class SuperpositionProblem:
    """f(x) = max_k g_k(x) with each g_k convex and L_k-smooth."""

    funcs: Sequence[Callable]
    grads: Sequence[Callable]
    Ls: Sequence[float]

    def __post_init__(self):
        if not (len(self.funcs) == len(self.grads) == len(self.Ls)) or not self.funcs:
            raise InvalidArgument("need m >= 1 matching functions, gradients and constants")

    def value(self, x):
        return max(float(f(x)) for f in self.funcs)


class SuperpositionModel(ModelOracle):
    """psi(x, y) = max_k {g_k(y) + <grad g_k(y), x - y>} - f(y), L = sum L_k."""

    def __init__(self, p: SuperpositionProblem):
        self.p = p
        self.L = float(sum(p.Ls))
        self.delta = 0.0
        self.linear = len(p.funcs) == 1

    def f_value(self, y):
        return self.p.value(as_point(y))

    def _affine(self, y):
        y = as_point(y)
        B = np.array([as_point(g(y)) for g in self.p.grads])
        vals = np.array([float(f(y)) for f in self.p.funcs])
        return vals - B @ y, B  # piece k: beta_k + <b_k, x>

    def grad(self, y):
        return as_point(self.p.grads[0](as_point(y)))

    def psi(self, x, y):
        beta, B = self._affine(y)
        return float(np.max(beta + B @ as_point(x))) - self.f_value(y)

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        if self.linear:
            return linear_prox(self.grad(y), z, alpha, setup, set), 0.0
        if setup.kind != "euclidean" or not isinstance(set, WholeSpace):
            raise UnsupportedCombination("max-of-affine prox is exact only for Euclidean on the whole space")
        beta, B = self._affine(y)
        return _max_affine_prox(beta, B, as_point(z), alpha * setup.radius ** 2), 0.0


def _max_affine_prox(beta, B, z, c):
    """argmin_x c max_k(beta_k + <b_k, x>) + 1/2 ||x - z||^2 by active-set enumeration
    of the dual: x = z - c B^T lam with lam in the simplex."""
    m = len(beta)
    for size in range(1, m + 1):
        for S in itertools.combinations(range(m), size):
            S = list(S)
            BS = B[S]
            K = np.zeros((size + 1, size + 1))
            K[:size, :size] = c * BS @ BS.T
            K[:size, size] = 1.0
            K[size, :size] = 1.0
            rhs = np.concatenate([beta[S] + BS @ z, [1.0]])
            sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if not np.allclose(K @ sol, rhs, atol=1e-10 * (1 + np.abs(rhs).max())):
                continue
            lam, t = sol[:size], sol[size]
            if np.any(lam < -1e-12):
                continue
            x = z - c * BS.T @ lam
            vals = beta + B @ x
            if np.all(vals <= t + 1e-10 * (1 + abs(t))):
                return x
    raise InnerSolveFailure("max-of-affine prox: no consistent active set")


def make_superposition_model(p: SuperpositionProblem) -> SuperpositionModel:
    return SuperpositionModel(p)


class ProximalModel(ModelOracle):
    """psi(x, y) = f(x) - f(y); any L works. The prox is a Bregman proximal step."""

    def __init__(self, f, L_reg, inner_solver=None):
        if L_reg <= 0:
            raise InvalidArgument("L_reg must be positive")
        self.f = f
        self.L = float(L_reg)
        self.delta = 0.0
        self.inner_solver = inner_solver
        self._simple = isinstance(f, SimpleFunction)
        if not self._simple and inner_solver is None:
            raise InvalidArgument("a non-simple f needs an inner solver")

    def _fv(self, x):
        return self.f.value(x) if self._simple else float(self.f(x))

    def f_value(self, y):
        return self._fv(as_point(y))

    def psi(self, x, y):
        return self._fv(as_point(x)) - self._fv(as_point(y))

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        if self.inner_solver is not None:
            x, r = self.inner_solver(as_point(z), alpha, setup, set, delta_tilde)
            if r > delta_tilde + 1e-12:
                raise InnerSolveFailure(f"inner solver residual {r:g} above target {delta_tilde:g}")
            return x, r
        if isinstance(self.f, LinearFunction):
            return linear_prox(self.f.c, z, alpha, setup, set), 0.0
        return composite_prox(np.zeros(set.dim), self.f, z, alpha, setup, set), 0.0

    def residual_fn(self, y, z, alpha, setup, set):
        if not self._simple:
            raise NotImplementedError
        g = np.zeros(set.dim)
        return lambda x: composite_residual(g, self.f, x, z, alpha, setup, set)


def make_proximal_model(f, L_reg, inner_solver=None) -> ProximalModel:
    return ProximalModel(f, L_reg, inner_solver)


# ---------------------------------------------------------------- inexact linearization


def _projected_gradient(grad, z0, step, set: FeasibleSet, residual, tol, max_iter, counter=None):
    """Projected gradient until residual(z, grad(z)) <= tol."""
    z = set.project(as_point(z0))
    for _ in range(max_iter):
        g = grad(z)
        if counter is not None:
            counter[0] += 1
        if residual(z, g) <= tol:
            return z
        z = set.project(z - step * g)
    raise InnerSolveFailure(f"inner solve did not reach {tol:g} in {max_iter} steps")


class InnerProblem:
    """Inner problem of an inexact linearization model."""

    def approx(self, y, delta):
        """Return (surrogate gradient, f_delta(y))."""
        raise NotImplementedError

    def f_value(self, y) -> float:
        raise NotImplementedError

    def declared(self, delta):
        """(model delta, model L) for inner tolerance delta."""
        raise NotImplementedError


@dataclass
class MinMin(InnerProblem):
    """f(x) = min over z in Q_z of F(z, x), F jointly convex with L-Lipschitz gradient.

    ``argmin(y)`` may supply the exact inner solution; otherwise projected
    gradient with step 1/L_z is run until the stationarity residual over Q_z is
    at most the tolerance.
    """

    F: Callable
    grad_x: Callable
    grad_z: Callable
    inner_set: FeasibleSet
    L: float
    L_z: Optional[float] = None
    argmin: Optional[Callable] = None
    max_inner: int = 100000

    def __post_init__(self):
        self._warm = None

    def _solve(self, y, tol):
        if self.argmin is not None:
            return as_point(self.argmin(y))
        z0 = self._warm if self._warm is not None else self.inner_set.sample(np.random.default_rng(0), 1)[0]
        step = 1.0 / (self.L_z or self.L)
        z = _projected_gradient(
            lambda z: as_point(self.grad_z(z, y)),
            z0,
            step,
            self.inner_set,
            lambda z, g: self.inner_set.support_gap(g, z),
            max(tol, 1e-12),
            self.max_inner,
        )
        self._warm = z
        return z

    def approx(self, y, delta):
        z = self._solve(y, delta)
        return as_point(self.grad_x(z, y)), float(self.F(z, y)) - 2.0 * delta

    def f_value(self, y):
        z = self._solve(y, 0.0)
        return float(self.F(z, y))

    def declared(self, delta):
        return 6.0 * delta, 2.0 * self.L


@dataclass
class SaddleMax(InnerProblem):
    """f(x) = max over z in Q_z of <x, b - A z> - phi(z), with
    phi(z) = mu/2 ||z - c||^2 and Q_z a box or the whole space.

    A positive tolerance is realized by moving the exact maximizer along a fixed
    direction until the inner function gap equals the tolerance.
    """

    A: np.ndarray
    b: np.ndarray
    mu: float
    inner_set: FeasibleSet
    c: Optional[np.ndarray] = None

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = as_point(self.b)
        if self.mu <= 0:
            raise InvalidArgument("mu must be positive")
        if not isinstance(self.inner_set, (Box, WholeSpace)):
            raise UnsupportedSet("closed-form inner maximization needs a box or the whole space")
        if self.c is None:
            self.c = np.zeros(self.A.shape[1])
        self.Lf = float(np.linalg.norm(self.A, 2) ** 2 / self.mu)
        rng = np.random.default_rng(12345)
        d = rng.standard_normal(self.A.shape[1])
        self._dir = d / np.linalg.norm(d)

    def phi(self, z):
        d = z - self.c
        return 0.5 * self.mu * float(d @ d)

    def inner_value(self, y, z):
        return float(y @ (self.b - self.A @ z)) - self.phi(z)

    def exact(self, y):
        return self.inner_set.project(self.c - self.A.T @ y / self.mu)

    def _solve(self, y, delta):
        z = self.exact(y)
        if delta <= 0:
            return z
        best = self.inner_value(y, z)
        lo, hi = 0.0, math.sqrt(2.0 * delta / self.mu) * 4 + 1.0
        for _ in range(60):
            t = 0.5 * (lo + hi)
            if best - self.inner_value(y, self.inner_set.project(z + t * self._dir)) <= delta:
                lo = t
            else:
                hi = t
        return self.inner_set.project(z + lo * self._dir)

    def approx(self, y, delta):
        z = self._solve(as_point(y), delta)
        return self.b - self.A @ z, self.inner_value(y, z)

    def f_value(self, y):
        y = as_point(y)
        return self.inner_value(y, self.exact(y))

    def declared(self, delta):
        return delta, 2.0 * self.Lf


@dataclass
class Moreau(InnerProblem):
    """f_L(x) = min over z in Q of f(z) + L/2 ||z - x||^2.

    On a bounded Q the inner stop is the stationarity residual over Q, which
    makes the model an exact (delta, L)-model. On the whole space the stop is
    ||grad||^2 / (2 (mu_f + L)) <= delta. Inner gradient calls are counted in
    ``grad_evals``.
    """

    f: Callable
    grad_f: Callable
    L: float
    L_f: float
    mu_f: float = 0.0
    inner_set: Optional[FeasibleSet] = None
    argmin: Optional[Callable] = None
    max_inner: int = 1000000

    def __post_init__(self):
        if self.L <= 0:
            raise InvalidArgument("L must be positive")
        self.grad_evals = 0
        self._warm = None

    def _residual(self, z, g):
        if self.inner_set is None or isinstance(self.inner_set, WholeSpace):
            return float(g @ g) / (2.0 * (self.mu_f + self.L))
        return self.inner_set.support_gap(g, z)

    def solve(self, y, delta):
        y = as_point(y)
        if self.argmin is not None:
            return as_point(self.argmin(y))
        Q = self.inner_set or WholeSpace(y.size)
        z0 = self._warm if self._warm is not None else y
        counter = [0]
        z = _projected_gradient(
            lambda z: as_point(self.grad_f(z)) + self.L * (z - y),
            z0,
            1.0 / (self.L_f + self.L),
            Q,
            self._residual,
            max(delta, 1e-15),
            self.max_inner,
            counter,
        )
        self.grad_evals += counter[0]
        self._warm = z
        return z

    def envelope(self, y, z):
        d = z - y
        return float(self.f(z)) + 0.5 * self.L * float(d @ d)

    def approx(self, y, delta):
        y = as_point(y)
        z = self.solve(y, delta)
        return self.L * (y - z), self.envelope(y, z) - delta

    def f_value(self, y):
        y = as_point(y)
        return self.envelope(y, self.solve(y, 0.0))

    def declared(self, delta):
        return delta, self.L


class InexactLinearizationModel(ModelOracle):
    """psi(x, y) = <g~(y), x - y> with g~ produced by an inexact inner solve."""

    linear = True

    def __init__(self, inner: InnerProblem, delta_inner: float = 0.0):
        if delta_inner < 0:
            raise InvalidArgument("inner tolerance must be nonnegative")
        self.inner = inner
        self.delta_inner = float(delta_inner)
        self.delta, self.L = inner.declared(self.delta_inner)
        self._cache = OrderedDict()

    def _approx(self, y):
        y = as_point(y)
        key = y.tobytes()
        if key not in self._cache:
            self._cache[key] = self.inner.approx(y, self.delta_inner)
            if len(self._cache) > 8:
                self._cache.popitem(last=False)
        return self._cache[key]

    def f_value(self, y):
        return self.inner.f_value(y)

    def f_delta(self, y):
        return self._approx(y)[1]

    def grad(self, y):
        return self._approx(y)[0].copy()

    def psi(self, x, y):
        return float(self.grad(y) @ (as_point(x) - as_point(y)))

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        return linear_prox(self.grad(y), z, alpha, setup, set), 0.0


def make_inexact_linearization_model(inner: InnerProblem, delta_inner: float = 0.0):
    return InexactLinearizationModel(inner, delta_inner)


# ---------------------------------------------------------------- universal (Hoelder)


def holder_L(nu: float, L_nu: float, delta: float) -> float:
    """L(delta) = L_nu (L_nu / (2 delta))^((1 - nu) / (1 + nu))."""
    if not 0.0 <= nu <= 1.0:
        raise InvalidArgument("nu must lie in [0, 1]")
    if L_nu <= 0 or delta <= 0:
        raise InvalidArgument("L_nu and delta must be positive")
    return L_nu * (L_nu / (2.0 * delta)) ** ((1.0 - nu) / (1.0 + nu))


def holder_vi_L(nu: float, L_nu: float, delta: float) -> float:
    """L(delta) = (1 / (2 delta))^((1 - nu) / (1 + nu)) L_nu^(2 / (1 + nu))."""
    if not 0.0 <= nu <= 1.0:
        raise InvalidArgument("nu must lie in [0, 1]")
    if L_nu <= 0 or delta <= 0:
        raise InvalidArgument("L_nu and delta must be positive")
    return (1.0 / (2.0 * delta)) ** ((1.0 - nu) / (1.0 + nu)) * L_nu ** (2.0 / (1.0 + nu))


@dataclass
class HolderProblem:
    """f with a (sub)gradient satisfying ||g(x) - g(y)||_* <= L_nu ||x - y||^nu."""

    f: Callable
    grad: Callable
    nu: float
    L_nu: float

    def __post_init__(self):
        if not 0.0 <= self.nu <= 1.0 or self.L_nu <= 0:
            raise InvalidArgument("need nu in [0, 1] and L_nu > 0")


class UniversalModel(SmoothModel):
    """Gradient linearization of a Hoelder problem; L is the hint L(delta)."""

    def __init__(self, p: HolderProblem, delta_budget):
        self.problem = p
        delta = delta_budget() if callable(delta_budget) else float(delta_budget)
        if delta <= 0:
            raise InvalidArgument("delta budget must be positive")
        super().__init__(p.f, p.grad, holder_L(p.nu, p.L_nu, delta), 0.0)
        self.delta = delta  # tolerance the hint L was sized for; f_delta = f

    def f_delta(self, y):
        return self.f_value(y)

    def query_delta(self, y):
        return 0.0  # f_delta = f; the allowance comes from the solver's schedule

    def L_for(self, delta):
        return holder_L(self.problem.nu, self.problem.L_nu, delta)


def make_universal_model(p: HolderProblem, delta_budget) -> UniversalModel:
    return UniversalModel(p, delta_budget)


# ---------------------------------------------------------------- VI models


class OperatorVIModel(VIModelOracle):
    """psi(x, y) = <g(y), x - y> + h(x) - h(y)."""

    def __init__(self, g, L, delta: float = 0.0, h: Optional[SimpleFunction] = None, mu=None):
        if L <= 0:
            raise InvalidArgument("L must be positive")
        self.g = g
        self.L = float(L)
        self.delta = float(delta)
        self.h = _as_simple(h)
        self.mu = mu

    def operator(self, y):
        return as_point(self.g(as_point(y)))

    def psi(self, x, y):
        x, y = as_point(x), as_point(y)
        return float(self.operator(y) @ (x - y)) + self.h.value(x) - self.h.value(y)

    def prox(self, y, z, L, setup, set, delta_tilde=0.0):
        return composite_prox(self.operator(y), self.h, z, 1.0 / L, setup, set), 0.0

    def prox_residual(self, x, y, z, L, setup, set):
        return L * composite_residual(self.operator(y), self.h, x, z, 1.0 / L, setup, set)


def make_vi_operator_model(
    g,
    L: Optional[float] = None,
    nu: Optional[float] = None,
    L_nu: Optional[float] = None,
    delta: float = 0.0,
    composite_h: Optional[SimpleFunction] = None,
    mu: Optional[float] = None,
) -> OperatorVIModel:
    """Lipschitz operator (give L) or Hoelder operator (give nu, L_nu and delta > 0)."""
    if nu is not None:
        if L_nu is None or delta <= 0:
            raise InvalidArgument("a Hoelder operator needs L_nu and delta > 0")
        L = holder_vi_L(nu, L_nu, delta)
    if L is None:
        raise InvalidArgument("give L or (nu, L_nu, delta)")
    return OperatorVIModel(g, L, delta, composite_h, mu)


def matrix_game_operator(A):
    """g(u, v) = (A v, -A^T u) for min_u max_v u^T A v."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n1 = A.shape[0]

    def g(x):
        u, v = x[:n1], x[n1:]
        return np.concatenate([A @ v, -A.T @ u])

    return g


@dataclass
class SaddleFunction:
    """f(u, v) = f~(u, v) + h(u) - phi(v), f~ convex-concave with partial gradients."""

    n1: int
    f_tilde: Callable
    grad_u: Callable
    grad_v: Callable
    h: Optional[SimpleFunction] = None
    phi: Optional[SimpleFunction] = None
    A: Optional[np.ndarray] = None  # set for bilinear f~ = <A u, v>... stored as u^T A v

    def __post_init__(self):
        self.h = _as_simple(self.h)
        self.phi = _as_simple(self.phi)

    def split(self, x):
        x = as_point(x)
        return x[: self.n1], x[self.n1 :]

    def value(self, u, v):
        return float(self.f_tilde(u, v)) + self.h.value(u) - self.phi.value(v)


def bilinear_saddle(A, h=None, phi=None) -> SaddleFunction:
    """f(u, v) = u^T A v + h(u) - phi(v)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return SaddleFunction(
        n1=A.shape[0],
        f_tilde=lambda u, v: float(u @ A @ v),
        grad_u=lambda u, v: A @ v,
        grad_v=lambda u, v: A.T @ u,
        h=h,
        phi=phi,
        A=A,
    )


class CompositeSaddleVIModel(VIModelOracle):
    """psi(x, y) = <g~(y), x - y> + h(u_x) + phi(v_x) - h(u_y) - phi(v_y)."""

    def __init__(self, sf: SaddleFunction, L, delta: float = 0.0):
        if L <= 0:
            raise InvalidArgument("L must be positive")
        self.sf = sf
        self.L = float(L)
        self.delta = float(delta)

    def operator(self, y):
        u, v = self.sf.split(y)
        return np.concatenate([as_point(self.sf.grad_u(u, v)), -as_point(self.sf.grad_v(u, v))])

    def _simple(self, x):
        u, v = self.sf.split(x)
        return self.sf.h.value(u) + self.sf.phi.value(v)

    def psi(self, x, y):
        x, y = as_point(x), as_point(y)
        return float(self.operator(y) @ (x - y)) + self._simple(x) - self._simple(y)

    def eq33_residual(self, x, y):
        """f(u_y, v_x) - f(u_x, v_y) + psi(x, y); nonpositive by construction."""
        ux, vx = self.sf.split(x)
        uy, vy = self.sf.split(y)
        return self.sf.value(uy, vx) - self.sf.value(ux, vy) + self.psi(x, y)

    def prox(self, y, z, L, setup, set, delta_tilde=0.0):
        if not isinstance(set, Product) or len(set.sets) != 2:
            raise UnsupportedSet("saddle models live on a product of two sets")
        g = self.operator(y)
        gu, gv = set.split(g)
        zu, zv = set.split(z)
        alpha = 1.0 / L
        u = composite_prox(gu, self.sf.h, zu, alpha, setup, set.sets[0])
        v = composite_prox(gv, self.sf.phi, zv, alpha, setup, set.sets[1])
        return np.concatenate([u, v]), 0.0

    def prox_residual(self, x, y, z, L, setup, set):
        g = self.operator(y)
        parts = zip(set.split(g), (self.sf.h, self.sf.phi), set.split(x), set.split(z), set.sets)
        return L * sum(composite_residual(gb, hb, xb, zb, 1.0 / L, setup, sb) for gb, hb, xb, zb, sb in parts)


def make_composite_saddle_vi_model(sf: SaddleFunction, L, delta: float = 0.0) -> CompositeSaddleVIModel:
    return CompositeSaddleVIModel(sf, L, delta)


# ---------------------------------------------------------------- injection wrappers


class ShiftedModel(ModelOracle):
    """Wrap a model and lower f_delta by ``delta``: a (delta0 + delta, L)-model."""

    def __init__(self, base: ModelOracle, delta: float):
        if delta < 0:
            raise InvalidArgument("delta must be nonnegative")
        self.base = base
        self.shift = float(delta)
        self.delta = base.delta + self.shift
        self.L = base.L
        self.linear = base.linear

    def f_value(self, y):
        return self.base.f_value(y)

    def f_delta(self, y):
        return self.base.f_delta(y) - self.shift

    def psi(self, x, y):
        return self.base.psi(x, y)

    def grad(self, y):
        return self.base.grad(y)

    def query_delta(self, y):
        return self.base.query_delta(y) + self.shift

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        return self.base.prox(y, z, alpha, setup, set, delta_tilde)

    def residual_fn(self, y, z, alpha, setup, set):
        return self.base.residual_fn(y, z, alpha, setup, set)


class InexactProx(ModelOracle):
    """Return deliberately inexact prox points: the exact point is pushed toward
    a random vertex of the set until the inexact-argmin residual is close to
    (never above) the requested delta_tilde. Needs a set with an LMO."""

    def __init__(self, base: ModelOracle, seed: int = 0, fill: float = 1.0):
        self.base = base
        self.delta = base.delta
        self.L = base.L
        self.linear = base.linear
        self.fill = fill
        self._rng = np.random.default_rng(seed)

    def f_value(self, y):
        return self.base.f_value(y)

    def f_delta(self, y):
        return self.base.f_delta(y)

    def psi(self, x, y):
        return self.base.psi(x, y)

    def grad(self, y):
        return self.base.grad(y)

    def query_delta(self, y):
        return self.base.query_delta(y)

    def residual_fn(self, y, z, alpha, setup, set):
        return self.base.residual_fn(y, z, alpha, setup, set)

    def prox(self, y, z, alpha, setup, set, delta_tilde=0.0):
        x, r = self.base.prox(y, z, alpha, setup, set, 0.0)
        target = self.fill * delta_tilde
        if target <= 0:
            return x, r
        if not set.has_lmo:
            raise UnsupportedSet("inexact prox injection needs a set with an LMO")
        v = set.lmo(self._rng.standard_normal(set.dim))
        rf = self.base.residual_fn(y, z, alpha, setup, set)
        # second direction keeps zero coordinates at zero, where a nonsmooth
        # term would make the residual jump
        out, out_r = x, r
        for d in (v - x, np.where(x != 0.0, v - x, 0.0)):
            t, best, best_r = 1.0, 0.0, r
            for _ in range(10):
                rt = rf(x + t * d)
                if rt <= target:
                    if rt > best_r:
                        best, best_r = t, rt
                    if t >= 1.0 or rt >= 0.5 * target:
                        break
                    t = min(1.0, t * 0.9 * target / max(rt, 1e-300))
                else:
                    t *= 0.9 * target / rt
            if best_r > out_r:
                out, out_r = x + best * d, best_r
            if out_r >= 0.25 * target:
                break
        return out, out_r
