"""Model interfaces for minimization and variational inequalities, plus
sampling validators that test an implementation against its defining inequalities."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgument
from .prox import ProxSetup, linear_prox, linear_prox_residual
from .sets import FeasibleSet, Simplex, Product

VALIDATION_TOL = 1e-10


class ModelOracle:
    """A (delta, L)-model of f:

        0 <= f(x) - f_delta(y) - psi(x, y) <= L V[y](x) + delta.

    Subclasses implement ``f_value``, ``f_delta``, ``psi`` and ``prox``.
    ``prox`` returns the point together with the achieved inexact-argmin
    residual for the subproblem alpha psi(., y) + V[z](.).
    """

    delta: float = 0.0
    L: Optional[float] = None
    linear: bool = False  # psi(x, y) = <grad(y), x - y>

    @property
    def declared_delta(self) -> float:
        return self.delta

    @property
    def declared_L_hint(self) -> Optional[float]:
        return self.L

    def f_value(self, y) -> float:
        raise NotImplementedError

    def f_delta(self, y) -> float:
        return self.f_value(y)

    def psi(self, x, y) -> float:
        raise NotImplementedError

    def grad(self, y) -> np.ndarray:
        """Linear part of psi at y; only for models with ``linear = True``."""
        raise NotImplementedError

    def query_delta(self, y) -> float:
        """The delta actually incurred at linearization point y."""
        return self.delta

    def prox(self, y, z, alpha, setup: ProxSetup, set: FeasibleSet, delta_tilde: float = 0.0):
        if not self.linear:
            raise NotImplementedError
        return linear_prox(self.grad(y), z, alpha, setup, set), 0.0

    def prox_step(self, y, z, alpha, setup: ProxSetup, set: FeasibleSet, delta_tilde: float = 0.0):
        return self.prox(y, z, alpha, setup, set, delta_tilde)[0]

    def prox_residual(self, x, y, z, alpha, setup: ProxSetup, set: FeasibleSet) -> float:
        """Inexact-argmin residual of x for min alpha psi(., y) + V[z](.)."""
        return self.residual_fn(y, z, alpha, setup, set)(x)

    def residual_fn(self, y, z, alpha, setup: ProxSetup, set: FeasibleSet):
        """x -> prox residual, with the y-dependent parts evaluated once."""
        if not self.linear:
            raise NotImplementedError
        g = self.grad(y)
        return lambda x: linear_prox_residual(g, x, z, alpha, setup, set)


class VIModelOracle:
    """Abstract VI model psi(x, y): convex in x, psi(x, x) = 0,
    psi(x, y) + psi(y, x) <= delta and generalized relative smoothness

        psi(x, y) <= psi(x, z) + psi(z, y) + L V[z](x) + L V[y](z) + delta.

    ``prox(y, z, L, ...)`` solves min psi(., y) + L V[z](.) and returns the point
    and its residual in that scale.
    """

    delta: float = 0.0
    L: Optional[float] = None
    mu: Optional[float] = None

    @property
    def declared_delta(self) -> float:
        return self.delta

    @property
    def declared_L_hint(self) -> Optional[float]:
        return self.L

    def psi(self, x, y) -> float:
        raise NotImplementedError

    def prox(self, y, z, L, setup: ProxSetup, set: FeasibleSet, delta_tilde: float = 0.0):
        raise NotImplementedError

    def prox_step(self, y, z, L, setup, set, delta_tilde: float = 0.0):
        return self.prox(y, z, L, setup, set, delta_tilde)[0]


@dataclass(frozen=True)
class StrongConvexityTag:
    """Strong convexity flavour: right relative, left relative or norm-based."""

    kind: Optional[str] = None
    mu: float = 0.0

    def __post_init__(self):
        if self.kind not in (None, "right", "left", "norm"):
            raise InvalidArgument(f"unknown strong convexity kind {self.kind!r}")
        if self.kind is not None and not self.mu > 0:
            raise InvalidArgument("mu must be positive")

    @classmethod
    def right(cls, mu):
        return cls("right", mu)

    @classmethod
    def left(cls, mu):
        return cls("left", mu)

    @classmethod
    def norm(cls, mu):
        return cls("norm", mu)


def right_relative_gap(f, setup: ProxSetup, mu: float, x, y, grad_y) -> float:
    """f(x) - f(y) - <grad f(y), x - y> - mu V[y](x); nonnegative under the right flavour."""
    return f(x) - f(y) - float(grad_y @ (x - y)) - mu * setup.bregman(y, x)


def left_relative_gap(f, setup: ProxSetup, mu: float, x, y, grad_y) -> float:
    """Same with V[x](y); nonnegative under the left flavour."""
    return f(x) - f(y) - float(grad_y @ (x - y)) - mu * setup.bregman(x, y)


@dataclass
class ValidationReport:
    n_samples: int
    violations: dict = field(default_factory=dict)  # check name -> max violation (0 if none)
    counts: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c == 0 for c in self.counts.values())

    def record(self, name: str, excess: float, tol: float = VALIDATION_TOL):
        self.violations.setdefault(name, 0.0)
        self.counts.setdefault(name, 0)
        if excess > tol:
            self.counts[name] += 1
            self.violations[name] = max(self.violations[name], excess)

    @property
    def max_lower_violation(self) -> float:
        return self.violations.get("lower", 0.0)

    @property
    def max_upper_violation(self) -> float:
        return self.violations.get("upper", 0.0)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = [f"{k}={self.counts[k]}/{self.violations[k]:.3g}" for k in sorted(self.counts)]
        return f"{status} n={self.n_samples} " + " ".join(parts)


def _pairs(set: FeasibleSet, rng, n):
    xs = set.sample(rng, n)
    ys = set.sample(rng, n)
    return xs, ys


def validate_min_model(
    model: ModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    n_samples: int = 1000,
    rng_seed: int = 0,
    L: Optional[float] = None,
    delta: Optional[float] = None,
    tol: float = VALIDATION_TOL,
) -> ValidationReport:
    """Sample pairs and check psi(x,x)=0, midpoint convexity of psi(., y) and
    the two-sided model sandwich with the declared (or given) L, delta."""
    if n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    L = model.L if L is None else L
    delta = model.delta if delta is None else delta
    if L is None:
        raise InvalidArgument("the model declares no L; pass one explicitly")
    rng = np.random.default_rng(rng_seed)
    xs, ys = _pairs(set, rng, n_samples)
    ws = set.sample(rng, n_samples)
    rep = ValidationReport(n_samples)
    for x, y, w in zip(xs, ys, ws):
        fx = model.f_value(x)
        fy = model.f_delta(y)
        p = model.psi(x, y)
        gap = fx - fy - p
        scale = 1.0 + abs(fx) + abs(fy)
        rep.record("lower", -gap, tol * scale)
        rep.record("upper", gap - L * setup.bregman(y, x) - delta, tol * scale)
        rep.record("psi_diag", abs(model.psi(y, y)), 1e-12 * scale)
        mid = 0.5 * (x + w)
        rep.record("convexity", model.psi(mid, y) - 0.5 * (p + model.psi(w, y)), tol * scale)
    return rep


def validate_vi_model(
    model: VIModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    n_samples: int = 1000,
    rng_seed: int = 0,
    L: Optional[float] = None,
    delta: Optional[float] = None,
    tol: float = VALIDATION_TOL,
) -> ValidationReport:
    """Sample triples and check properties (i)-(iv) of an abstract VI model."""
    if n_samples < 1:
        raise InvalidArgument("n_samples must be >= 1")
    L = model.L if L is None else L
    delta = model.delta if delta is None else delta
    if L is None:
        raise InvalidArgument("the model declares no L; pass one explicitly")
    rng = np.random.default_rng(rng_seed)
    xs, ys = _pairs(set, rng, n_samples)
    zs = set.sample(rng, n_samples)
    rep = ValidationReport(n_samples)
    for x, y, z in zip(xs, ys, zs):
        pxy = model.psi(x, y)
        pyx = model.psi(y, x)
        scale = 1.0 + abs(pxy) + abs(pyx)
        rep.record("psi_diag", abs(model.psi(x, x)), 1e-12 * scale)
        mid = 0.5 * (x + z)
        rep.record("convexity", model.psi(mid, y) - 0.5 * (pxy + model.psi(z, y)), tol * scale)
        rep.record("monotonicity", pxy + pyx - delta, tol * scale)
        rhs = model.psi(x, z) + model.psi(z, y) + L * setup.bregman(z, x) + L * setup.bregman(y, z) + delta
        rep.record("smoothness", pxy - rhs, tol * (scale + abs(rhs)))
    return rep


class MinModelAsVI(VIModelOracle):
    """View a minimization model as an abstract VI model psi(x, y)."""

    def __init__(self, model: ModelOracle, delta: Optional[float] = None):
        self.model = model
        self.L = model.L
        self.delta = model.delta if delta is None else delta

    def psi(self, x, y):
        return self.model.psi(x, y)

    def prox(self, y, z, L, setup, set, delta_tilde=0.0):
        x, r = self.model.prox(y, z, 1.0 / L, setup, set, delta_tilde / L)
        return x, L * r


def check_min_model_is_vi_model(
    model: ModelOracle,
    setup: Optional[ProxSetup] = None,
    set: Optional[FeasibleSet] = None,
    n_samples: int = 1000,
    rng_seed: int = 0,
) -> bool:
    """Numerically confirm that a (delta, L)-model passes the VI-model checks
    with budget 5 delta."""
    if setup is None or set is None:
        raise InvalidArgument("setup and set are required to sample points")
    vi = MinModelAsVI(model, delta=5.0 * model.delta)
    return validate_vi_model(vi, setup, set, n_samples, rng_seed).passed


def is_simplex_like(set: FeasibleSet) -> bool:
    return isinstance(set, Simplex) or (
        isinstance(set, Product) and all(isinstance(s, Simplex) for s in set.sets)
    )
