"""Adaptive gradient method with a (delta, L)-model, its constant-step strongly
convex variant and the restart scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument, LineSearchDiverged, NotOneStronglyConvex
from .models import ModelOracle, StrongConvexityTag
from .prox import InexactnessBudget, ProxSetup
from .sets import FeasibleSet, as_point
from .trace import Certificate, IterRecord, SolverRun

MAX_DOUBLINGS = 60


@dataclass
class GMConfig:
    L0: float = 1.0
    max_iter: int = 100
    budget: InexactnessBudget = field(default_factory=InexactnessBudget)
    target_eps: Optional[float] = None
    adaptive: bool = True
    track_f: bool = True
    keep_iterates: bool = False
    slack: float = 1e-12
    require_1sc: bool = False

    def __post_init__(self):
        if not self.L0 > 0:
            raise InvalidArgument("L0 must be positive")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be >= 1")


def exit_test(lhs, rhs, slack, *scale) -> bool:
    return lhs <= rhs + slack * (1.0 + sum(abs(s) for s in scale))


def gm_solve(
    model: ModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R2: float,
    cfg: Optional[GMConfig] = None,
    callback: Optional[Callable] = None,
) -> SolverRun:
    """Backtracking gradient method: L_{k+1} = 2^(i-1) L_k, alpha = 1 / L_{k+1},
    x_{k+1} = prox of alpha psi(., x_k) + V[x_k](.). Returns the alpha-weighted
    average with the a posteriori certificate

        R^2 / A_N + (1 / A_N) sum alpha dt_k + (2 / A_N) sum alpha delta_k.
    """
    cfg = cfg or GMConfig()
    if cfg.require_1sc and not setup.is_one_strongly_convex:
        raise NotOneStronglyConvex("the model is stated in a norm; the prox setup must be 1-strongly convex")
    budget = cfg.budget
    x = as_point(x0, set.dim).copy()
    L = float(cfg.L0)
    A = 0.0
    sum_ax = np.zeros_like(x)
    sum_ad = 0.0
    sum_r = 0.0
    run = SolverRun("gm")
    if cfg.keep_iterates:
        run.meta["iterates"] = [x.copy()]
    fx = model.f_delta(x)
    for k in range(cfg.max_iter):
        i = 0
        while True:
            L_try = L * 2.0 ** (i - 1) if cfg.adaptive else float(cfg.L0)
            alpha = 1.0 / L_try
            dk = model.query_delta(x) + budget.delta_at(k, alpha, A + alpha)
            xn, r = model.prox(x, x, alpha, setup, set, budget.delta_tilde / L_try)
            fn = model.f_delta(xn)
            rhs = fx + model.psi(xn, x) + L_try * setup.bregman(x, xn) + dk
            if not cfg.adaptive or exit_test(fn, rhs, cfg.slack, fx, fn):
                break
            i += 1
            if i > MAX_DOUBLINGS:
                raise LineSearchDiverged(f"iteration {k}: L grew to {L_try:g} without passing the exit test")
        L = L_try
        A += alpha
        sum_ax += alpha * xn
        sum_ad += alpha * dk
        sum_r += r  # alpha * (L r) with alpha L = 1
        x, fx = xn, fn
        x_bar = sum_ax / A
        cert = R2 / A + sum_r / A + 2.0 * sum_ad / A
        rec = IterRecord(
            k=k,
            L=L,
            alpha=alpha,
            A=A,
            attempts=i + 1,
            delta=dk,
            delta_tilde=L * r,
            residual=r,
            f_delta=fn,
            f=model.f_value(x_bar) if cfg.track_f else float("nan"),
            cert=cert,
        )
        run.records.append(rec)
        if cfg.keep_iterates:
            run.meta["iterates"].append(x.copy())
        if callback is not None:
            callback(rec, x, x_bar)
        if cfg.target_eps is not None and cert <= cfg.target_eps:
            run.stop_reason = "certificate"
            break
    run.x_last = x
    run.x_bar = sum_ax / A
    run.certificate = gm_certificate(run, R2)
    run.meta.update(L0=cfg.L0, R2=R2)
    return run


def gm_certificate(run: SolverRun, R2: float, L_declared: Optional[float] = None) -> Certificate:
    """Recompute the certificate from the trace; when L_declared is given also
    report whether A_N >= N / (2 L) holds (rate bound 2 L R^2 / N)."""
    A = run.A
    if A <= 0:
        raise InvalidArgument("empty run")
    alphas = run.column("alpha")
    c = Certificate(
        r2_term=R2 / A,
        delta_term=2.0 * float(alphas @ run.column("delta")) / A,
        delta_tilde_term=float(alphas @ run.column("delta_tilde")) / A,
    )
    if L_declared is not None:
        c.rate_bound = 2.0 * L_declared * R2 / run.N
        c.rate_bound_holds = A >= run.N / (2.0 * L_declared) * (1 - 1e-12)
    return c


def gm_attempt_bound(N: int, L: float, L0: float) -> float:
    return 2 * N + math.log2(L / L0) + 1


def gm_strongly_convex_solve(
    model: ModelOracle,
    tag: StrongConvexityTag,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    L_fixed: float,
    N: int,
    budget: Optional[InexactnessBudget] = None,
    V0: Optional[float] = None,
) -> SolverRun:
    """Constant step 1 / L with best-iterate tracking under right relative strong
    convexity. Per iteration the run stores the function-gap bound
    L V0 exp(-(k+1) mu / L) + delta + dt and the distance bound
    (delta + dt) / mu + (1 - mu / L)^(k+1) V0 (V0 = V[x0](x*) when supplied)."""
    if tag.kind != "right":
        raise InvalidArgument("the constant-step analysis needs right relative strong convexity")
    mu = tag.mu
    if mu > L_fixed:
        raise InvalidArgument("mu must not exceed L")
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    budget = budget or InexactnessBudget()
    alpha = 1.0 / L_fixed
    x = as_point(x0, set.dim)
    best, best_f = x.copy(), math.inf
    run = SolverRun("gm_strongly_convex")
    gap_bounds, dist_bounds, iterates = [], [], [x.copy()]
    d_max = 0.0
    for k in range(N):
        dk = model.query_delta(x) + budget.delta_at(k, alpha, (k + 1) * alpha)
        xn, r = model.prox(x, x, alpha, setup, set, budget.delta_tilde / L_fixed)
        d_max = max(d_max, dk + L_fixed * r)
        x = xn
        fx = model.f_value(x)
        if fx < best_f:
            best, best_f = x.copy(), fx
        iterates.append(x.copy())
        run.records.append(
            IterRecord(k=k, L=L_fixed, alpha=alpha, A=(k + 1) * alpha, attempts=1, delta=dk,
                       delta_tilde=L_fixed * r, residual=r, f=best_f)
        )
        if V0 is not None:
            gap_bounds.append(L_fixed * V0 * math.exp(-(k + 1) * mu / L_fixed) + d_max)
            dist_bounds.append(d_max / mu + (1 - mu / L_fixed) ** (k + 1) * V0)
            run.records[-1].cert = gap_bounds[-1]
    run.x_last = x
    run.x_bar = best
    run.meta.update(gap_bounds=gap_bounds, dist_bounds=dist_bounds, iterates=iterates, mu=mu)
    return run


def gm_restart_stages(R0_sq: float, eps: float, L: float, mu: float) -> tuple[int, int]:
    """(number of stages, iterations per stage) = (max(1, ceil log2(R^2/eps)), ceil(4 L / mu))."""
    stages = max(1, math.ceil(math.log2(R0_sq / eps))) if R0_sq > eps else 1
    return stages, math.ceil(4.0 * L / mu)


def gm_restart_solve(
    model: ModelOracle,
    tag: StrongConvexityTag,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R0_sq: float,
    eps: float,
    L: float,
    budget: Optional[InexactnessBudget] = None,
) -> SolverRun:
    """Restart the fixed-step gradient method; each stage halves the Bregman
    radius estimate. Guarantee: V[x](x*) <= eps + 2 dt / mu + 4 delta / mu."""
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    if tag.kind is None or tag.mu <= 0:
        raise InvalidArgument("restarts need mu > 0")
    mu = tag.mu
    budget = budget or InexactnessBudget()
    stages, n_stage = gm_restart_stages(R0_sq, eps, L, mu)
    x = as_point(x0, set.dim)
    R2 = R0_sq
    run = SolverRun("gm_restart")
    for p in range(stages):
        cfg = GMConfig(L0=L, max_iter=n_stage, budget=budget, adaptive=False, track_f=False)
        sub = gm_solve(model, setup, set, x, R2, cfg)
        for rec in sub.records:
            run.records.append(replace(rec, k=len(run.records)))
        x = sub.x_bar
        run.stages.append({"stage": p, "R2": R2, "iterations": sub.N, "x": x.copy()})
        R2 = R2 / 2.0
    run.x_last = x
    run.x_bar = x
    run.meta.update(
        stages=stages,
        stage_iterations=n_stage,
        V_bound=eps + 2.0 * budget.delta_tilde / mu + 4.0 * (budget.delta + model.delta) / mu,
    )
    return run
