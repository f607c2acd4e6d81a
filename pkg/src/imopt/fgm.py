"""Fast gradient method with a (delta, L)-model: adaptive, universal,
restarted and conditional-gradient (Frank-Wolfe) variants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional


from .errors import InvalidArgument, LineSearchDiverged, NotOneStronglyConvex, UnsupportedCombination, UnsupportedSet
from .gm import MAX_DOUBLINGS, exit_test
from .models import ModelOracle, StrongConvexityTag
from .prox import InexactnessBudget, ProxSetup
from .sets import FeasibleSet, as_point
from .trace import Certificate, IterRecord, SolverRun


@dataclass
class FGMConfig:
    L0: float = 1.0
    max_iter: int = 100
    budget: InexactnessBudget = field(default_factory=InexactnessBudget)
    adaptive: bool = True
    universal_eps: Optional[float] = None  # delta_k = eps alpha / (4 A) and stop at R^2/A <= eps/2
    fw_mode: bool = False
    R_Q2: Optional[float] = None  # bound on V over the set, FW mode
    target_eps: Optional[float] = None  # stop once the certificate is below this
    track_f: bool = True
    keep_iterates: bool = False
    slack: float = 1e-12

    def __post_init__(self):
        if not self.L0 > 0:
            raise InvalidArgument("L0 must be positive")
        if self.max_iter < 1:
            raise InvalidArgument("max_iter must be >= 1")
        if self.universal_eps is not None and not self.universal_eps > 0:
            raise InvalidArgument("universal eps must be positive")
        if self.fw_mode and (self.R_Q2 is None or self.R_Q2 <= 0):
            raise InvalidArgument("FW mode needs R_Q2 > 0")


def fgm_alpha(L: float, A: float) -> float:
    """Largest root of L alpha^2 = A + alpha."""
    return (1.0 + math.sqrt(1.0 + 4.0 * L * A)) / (2.0 * L)


def fgm_solve(
    model: ModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R2: float,
    cfg: Optional[FGMConfig] = None,
    callback: Optional[Callable] = None,
) -> SolverRun:
    """Accelerated method: y = (alpha u + A x) / A', u' = prox of alpha psi(., y)
    + V[u](.), x' = (alpha u' + A x) / A', exit test with L/2 ||x' - y'||^2.

    Certificate: R^2/A_N + 2 sum delta_k A_{k+1} / A_N + sum (dt_k / L_{k+1}) / A_N.
    """
    cfg = cfg or FGMConfig()
    if not setup.is_one_strongly_convex:
        raise NotOneStronglyConvex("the accelerated method needs a 1-strongly convex prox setup")
    if cfg.fw_mode:
        if not model.linear:
            raise UnsupportedCombination("FW mode needs a model with linear psi")
        if not set.has_lmo:
            raise UnsupportedSet("FW mode needs a set with a linear minimization oracle")
    budget = cfg.budget
    eps_u = cfg.universal_eps
    x = as_point(x0, set.dim).copy()
    u = x.copy()
    L = float(cfg.L0)
    A = 0.0
    sum_dA = 0.0
    sum_dt = 0.0
    run = SolverRun("fw" if cfg.fw_mode else ("fgm_universal" if eps_u else "fgm"))
    if cfg.keep_iterates:
        run.meta.update(iterates=[x.copy()], y=[], u=[u.copy()])
    for k in range(cfg.max_iter):
        i = 0
        while True:
            L_try = L * 2.0 ** (i - 1) if cfg.adaptive else float(cfg.L0)
            alpha = fgm_alpha(L_try, A)
            A_new = A + alpha
            y = (alpha * u + A * x) / A_new
            dk = model.query_delta(y) + budget.delta_at(k, alpha, A_new)
            if eps_u is not None:
                dk += eps_u * alpha / (4.0 * A_new)
            if cfg.fw_mode:
                un = set.lmo(model.grad(y))
                dt = 2.0 * L_try * cfg.R_Q2
                r = dt / L_try
            else:
                un, r = model.prox(y, u, alpha, setup, set, budget.delta_tilde / L_try)
                dt = L_try * r
            xn = (alpha * un + A * x) / A_new
            if not cfg.adaptive:
                break
            fy = model.f_delta(y)
            fn = model.f_delta(xn)
            rhs = fy + model.psi(xn, y) + 0.5 * L_try * setup.norm(xn - y) ** 2 + dk
            if exit_test(fn, rhs, cfg.slack, fy, fn):
                break
            i += 1
            if i > MAX_DOUBLINGS:
                raise LineSearchDiverged(f"iteration {k}: L grew to {L_try:g} without passing the exit test")
        L, A = L_try, A_new
        x, u = xn, un
        sum_dA += dk * A
        sum_dt += r
        cert = R2 / A + 2.0 * sum_dA / A + sum_dt / A
        rec = IterRecord(
            k=k, L=L, alpha=alpha, A=A, attempts=i + 1, delta=dk, delta_tilde=dt, residual=r,
            f=model.f_value(x) if cfg.track_f else float("nan"), cert=cert,
        )
        run.records.append(rec)
        if cfg.keep_iterates:
            run.meta["iterates"].append(x.copy())
            run.meta["y"].append(y.copy())
            run.meta["u"].append(u.copy())
        if callback is not None:
            callback(rec, x, y, u)
        if eps_u is not None and not cfg.fw_mode and R2 / A <= eps_u / 2.0:
            run.stop_reason = "universal"
            break
        if cfg.target_eps is not None and cert <= cfg.target_eps:
            run.stop_reason = "certificate"
            break
    run.x_last = x
    run.certificate = fgm_certificate(run, R2)
    run.meta.update(L0=cfg.L0, R2=R2)
    return run


def fgm_certificate(run: SolverRun, R2: float, L_declared: Optional[float] = None) -> Certificate:
    A = run.A
    if A <= 0:
        raise InvalidArgument("empty run")
    c = Certificate(
        r2_term=R2 / A,
        delta_term=2.0 * float(run.column("delta") @ run.column("A")) / A,
        delta_tilde_term=float((run.column("delta_tilde") / run.column("L")).sum()) / A,
    )
    if L_declared is not None:
        c.rate_bound = 8.0 * L_declared * R2 / (run.N + 1) ** 2
        c.rate_bound_holds = A >= (run.N + 1) ** 2 / (8.0 * L_declared) * (1 - 1e-12)
    return c


def fgm_attempt_bound(N: int, L: float, L0: float) -> float:
    return 4 * N + math.log2(L / L0) + 1


def fgm_universal_solve(
    model: ModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R2: float,
    eps: float,
    cfg: Optional[FGMConfig] = None,
) -> SolverRun:
    """Universal method: the per-step allowance delta_k = eps alpha / (4 A) is
    recomputed for every backtracking candidate; stops when R^2 / A <= eps / 2,
    which gives f(x_N) - f* <= eps."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    cfg = replace(cfg or FGMConfig(max_iter=10 ** 6), universal_eps=eps, fw_mode=False)
    return fgm_solve(model, setup, set, x0, R2, cfg)


def fw_solve(
    model: ModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    eps: float,
    R_Q2: float,
    cfg: Optional[FGMConfig] = None,
) -> SolverRun:
    """Universal conditional gradient: u_{k+1} = LMO(grad f(y_{k+1})). The implied
    subproblem error dt_k = 2 L_{k+1} R_Q^2 enters the certificate
    R_Q^2 / A + eps / 2 + sum 2 R_Q^2 / A; stops once it is <= eps."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    cfg = replace(cfg or FGMConfig(max_iter=10 ** 6), universal_eps=eps, fw_mode=True, R_Q2=R_Q2, target_eps=eps)
    return fgm_solve(model, setup, set, x0, R_Q2, cfg)


def fgm_restart_plan(mu: float, R2: float, eps: float, L: float) -> tuple[int, int]:
    """(stages p = ceil(log4(mu R^2 / eps)), stage length ceil(6 sqrt(L / mu)))."""
    ratio = mu * R2 / eps
    p = math.ceil(math.log(ratio, 4)) if ratio > 1 else 0
    return p, math.ceil(6.0 * math.sqrt(L / mu))


def fgm_restart_solve(
    model: ModelOracle,
    tag: StrongConvexityTag,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R2: float,
    eps: float,
    budget: Optional[InexactnessBudget] = None,
    L: Optional[float] = None,
    x_star=None,
) -> SolverRun:
    """Restarted non-adaptive FGM; each stage divides the squared distance bound
    by 4. With x_star the run records V[x_stage](x*) per stage."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    if tag.kind is None or tag.mu <= 0:
        raise InvalidArgument("restarts need mu > 0")
    L = model.L if L is None else L
    if L is None:
        raise InvalidArgument("restarted FGM needs L")
    mu = tag.mu
    budget = budget or InexactnessBudget()
    p, n_stage = fgm_restart_plan(mu, R2, eps, L)
    x = as_point(x0, set.dim).copy()
    run = SolverRun("fgm_restart")
    Rp = R2
    for s in range(p):
        cfg = FGMConfig(L0=L, max_iter=n_stage, budget=budget, adaptive=False, track_f=False)
        sub = fgm_solve(model, setup, set, x, Rp, cfg)
        for rec in sub.records:
            run.records.append(replace(rec, k=len(run.records)))
        x = sub.x_last
        info = {"stage": s, "R2": Rp, "iterations": sub.N}
        if x_star is not None:
            info["V"] = setup.bregman(x, as_point(x_star))
        run.stages.append(info)
        Rp = Rp / 4.0
    run.x_last = x
    run.meta.update(stages=p, stage_iterations=n_stage)
    if p == 0:
        run.stop_reason = "no_stages"
    return run
