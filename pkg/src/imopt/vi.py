"""Generalized mirror prox for abstract VI models: adaptive, universal and
restarted variants, plus a saddle-point wrapper that reports the duality gap."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import GapOracleUnavailable, InvalidArgument, LineSearchDiverged, UnsupportedCombination
from .gm import MAX_DOUBLINGS, exit_test
from .models import VIModelOracle
from .prox import ProxSetup, max_bregman, prox_center
from .sets import Box, EuclideanBall, FeasibleSet, Product, WholeSpace, as_point
from .trace import Certificate, IterRecord, VIRun
from .zoo import (
    L1Norm,
    LinearFunction,
    SaddleFunction,
    SimpleFunction,
    SquaredNorm,
    ZeroFunction,
    holder_vi_L,
    make_composite_saddle_vi_model,
)


def mirror_prox_solve(
    model: VIModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    eps: Optional[float],
    delta: Optional[float] = None,
    L0: float = 1.0,
    max_iter: int = 10_000,
    delta_tilde: float = 0.0,
    V_max: Optional[float] = None,
    z0=None,
    S_target: Optional[float] = None,
    keep_iterates: bool = True,
    slack: float = 1e-12,
    callback: Optional[Callable] = None,
) -> VIRun:
    """Two prox steps per iteration,

        w_k     = argmin psi(., z_k) + L V[z_k](.)
        z_{k+1} = argmin psi(., w_k) + L V[z_k](.),

    with L doubled until psi(z', z) <= psi(z', w) + psi(w, z) + L (V[z](w) + V[w](z')) + delta.
    Output is the 1/L-weighted average of the w_k. The run stops once
    S_N = sum 1/L_{k+1} reaches V_max / eps (or ``S_target``).

    Certificate: max_u psi(w_hat, u) <= V_max / S_N + 2 delta + 2 dt, where dt is
    the largest prox residual met (exact proxes give 0).
    """
    if not L0 > 0:
        raise InvalidArgument("L0 must be positive")
    if max_iter < 1:
        raise InvalidArgument("max_iter must be >= 1")
    if eps is not None and not eps > 0:
        raise InvalidArgument("eps must be positive")
    delta = model.delta if delta is None else float(delta)
    z = prox_center(setup, set) if z0 is None else as_point(z0, set.dim).copy()
    if V_max is None:
        V_max = max_bregman(setup, z, set)
    if not V_max > 0:
        raise InvalidArgument("V_max must be positive")
    if S_target is None and eps is not None:
        S_target = V_max / eps
    L = float(L0)
    S = 0.0
    sum_w = np.zeros_like(z)
    dt_max = 0.0
    run = VIRun("mirror_prox")
    if keep_iterates:
        run.iterates_z.append(z.copy())
    for k in range(max_iter):
        i = 0
        while True:
            L_try = L * 2.0 ** (i - 1)
            w, r1 = model.prox(z, z, L_try, setup, set, delta_tilde)
            zn, r2 = model.prox(w, z, L_try, setup, set, delta_tilde)
            lhs = model.psi(zn, z)
            a, b = model.psi(zn, w), model.psi(w, z)
            rhs = a + b + L_try * (setup.bregman(z, w) + setup.bregman(w, zn)) + delta
            if exit_test(lhs, rhs, slack, lhs, a, b):
                break
            i += 1
            if i > MAX_DOUBLINGS:
                raise LineSearchDiverged(f"iteration {k}: L grew to {L_try:g} without passing the exit test")
        L = L_try
        S += 1.0 / L
        sum_w += w / L
        dt_max = max(dt_max, r1, r2)
        z = zn
        cert = V_max / S + 2.0 * delta + 2.0 * dt_max
        rec = IterRecord(k=k, L=L, alpha=1.0 / L, A=S, attempts=i + 1, delta=delta,
                         delta_tilde=max(r1, r2), residual=max(r1, r2), cert=cert)
        run.records.append(rec)
        if keep_iterates:
            run.iterates_w.append(w.copy())
            run.iterates_z.append(z.copy())
        if callback is not None:
            callback(rec, w, z, sum_w / S)
        if S_target is not None and S >= S_target:
            run.stop_reason = "S_target"
            break
    run.S = S
    run.w_hat = sum_w / S
    run.x_bar = run.w_hat
    run.x_last = z
    run.certificate = Certificate(r2_term=V_max / S, delta_term=2.0 * delta, delta_tilde_term=2.0 * dt_max)
    run.meta.update(V_max=V_max, L0=L0, eps=eps, delta=delta)
    return run


def mirror_prox_rate_bound(L: float, V_max: float, N: int, delta: float = 0.0, delta_tilde: float = 0.0) -> float:
    """2 L V_max / N + 2 delta + 2 dt (valid when every accepted L_{k+1} <= 2 L)."""
    return 2.0 * L * V_max / N + 2.0 * delta + 2.0 * delta_tilde


def key_inequality_excess(model: VIModelOracle, setup: ProxSetup, run: VIRun, u, delta_tilde: float = 0.0) -> np.ndarray:
    """Per iteration: -psi(u, w_k) - L (V[z_k](u) - V[z_{k+1}](u)) - delta - 2 dt.
    Nonpositive entries confirm the telescoping inequality at u."""
    if len(run.iterates_z) != run.N + 1:
        raise InvalidArgument("run was made without keep_iterates")
    u = as_point(u)
    delta = run.meta["delta"]
    out = []
    for rec, w, z, zn in zip(run.records, run.iterates_w, run.iterates_z, run.iterates_z[1:]):
        lhs = -model.psi(u, w)
        rhs = rec.L * (setup.bregman(z, u) - setup.bregman(zn, u)) + delta + 2.0 * delta_tilde
        out.append(lhs - rhs)
    return np.array(out)


def universal_mp_iteration_bound(eps: float, V_max: float, holder: Sequence[tuple[float, float]]) -> int:
    """ceil(2 inf_nu (2 L_nu / eps)^(2 / (1 + nu)) V_max) over the supplied (nu, L_nu) pairs."""
    best = min((2.0 * L_nu / eps) ** (2.0 / (1.0 + nu)) for nu, L_nu in holder)
    return math.ceil(2.0 * best * V_max)


def mirror_prox_universal_solve(
    model: VIModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    eps: float,
    L0: float = 1.0,
    max_iter: int = 10 ** 6,
    V_max: Optional[float] = None,
    holder: Optional[Sequence[tuple[float, float]]] = None,
) -> VIRun:
    """Mirror prox with the tolerance delta = eps / 2 in the exit test, so the
    backtracking settles on the effective constant L(eps / 2) for whatever
    Hoelder exponent the operator has."""
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    run = mirror_prox_solve(model, setup, set, eps, delta=eps / 2.0, L0=L0, max_iter=max_iter,
                            V_max=V_max, keep_iterates=False)
    run.solver = "mirror_prox_universal"
    if holder:
        run.meta["iteration_bound"] = universal_mp_iteration_bound(eps, run.meta["V_max"], holder)
        run.meta["L_eps"] = min(holder_vi_L(nu, L_nu, eps / 2.0) for nu, L_nu in holder)
    return run


def mp_restart_stages(R0_sq: float, eps: float) -> int:
    ratio = 2.0 * R0_sq / eps
    return math.ceil(math.log2(ratio)) if ratio > 1 else 0


def mp_restart_iteration_bound(L: float, Omega: float, mu: float, R0_sq: float, eps: float) -> int:
    ratio = 2.0 * R0_sq / eps
    if ratio <= 1:
        return 0
    return math.ceil(2.0 * L * Omega / mu * math.log2(ratio))


def mirror_prox_restart_solve(
    model: VIModelOracle,
    setup: ProxSetup,
    set: FeasibleSet,
    x0,
    R0_sq: float,
    eps: float,
    mu: Optional[float] = None,
    Omega: Optional[float] = None,
    L0: float = 1.0,
    max_inner: int = 10 ** 6,
    x_star=None,
) -> VIRun:
    """Restarted mirror prox for strongly monotone models. Stage p runs mirror prox
    with d_p(x) = d((x - x_p) / R_p) from z_0 = x_p until S >= Omega / mu and
    restarts from the weighted average. S counts 1 / L in unscaled units; the
    constants found under d_p are L R_p^2, so the inner target is Omega / (mu R_p^2). The squared distance bound follows
    R_{p+1}^2 = R_0^2 2^-(p+1) + (1 - 2^-p) eps / 2."""
    mu = model.mu if mu is None else mu
    Omega = setup.omega_bound(set.dim) if Omega is None else Omega
    if mu is None or not mu > 0:
        raise InvalidArgument("restarted mirror prox needs mu > 0")
    if Omega is None or not Omega > 0:
        raise InvalidArgument("restarted mirror prox needs Omega > 0")
    if not eps > 0 or not R0_sq > 0:
        raise InvalidArgument("eps and R0_sq must be positive")
    if setup.kind != "euclidean":
        raise UnsupportedCombination("stage rescaling is implemented for the Euclidean setup")
    P = mp_restart_stages(R0_sq, eps)
    x = as_point(x0, set.dim).copy()
    run = VIRun("mirror_prox_restart")
    R2 = R0_sq
    for p in range(P):
        stage_setup = setup.scaled(x, math.sqrt(R2))
        sub = mirror_prox_solve(model, stage_setup, set, None, delta=model.delta, L0=L0 * R2,
                                max_iter=max_inner, V_max=Omega / 2.0, z0=x,
                                S_target=Omega / (mu * R2), keep_iterates=False)
        for rec in sub.records:
            run.records.append(IterRecord(**{**rec.__dict__, "k": len(run.records)}))
        x = sub.w_hat
        R2 = R0_sq * 2.0 ** -(p + 1) + (1.0 - 2.0 ** -p) * eps / 2.0
        info = {"stage": p, "R2_next": R2, "iterations": sub.N, "S": sub.S * R2, "inner_eps": mu * eps / 2.0}
        if x_star is not None:
            diff = x - as_point(x_star)
            info["dist2"] = float(diff @ diff)
        run.stages.append(info)
    run.x_last = x
    run.x_bar = x
    run.w_hat = x
    run.stop_reason = "stages" if P else "no_stages"
    run.meta.update(stages=P, Omega=Omega, mu=mu, R0_sq=R0_sq, eps=eps)
    return run


# ---------------------------------------------------------------- saddle problems


def min_linear_plus(c, h: SimpleFunction, set: FeasibleSet) -> float:
    """min over the set of <c, x> + h(x), exact for the simple terms we ship."""
    c = as_point(c)
    if isinstance(h, (ZeroFunction,)) or h.constant_on(set):
        v = set.lmo(c)
        return float(c @ v) + h.value(v)
    if isinstance(h, LinearFunction):
        cc = c + as_point(h.c)
        return float(cc @ set.lmo(cc))
    if isinstance(h, L1Norm) and isinstance(set, Box):
        lo, hi = set.lower, set.upper
        zero = np.clip(0.0, lo, hi)
        cand = np.stack([lo, hi, zero])
        vals = c * cand + h.lam * np.abs(cand)
        return float(vals.min(axis=0).sum())
    if isinstance(h, SquaredNorm) and h.c > 0 and isinstance(set, (Box, EuclideanBall, WholeSpace)):
        # isotropic quadratic: projecting the unconstrained minimizer is exact
        x = set.project(-c / h.c)
        return float(c @ x) + h.value(x)
    raise GapOracleUnavailable(f"no exact best response for {type(h).__name__} on {set!r}")


def bilinear_duality_gap(sf: SaddleFunction, Q: Product, u, v) -> float:
    """max_v f(u, v) - min_u f(u, v) for f = u'Av + h(u) - phi(v)."""
    if sf.A is None:
        raise GapOracleUnavailable("best responses need a bilinear coupling or supplied inner solvers")
    u, v = as_point(u), as_point(v)
    Q1, Q2 = Q.sets
    best_v = -min_linear_plus(-(sf.A.T @ u), sf.phi, Q2)  # max_v <A'u, v> - phi(v)
    best_u = min_linear_plus(sf.A @ v, sf.h, Q1)
    return best_v + sf.h.value(u) - best_u + sf.phi.value(v)


def vertex_gap(model: VIModelOracle, w, vertices) -> float:
    """max over the given points u of psi(w, u)."""
    return max(model.psi(w, u) for u in vertices)


@dataclass
class SaddleResult:
    u_hat: np.ndarray
    v_hat: np.ndarray
    gap: float
    gaps: list
    bound: float
    run: VIRun


def saddle_solve(
    sf: SaddleFunction,
    Q: Product,
    setup: ProxSetup,
    eps: float,
    L: float,
    L0: float = 1.0,
    max_iter: int = 100_000,
    V_max: Optional[float] = None,
    best_response: Optional[Callable] = None,
    gap_every: int = 1,
) -> SaddleResult:
    """Mirror prox on the composite saddle model; reports (u_hat, v_hat), the
    duality gap series at logged iterations and the bound 2 L V_max / N + delta."""
    if not isinstance(Q, Product) or len(Q.sets) != 2:
        raise InvalidArgument("saddle problems live on a product of two sets")
    if sf.n1 != Q.sets[0].dim:
        raise InvalidArgument("u-dimension disagrees with the first set")
    if best_response is None:
        if sf.A is None:
            raise GapOracleUnavailable("non-bilinear saddle needs best_response(u, v) -> gap")
        best_response = lambda u, v: bilinear_duality_gap(sf, Q, u, v)  # noqa: E731
    model = make_composite_saddle_vi_model(sf, L)
    gaps = []

    def log_gap(rec, w, z, w_hat):
        if rec.k % gap_every == 0:
            u, v = sf.split(w_hat)
            gaps.append((rec.k + 1, best_response(u, v), rec.cert))

    run = mirror_prox_solve(model, setup, Q, eps, L0=L0, max_iter=max_iter, V_max=V_max,
                            keep_iterates=False, callback=log_gap)
    u, v = sf.split(run.w_hat)
    gap = best_response(u, v)
    run.meta["gaps"] = gaps
    bound = mirror_prox_rate_bound(L, run.meta["V_max"], run.N, model.delta)
    return SaddleResult(u.copy(), v.copy(), gap, gaps, bound, run)
