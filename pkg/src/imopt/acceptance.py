"""Desk-scale acceptance checks. Each check returns a CheckResult; the CLI
``selftest`` and the test suite both call these."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fgm import FGMConfig, fgm_restart_plan, fgm_restart_solve, fgm_solve, fgm_universal_solve, fw_solve
from .gm import GMConfig, gm_restart_solve, gm_solve
from .models import StrongConvexityTag, check_min_model_is_vi_model, validate_min_model, validate_vi_model
from .ot import exact_ot_oracle, proximal_sinkhorn, random_instance
from .problems import certificate_suite, quadratic_box, quadratic_simplex, quadratic_whole, random_spd
from .prox import ENTROPY, EUCLIDEAN, InexactnessBudget
from .sets import Box, EuclideanBall, ProductOfSimplices, WholeSpace
from .vi import (
    key_inequality_excess,
    mirror_prox_restart_solve,
    mirror_prox_solve,
    mirror_prox_universal_solve,
    mp_restart_iteration_bound,
    saddle_solve,
)
from .zoo import (
    CompositeProblem,
    HolderProblem,
    InexactProx,
    L1Norm,
    MinMin,
    Moreau,
    SaddleMax,
    ShiftedModel,
    SquaredNorm,
    SuperpositionProblem,
    bilinear_saddle,
    holder_vi_L,
    make_composite_model,
    make_composite_saddle_vi_model,
    make_inexact_linearization_model,
    make_proximal_model,
    make_smooth_model,
    make_superposition_model,
    make_universal_model,
    make_vi_operator_model,
    matrix_game_operator,
)

TOL = 1e-9


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    seconds: float
    limit: float | None
    details: dict = field(default_factory=dict)
    asserted: bool = True

    @property
    def within_time(self) -> bool:
        return self.limit is None or self.seconds < self.limit

    @property
    def ok(self) -> bool:
        return (self.passed or not self.asserted) and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        if not self.asserted:
            status += " (reported)"
        lim = f"<{self.limit:g}s" if self.limit else "no limit"
        info = " ".join(f"{k}={_short(v)}" for k, v in self.details.items())
        return f"[{status}] {self.number:2d} {self.title} ({self.seconds:.2f}s, {lim}) {info}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _timed(number, title, limit, fn, asserted=True) -> CheckResult:
    t0 = time.perf_counter()
    passed, details = fn()
    return CheckResult(number, title, bool(passed), time.perf_counter() - t0, limit, details, asserted)


# ---------------------------------------------------------------- 1, 2: certificates


def _suite_variants():
    for p in certificate_suite(20, seed=0, n_max=50):
        for d in (0.0, 1e-3):
            for dt in (0.0, 1e-3):
                if dt and isinstance(p.set, WholeSpace):
                    continue  # no inexact points exist on R^n: stationarity there is exact
                m = p.model()
                if d:
                    m = ShiftedModel(m, d)
                if dt:
                    m = InexactProx(m, seed=1)
                yield p, m, d, dt


def check_gm_certificate():
    worst_gap, worst_A, worst_att, runs = -math.inf, -math.inf, -math.inf, 0
    for p, m, d, dt in _suite_variants():
        L = p.L_model
        L0 = L / 4.0
        run = gm_solve(m, p.setup, p.set, p.x0, p.R2, GMConfig(L0=L0, max_iter=100, budget=InexactnessBudget(delta_tilde=dt)))
        N = np.arange(1, run.N + 1)
        worst_gap = max(worst_gap, float(np.max(run.column("f") - p.f_star - run.column("cert"))))
        worst_A = max(worst_A, float(np.max(N / (2 * L) - run.column("A"))))
        att = np.cumsum(run.column("attempts"))
        worst_att = max(worst_att, float(np.max(att - (2 * N + math.log2(L / L0) + 1))))
        runs += 1
    ok = worst_gap <= TOL and worst_A <= 1e-12 and worst_att <= 0
    return ok, {"runs": runs, "max(gap-cert)": worst_gap, "max(N/2L-A)": worst_A, "max(att-bound)": worst_att}


def check_fgm_certificate():
    worst_gap, worst_rate, worst_A, worst_att, runs = -math.inf, -math.inf, -math.inf, -math.inf, 0
    for p, m, d, dt in _suite_variants():
        L = p.L_model
        L0 = L / 4.0
        run = fgm_solve(m, p.setup, p.set, p.x0, p.R2, FGMConfig(L0=L0, max_iter=100, budget=InexactnessBudget(delta_tilde=dt)))
        N = np.arange(1, run.N + 1)
        A = run.column("A")
        gap = run.column("f") - p.f_star
        cert = run.column("cert")
        errors = cert - p.R2 / A
        worst_gap = max(worst_gap, float(np.max(gap - cert)))
        worst_rate = max(worst_rate, float(np.max(gap - (8 * L * p.R2 / (N + 1) ** 2 + errors))))
        worst_A = max(worst_A, float(np.max((N + 1) ** 2 / (8 * L) - A)))
        att = np.cumsum(run.column("attempts"))
        worst_att = max(worst_att, float(np.max(att - (4 * N + math.log2(L / L0) + 1))))
        runs += 1
    ok = worst_gap <= TOL and worst_rate <= TOL and worst_A <= 1e-12 and worst_att <= 0
    return ok, {"runs": runs, "max(gap-cert)": worst_gap, "max(gap-rate)": worst_rate,
                "max((N+1)^2/8L-A)": worst_A, "max(att-bound)": worst_att}


# ---------------------------------------------------------------- 3: rate separation


class _Reached(Exception):
    pass


def iterations_to_gap(solver, cfg_cls, p, target, max_iter=500_000) -> int | None:
    hit = {}

    def cb(rec, x, *rest):
        if p.f(x) - p.f_star <= target:
            hit["k"] = rec.k + 1
            raise _Reached

    try:
        solver(p.model(), p.setup, p.set, p.x0, p.R2, cfg_cls(L0=1.0, max_iter=max_iter, track_f=False), callback=cb)
    except _Reached:
        pass
    return hit.get("k")


def check_rate_separation():
    p = quadratic_whole(50, seed=7, cond=1e4)
    n_gm = iterations_to_gap(gm_solve, GMConfig, p, 1e-6)
    n_fgm = iterations_to_gap(fgm_solve, FGMConfig, p, 1e-6)
    ok = n_gm is not None and n_fgm is not None and 5 * n_fgm <= n_gm
    return ok, {"gm_iters": n_gm, "fgm_iters": n_fgm, "ratio": (n_gm / n_fgm) if n_gm and n_fgm else float("nan")}


# ---------------------------------------------------------------- 4, 6: universal scaling


EPS_GRID = (1e-1, 1e-2, 1e-3)


def scaling_ratios(counts, eps_grid, exponent):
    """observed N(eps_{i+1}) / N(eps_i) divided by the predicted (eps_i / eps_{i+1})^exponent."""
    return [(counts[i + 1] / counts[i]) / (eps_grid[i] / eps_grid[i + 1]) ** exponent for i in range(len(counts) - 1)]


def universal_fgm_problems():
    rng = np.random.default_rng(0)
    n = 10
    a = rng.uniform(-0.5, 0.5, n)
    c = 0.1
    l1 = HolderProblem(lambda x: c * float(np.abs(x - a).sum()), lambda x: c * np.sign(x - a), 0.0, 2 * c * math.sqrt(n))
    M = random_spd(n, rng, 100.0, 1.0)
    quad = HolderProblem(lambda x: 0.5 * float((x - a) @ M @ (x - a)), lambda x: M @ (x - a), 1.0, 1.0)
    x0 = np.zeros(n)
    x0[0] = 1.0
    return {0.0: l1, 1.0: quad}, a, x0


def check_universal_fgm():
    probs, a, x0 = universal_fgm_problems()
    R2 = 0.5 * float((x0 - a) @ (x0 - a))
    details, ok = {}, True
    for nu, p in probs.items():
        counts = []
        for eps in EPS_GRID:
            run = fgm_universal_solve(make_universal_model(p, eps), EUCLIDEAN, WholeSpace(a.size), x0, R2, eps)
            counts.append(run.N)
            ok &= p.f(run.x_last) - p.f(a) <= eps + TOL
        ratios = scaling_ratios(counts, EPS_GRID, 2.0 / (1.0 + 3.0 * nu))
        ok &= all(0.25 <= r <= 4.0 for r in ratios)
        details[f"nu{nu:g}_iters"] = counts
        details[f"nu{nu:g}_ratio/pred"] = [round(r, 3) for r in ratios]
    return ok, details


def universal_mp_operators():
    rng = np.random.default_rng(1)
    n = 5
    K = rng.standard_normal((n, n))
    K = K - K.T
    a1 = rng.uniform(-0.3, 0.3, n)
    smooth = (lambda x: K @ (x - a1), 1.0, float(np.linalg.norm(K, 2)))
    a0 = np.array([0.3, -0.2])
    c = 0.2
    jump = (lambda x: c * (x - a0) / max(float(np.linalg.norm(x - a0)), 1e-300), 0.0, 2 * c)
    return {1.0: (smooth, n), 0.0: (jump, 2)}


def check_universal_mp():
    details, ok = {}, True
    for nu, ((g, nu_, L_nu), n) in universal_mp_operators().items():
        counts = []
        for eps in EPS_GRID:
            m = make_vi_operator_model(g, L=1.0)
            run = mirror_prox_universal_solve(m, EUCLIDEAN, EuclideanBall(np.zeros(n), 1.0), eps, holder=[(nu_, L_nu)])
            counts.append(run.N)
        ratios = scaling_ratios(counts, EPS_GRID, 2.0 / (1.0 + nu))
        ok &= all(0.25 <= r <= 4.0 for r in ratios)
        details[f"nu{nu:g}_iters"] = counts
        details[f"nu{nu:g}_ratio/pred"] = [round(r, 3) for r in ratios]
    return ok, details


# ---------------------------------------------------------------- 5: mirror prox on games


def game_suite():
    yield "pennies", np.array([[1.0, -1.0], [-1.0, 1.0]])
    rng = np.random.default_rng(5)
    for s in range(3):
        yield f"random5x5_{s}", rng.uniform(-1.0, 1.0, (5, 5))


def check_mirror_prox_games():
    worst_bound, worst_key, details, ok = -math.inf, -math.inf, {}, True
    for name, A in game_suite():
        L = float(np.abs(A).max())
        Q = ProductOfSimplices(*A.shape)
        res = saddle_solve(bilinear_saddle(A), Q, ENTROPY, 1e-3, L=L)
        V_max = res.run.meta["V_max"]
        for k, gap, cert in res.gaps:
            worst_bound = max(worst_bound, gap - min(cert, 2 * L * V_max / k))
        limit = math.ceil(2 * L * V_max / 1e-3)
        first = next((k for k, gap, _ in res.gaps if gap <= 1e-3), None)
        ok &= first is not None and first <= limit
        details[name] = f"{first}/{limit}"
        # telescoping inequality at every vertex of the product and at its centre
        model = make_composite_saddle_vi_model(bilinear_saddle(A), L)
        run = mirror_prox_solve(model, ENTROPY, Q, 1e-3, max_iter=400)
        for u in list(Q.vertices()) + [np.concatenate([s.center() for s in Q.sets])]:
            worst_key = max(worst_key, float(key_inequality_excess(model, ENTROPY, run, u).max()))
    ok &= worst_bound <= TOL and worst_key <= TOL
    details.update({"max(gap-bound)": worst_bound, "max(key ineq)": worst_key})
    return ok, details


# ---------------------------------------------------------------- 7: restarts


def check_restarts():
    details, ok = {}, True
    eps = 1e-6
    worst_V = -math.inf
    for p in (quadratic_whole(20, 1, cond=20), quadratic_box(20, 2, cond=20)):
        for d, dt in ((0.0, 0.0), (1e-4, 0.0), (0.0, 1e-4), (1e-4, 1e-4)):
            if dt and isinstance(p.set, WholeSpace):
                continue
            m = p.model()
            if d:
                m = ShiftedModel(m, d)
            if dt:
                m = InexactProx(m, seed=3)
            run = gm_restart_solve(m, StrongConvexityTag.right(p.mu), p.setup, p.set, p.x0, p.R2, eps, p.L,
                                   InexactnessBudget(delta_tilde=dt))
            expected = math.ceil(math.log2(p.R2 / eps)) * math.ceil(4 * p.L / p.mu)
            ok &= run.N == expected
            V = p.setup.bregman(run.x_last, p.x_star)
            worst_V = max(worst_V, V - run.meta["V_bound"])
        eps_f = 1e-8
        run = fgm_restart_solve(p.model(), StrongConvexityTag.norm(p.mu), p.setup, p.set, p.x0, p.R2, eps_f)
        stages, n_stage = fgm_restart_plan(p.mu, p.R2, eps_f, p.L)
        ok &= run.N == stages * n_stage and p.f(run.x_last) - p.f_star <= eps_f
        details[f"fgm_{p.name}"] = f"{run.N}={stages}x{n_stage}"
    ok &= worst_V <= 0
    details["max(V-bound) gm"] = worst_V
    worst_it, worst_d = -math.inf, -math.inf
    n = 5
    for seed in range(5):
        rng = np.random.default_rng(seed)
        K = rng.standard_normal((n, n))
        M = np.eye(n) + K - K.T
        L = float(np.linalg.norm(M, 2))
        a = rng.uniform(-0.4, 0.4, n)
        B = EuclideanBall(np.zeros(n), 1.0)
        model = make_vi_operator_model(lambda x, M=M, a=a: M @ (x - a), L=L, mu=1.0)
        x0 = B.project(rng.standard_normal(n))
        R0 = float((x0 - a) @ (x0 - a))
        for eps_v in (1e-3, 1e-6):
            run = mirror_prox_restart_solve(model, EUCLIDEAN, B, x0, R0, eps_v, x_star=a)
            worst_it = max(worst_it, run.N - mp_restart_iteration_bound(L, 1.0, 1.0, R0, eps_v))
            worst_d = max(worst_d, float((run.x_last - a) @ (run.x_last - a)) - eps_v)
            for s in run.stages:
                worst_d = max(worst_d, s["dist2"] - s["R2_next"])
    ok &= worst_it <= 0 and worst_d <= 0
    details.update({"max(N-bound) mp": worst_it, "max(dist2-target) mp": worst_d})
    return ok, details


# ---------------------------------------------------------------- 8: model validation


def zoo_cases():
    """(name, model, setup, set) for every model constructor with declared constants."""
    rng = np.random.default_rng(8)
    n = 6
    A = random_spd(n, rng, 10.0, 2.0)
    b = rng.standard_normal(n)
    L = float(np.linalg.eigvalsh(A)[-1])
    box = Box(-1.0, 1.0, n)
    f = lambda x: 0.5 * float(x @ A @ x) - float(b @ x)  # noqa: E731
    g = lambda x: A @ x - b  # noqa: E731
    out = [
        ("smooth", make_smooth_model(f, g, L), EUCLIDEAN, box),
        ("smooth_delta", make_smooth_model(f, g, L, 1e-3), EUCLIDEAN, box),
        ("composite_l1", make_composite_model(CompositeProblem(f, g, L1Norm(0.3)), L), EUCLIDEAN, box),
    ]
    ps = quadratic_simplex(n, 3)
    out.append(("smooth_entropy", ps.model(), ENTROPY, ps.set))
    B2 = random_spd(n, rng, 5.0, 1.0)
    L2 = float(np.linalg.eigvalsh(B2)[-1])
    sup = SuperpositionProblem(
        [f, lambda x: 0.5 * float(x @ B2 @ x) + float(b @ x)],
        [g, lambda x: B2 @ x + b],
        [L, L2],
    )
    out.append(("superposition", make_superposition_model(sup), EUCLIDEAN, box))
    out.append(("proximal", make_proximal_model(SquaredNorm(2.0), 1.0), EUCLIDEAN, box))
    out.append(("proximal_l1", make_proximal_model(L1Norm(1.0), 0.5), EUCLIDEAN, box))
    # inexact linearizations
    m = 3
    J = random_spd(n + m, rng, 10.0, 2.0)  # jointly convex F(z, x)
    Ax, G, H = J[:n, :n], J[n:, :n], J[n:, n:]
    F = lambda z, x: 0.5 * float(x @ Ax @ x) + float(z @ G @ x) + 0.5 * float(z @ H @ z)  # noqa: E731
    LF = float(np.linalg.eigvalsh(J)[-1])
    minmin = MinMin(F, lambda z, x: Ax @ x + G.T @ z, lambda z, x: G @ x + H @ z, Box(-0.5, 0.5, m), LF,
                    L_z=float(np.linalg.eigvalsh(H)[-1]))
    out.append(("minmin", make_inexact_linearization_model(minmin, 1e-4), EUCLIDEAN, box))
    sm = SaddleMax(rng.standard_normal((n, 4)), rng.standard_normal(n), 1.5, Box(-1.0, 1.0, 4))
    out.append(("saddle_max", make_inexact_linearization_model(sm, 1e-3), EUCLIDEAN, box))
    out.append(("saddle_max_exact", make_inexact_linearization_model(sm, 0.0), EUCLIDEAN, box))
    mo = Moreau(f, g, L=1.0, L_f=L, inner_set=box)
    out.append(("moreau", make_inexact_linearization_model(mo, 1e-4), EUCLIDEAN, box))
    for nu, Lnu, fun, grad in _holder_functions(n):
        for delta in (1e-1, 1e-3):
            out.append((f"universal_nu{nu:g}_d{delta:g}", make_universal_model(HolderProblem(fun, grad, nu, Lnu), delta),
                        EUCLIDEAN, box))
    return out


def _holder_functions(n):
    """(nu, L_nu, f, grad) with known Hoelder constants of the gradient in l2."""
    a = np.linspace(-0.5, 0.5, n)
    yield 0.0, 2.0, (lambda x: float(np.linalg.norm(x - a))), (lambda x: (x - a) / max(float(np.linalg.norm(x - a)), 1e-300))
    # f = sum (2/3)|x_i|^(3/2): grad sign(x)|x|^(1/2), Hoelder 1/2 with L = 2^(1/2) n^(1/4)
    yield 0.5, math.sqrt(2.0) * n ** 0.25, (lambda x: float((2.0 / 3.0) * np.sum(np.abs(x) ** 1.5))), (lambda x: np.sign(x) * np.sqrt(np.abs(x)))
    yield 1.0, 3.0, (lambda x: 1.5 * float(x @ x)), (lambda x: 3.0 * x)


def vi_zoo_cases():
    rng = np.random.default_rng(9)
    n = 5
    K = rng.standard_normal((n, n))
    M = np.eye(n) * 0.5 + K - K.T
    ball = EuclideanBall(np.zeros(n), 1.0)
    out = [("vi_lipschitz", make_vi_operator_model(lambda x: M @ x, L=float(np.linalg.norm(M, 2))), EUCLIDEAN, ball)]
    out.append(("vi_composite", make_vi_operator_model(lambda x: M @ x, L=float(np.linalg.norm(M, 2)), composite_h=L1Norm(0.2)),
                EUCLIDEAN, Box(-1.0, 1.0, n)))
    for nu, Lnu, _, grad in _holder_functions(n):
        for delta in (1e-1, 1e-3):
            out.append((f"vi_holder_nu{nu:g}_d{delta:g}", make_vi_operator_model(grad, nu=nu, L_nu=Lnu, delta=delta), EUCLIDEAN, ball))
    A = rng.uniform(-1, 1, (3, 4))
    Q = ProductOfSimplices(3, 4)
    out.append(("vi_matrix_game", make_vi_operator_model(matrix_game_operator(A), L=float(np.abs(A).max())), ENTROPY, Q))
    out.append(("vi_saddle", make_composite_saddle_vi_model(bilinear_saddle(A), float(np.abs(A).max())), ENTROPY, Q))
    return out


def holder_interpolation_excess(grad, nu, L_nu, delta, x, y, z) -> float:
    """<g(z) - g(y), z - x> - L(delta)/2 (||z - x||^2 + ||z - y||^2) - delta."""
    Ld = holder_vi_L(nu, L_nu, delta)
    lhs = float((grad(z) - grad(y)) @ (z - x))
    return lhs - 0.5 * Ld * (float((z - x) @ (z - x)) + float((z - y) @ (z - y))) - delta


def check_model_validation():
    details, ok = {}, True
    failed = []
    for name, model, setup, Q in zoo_cases():
        rep = validate_min_model(model, setup, Q, n_samples=1000, rng_seed=0)
        if not rep.passed:
            failed.append(f"{name}:{rep.summary()}")
    for name, model, setup, Q in vi_zoo_cases():
        rep = validate_vi_model(model, setup, Q, n_samples=1000, rng_seed=0)
        if not rep.passed:
            failed.append(f"{name}:{rep.summary()}")
    n = 5
    box = Box(-1.0, 1.0, n)
    as_vi = all(
        check_min_model_is_vi_model(model, setup, Q, n_samples=200)
        for name, model, setup, Q in zoo_cases()[:3]
    )
    rng = np.random.default_rng(4)
    worst = -math.inf
    for nu, Lnu, _, grad in _holder_functions(n):
        for delta in (1e-1, 1e-3):
            X, Y, Z = (box.sample(rng, 1000) for _ in range(3))
            for x, y, z in zip(X, Y, Z):
                worst = max(worst, holder_interpolation_excess(grad, nu, Lnu, delta, x, y, z))
    ok = not failed and as_vi and worst <= 1e-12
    details.update({"models": len(zoo_cases()) + len(vi_zoo_cases()), "failed": failed or "none",
                    "min_as_vi": as_vi, "max holder excess": worst})
    return ok, details


# ---------------------------------------------------------------- 9: proximal Sinkhorn


def check_proximal_sinkhorn():
    from .bench import compare_sinkhorn

    worst, worst_descent = 0.0, -math.inf
    for s in range(50):
        n = 2 + s % 5
        inst = random_instance(n, seed=s)
        exact = exact_ot_oracle(inst, scale=1000)
        res = proximal_sinkhorn(inst, 1.0, 1e-3)
        worst = max(worst, abs(res.cost - exact))
        slack = 2.0 * inst.C.max() * res.run.meta["inner_tol"]
        worst_descent = max(worst_descent, max(e - slack for e in res.descent_excess))
    rows = compare_sinkhorn(random_instance(4, seed=123), 1e-2, [1.0, 0.5, 0.1])
    table_ok = len(rows) == 4 and all(math.isfinite(r["total_inner"]) for r in rows)
    ok = worst <= 1e-3 and worst_descent <= 0 and table_ok
    return ok, {"max|cost-exact|": worst, "max(descent-slack)": worst_descent,
                "table": ";".join(f"{r['method']}@{r['gamma']:.3g}:{r['total_inner']}" for r in rows)}


# ---------------------------------------------------------------- 10: Catalyst demo


def catalyst_demo():
    p = quadratic_whole(50, seed=5, cond=1e4)
    inner = Moreau(p.f, p.grad, L=p.L, L_f=p.L, mu_f=p.mu)
    model = make_inexact_linearization_model(inner, 1e-12)
    mu_F = p.mu * p.L / (p.mu + p.L)
    run = fgm_restart_solve(model, StrongConvexityTag.norm(mu_F), p.setup, p.set, p.x0, p.R2, 1e-7, L=model.L)
    evals = inner.grad_evals
    gap = p.f(run.x_last) - p.f_star
    direct = fgm_restart_solve(p.model(), StrongConvexityTag.norm(p.mu), p.setup, p.set, p.x0, p.R2, 1e-7)
    ratio = evals / direct.N
    return gap <= 1e-6, {"gap": gap, "inner_grads": evals, "direct_grads": direct.N, "ratio": ratio,
                         "within_10x": ratio <= 10}


# ---------------------------------------------------------------- 11: Frank-Wolfe


def conditional_gradient_reference(grad, x0, L, R_Q2, n_iter):
    """Plain numpy conditional gradient with a momentum point and fixed L."""
    x = np.array(x0, dtype=float)
    u = x.copy()
    A = 0.0
    xs = []
    for _ in range(n_iter):
        a = (1.0 + math.sqrt(1.0 + 4.0 * L * A)) / (2.0 * L)
        A2 = A + a
        y = (a * u + A * x) / A2
        gy = grad(y)
        u = np.zeros_like(x)
        u[int(np.argmin(gy))] = 1.0
        x = (a * u + A * x) / A2
        A = A2
        xs.append(x.copy())
    return xs


def check_frank_wolfe():
    p = quadratic_simplex(20, seed=11, setup=EUCLIDEAN)
    R_Q2 = 1.0  # max over the simplex of 1/2 ||x - x0||^2 is below 1
    L = p.L
    cfg = FGMConfig(L0=L, max_iter=60, adaptive=False, keep_iterates=True)
    run = fw_solve(p.model(), EUCLIDEAN, p.set, p.x0, 1e-12, R_Q2, cfg)
    ref = conditional_gradient_reference(p.grad, p.x0, L, R_Q2, run.N)
    dev = max(float(np.abs(a - b).max()) for a, b in zip(run.meta["iterates"][1:], ref))
    adaptive = fw_solve(p.model(), EUCLIDEAN, p.set, p.x0, 1e-12, R_Q2, FGMConfig(L0=L / 8, max_iter=60))
    dt_dev = float(np.max(np.abs(adaptive.column("delta_tilde") - 2.0 * adaptive.column("L") * R_Q2)))
    ok = dev <= 1e-10 and dt_dev <= 1e-12 * (1 + adaptive.L_max)
    return ok, {"iterates": run.N, "max|x-x_ref|": dev, "max|dt-2LR^2|": dt_dev}


# ---------------------------------------------------------------- registry


CHECKS: list[tuple[int, str, float | None, Callable, bool]] = [
    (1, "GM certificate", 5.0, check_gm_certificate, True),
    (2, "FGM certificate", 5.0, check_fgm_certificate, True),
    (3, "GM/FGM rate separation", 10.0, check_rate_separation, True),
    (4, "universal FGM scaling", 30.0, check_universal_fgm, True),
    (5, "mirror prox on matrix games", 10.0, check_mirror_prox_games, True),
    (6, "universal mirror prox scaling", 30.0, check_universal_mp, True),
    (7, "restart schemes", 10.0, check_restarts, True),
    (8, "model validation", 10.0, check_model_validation, True),
    (9, "proximal Sinkhorn", 60.0, check_proximal_sinkhorn, True),
    (10, "Catalyst demo", None, catalyst_demo, False),
    (11, "Frank-Wolfe trajectory", 5.0, check_frank_wolfe, True),
]


def run_check(number: int) -> CheckResult:
    for num, title, limit, fn, asserted in CHECKS:
        if num == number:
            return _timed(num, title, limit, fn, asserted)
    raise KeyError(number)


def run_all(numbers=None) -> list[CheckResult]:
    return [run_check(num) for num, *_ in CHECKS if numbers is None or num in numbers]
