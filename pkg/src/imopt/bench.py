"""Run configurations, problem/solver registries and the Sinkhorn comparison
table used by the command-line harness."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import ConfigError
from .fgm import FGMConfig, fgm_restart_solve, fgm_solve, fgm_universal_solve, fw_solve
from .gm import GMConfig, gm_restart_solve, gm_solve
from .models import StrongConvexityTag
from .ot import (
    OTInstance,
    exact_ot_oracle,
    load_instance,
    plain_sinkhorn,
    plain_sinkhorn_gamma,
    proximal_sinkhorn,
    random_instance,
    sinkhorn,
)
from .problems import composite_l1_box, quadratic_box, quadratic_simplex, quadratic_whole
from .prox import ENTROPY, EUCLIDEAN, InexactnessBudget, ProxSetup, max_bregman
from .sets import EuclideanBall, ProductOfSimplices, parse_set
from .trace import SolverRun
from .vi import mirror_prox_restart_solve, mirror_prox_solve, mirror_prox_universal_solve, saddle_solve
from .zoo import (
    HolderProblem,
    InexactProx,
    ShiftedModel,
    bilinear_saddle,
    make_universal_model,
    make_vi_operator_model,
)

MIN_SOLVERS = ("gm", "fgm", "fgm_universal", "fw", "gm_restart", "fgm_restart")
VI_SOLVERS = ("mirror_prox", "mirror_prox_universal", "mirror_prox_restart")
OT_SOLVERS = ("prox_sinkhorn", "sinkhorn")
SOLVERS = MIN_SOLVERS + VI_SOLVERS + OT_SOLVERS
MODELS = ("quadratic", "composite_l1", "holder_l1", "matrix_game", "affine_vi")


@dataclass
class RunConfig:
    solver: str = "gm"
    model: str = "quadratic"
    set: str = "box:[-1,1]^10"
    setup: str = "euclidean"
    seed: int = 0
    eps: float = 1e-4
    L0: float = 1.0
    delta: float = 0.0
    delta_tilde: float = 0.0
    max_iter: int = 1000
    cond: float = 10.0
    n: Optional[int] = None  # dimension for set forms without one, e.g. ball:0,1.0
    output: Optional[str] = None
    instance: Optional[str] = None
    gamma: float = 1.0
    oracle: str = "off"

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver: unknown name {self.solver!r} (expected one of {', '.join(SOLVERS)})")
        if self.solver not in OT_SOLVERS and self.model not in MODELS:
            raise ConfigError(f"model: unknown name {self.model!r} (expected one of {', '.join(MODELS)})")
        if self.setup not in ("euclidean", "entropy"):
            raise ConfigError(f"setup: unknown prox setup {self.setup!r}")
        if self.oracle not in ("on", "off"):
            raise ConfigError("oracle: expected on or off")
        for name in ("eps", "L0", "gamma", "cond"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name}: must be positive")
        if self.delta < 0 or self.delta_tilde < 0:
            raise ConfigError("delta: budgets must be nonnegative")
        if self.max_iter < 1:
            raise ConfigError("max_iter: must be >= 1")
        if self.solver in OT_SOLVERS and not self.instance:
            raise ConfigError("instance: OT solvers need an instance file")

    @property
    def prox_setup(self) -> ProxSetup:
        return ENTROPY if self.setup == "entropy" else EUCLIDEAN


def _convert(name: str, typ, text: str):
    try:
        if typ in (int, "int"):
            return int(text)
        if typ in (float, "float"):
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse {text!r}") from exc
    return text


def parse_config(text: str, env: Optional[dict] = None) -> RunConfig:
    """Flat key=value lines; '#' starts a comment. IMOPT_SEED overrides seed."""
    env = os.environ if env is None else env
    types = {f.name: f.type for f in fields(RunConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        if key not in types:
            raise ConfigError(f"{key}: unknown field")
        typ = types[key].replace("Optional[", "").rstrip("]") if isinstance(types[key], str) else types[key]
        values[key] = _convert(key, typ, val)
    if env.get("IMOPT_SEED"):
        values["seed"] = _convert("IMOPT_SEED", "int", env["IMOPT_SEED"])
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    return parse_config(text)


# ---------------------------------------------------------------- dispatch


@dataclass
class RunOutcome:
    run: Optional[SolverRun]
    summary: dict = field(default_factory=dict)


def _parse_set(cfg: RunConfig):
    try:
        return parse_set(cfg.set, cfg.n)
    except ConfigError as exc:
        raise ConfigError(f"set: {exc}") from exc


def _planted(cfg: RunConfig):
    Q = _parse_set(cfg)
    kind = cfg.set.split(":", 1)[0].strip().lower()
    n = Q.dim
    if cfg.model == "quadratic":
        if kind == "whole":
            return quadratic_whole(n, cfg.seed, cfg.cond)
        if kind == "box":
            return quadratic_box(n, cfg.seed, cfg.cond)
        if kind == "simplex":
            return quadratic_simplex(n, cfg.seed, cfg.cond, setup=cfg.prox_setup)
    if cfg.model == "composite_l1" and kind == "box":
        return composite_l1_box(n, cfg.seed, cond=cfg.cond)
    raise ConfigError(f"set: model {cfg.model!r} is not available on {cfg.set!r}")


def _run_min(cfg: RunConfig) -> RunOutcome:
    if cfg.model == "holder_l1":
        return _run_holder(cfg)
    p = _planted(cfg)
    if cfg.setup == "entropy" and p.setup.kind != "entropy":
        raise ConfigError("setup: entropy needs a simplex set")
    m = p.model()
    if cfg.delta:
        m = ShiftedModel(m, cfg.delta)
    if cfg.delta_tilde:
        m = InexactProx(m, seed=cfg.seed)
    budget = InexactnessBudget(delta_tilde=cfg.delta_tilde)
    s = cfg.solver
    if s == "gm":
        run = gm_solve(m, p.setup, p.set, p.x0, p.R2, GMConfig(L0=cfg.L0, max_iter=cfg.max_iter, budget=budget))
        x = run.x_bar
    elif s == "fgm":
        run = fgm_solve(m, p.setup, p.set, p.x0, p.R2, FGMConfig(L0=cfg.L0, max_iter=cfg.max_iter, budget=budget))
        x = run.x_last
    elif s == "fgm_universal":
        run = fgm_universal_solve(m, p.setup, p.set, p.x0, p.R2, cfg.eps, FGMConfig(L0=cfg.L0, max_iter=cfg.max_iter))
        x = run.x_last
    elif s == "fw":
        R_Q2 = max_bregman(p.setup, p.x0, p.set)
        run = fw_solve(m, p.setup, p.set, p.x0, cfg.eps, R_Q2, FGMConfig(L0=cfg.L0, max_iter=cfg.max_iter))
        x = run.x_last
    elif s in ("gm_restart", "fgm_restart"):
        if p.mu <= 0:
            raise ConfigError("model: restarts need a strongly convex problem")
        if s == "gm_restart":
            run = gm_restart_solve(m, StrongConvexityTag.right(p.mu), p.setup, p.set, p.x0, p.R2, cfg.eps, p.L_model, budget)
        else:
            run = fgm_restart_solve(m, StrongConvexityTag.norm(p.mu), p.setup, p.set, p.x0, p.R2, cfg.eps, budget)
        x = run.x_last
    gap = p.f(x) - p.f_star
    cert = run.records[-1].cert if run.records else float("nan")
    return RunOutcome(run, {"gap": gap, "cert": cert, "iterations": run.N, "attempts": run.total_attempts})


def _run_holder(cfg: RunConfig) -> RunOutcome:
    Q = _parse_set(cfg)
    rng = np.random.default_rng(cfg.seed)
    a = rng.uniform(-0.5, 0.5, Q.dim)
    n = Q.dim
    p = HolderProblem(lambda x: float(np.abs(x - a).sum()), lambda x: np.sign(x - a), 0.0, 2.0 * math.sqrt(n))
    x0 = Q.project(np.ones(n))
    a_in = Q.project(a)
    if np.abs(a_in - a).max() > 0:
        raise ConfigError("set: holder_l1 needs a set containing [-0.5, 0.5]^n")
    R2 = 0.5 * float((x0 - a) @ (x0 - a))
    if cfg.solver != "fgm_universal":
        raise ConfigError("solver: holder_l1 runs with fgm_universal")
    run = fgm_universal_solve(make_universal_model(p, cfg.eps), EUCLIDEAN, Q, x0, R2, cfg.eps,
                              FGMConfig(L0=cfg.L0, max_iter=cfg.max_iter))
    gap = p.f(run.x_last)
    return RunOutcome(run, {"gap": gap, "cert": run.records[-1].cert, "iterations": run.N, "attempts": run.total_attempts})


def _run_vi(cfg: RunConfig) -> RunOutcome:
    rng = np.random.default_rng(cfg.seed)
    s = cfg.solver
    if cfg.model == "matrix_game":
        Q = _parse_set(cfg)
        if not isinstance(Q, ProductOfSimplices):
            raise ConfigError("set: matrix_game needs simplices:n1,n2")
        if s != "mirror_prox":
            raise ConfigError("solver: matrix_game runs with mirror_prox")
        A = rng.uniform(-1.0, 1.0, (Q.n1, Q.n2))
        res = saddle_solve(bilinear_saddle(A), Q, ENTROPY, cfg.eps, L=float(np.abs(A).max()), L0=cfg.L0,
                           max_iter=cfg.max_iter)
        return RunOutcome(res.run, {"gap": res.gap, "cert": res.run.records[-1].cert, "iterations": res.run.N,
                                    "attempts": res.run.total_attempts})
    if cfg.model != "affine_vi":
        raise ConfigError(f"model: {cfg.model!r} is not a VI model")
    Q = _parse_set(cfg)
    if not isinstance(Q, EuclideanBall):
        raise ConfigError("set: affine_vi needs a ball")
    n = Q.dim
    K = rng.standard_normal((n, n))
    M = np.eye(n) + K - K.T
    a = Q.center + 0.4 * Q.radius * rng.uniform(-1, 1, n) / math.sqrt(n)
    L = float(np.linalg.norm(M, 2))
    model = make_vi_operator_model(lambda x: M @ (x - a), L=L, mu=1.0)
    if s == "mirror_prox":
        run = mirror_prox_solve(model, EUCLIDEAN, Q, cfg.eps, L0=cfg.L0, max_iter=cfg.max_iter)
        x = run.w_hat
    elif s == "mirror_prox_universal":
        run = mirror_prox_universal_solve(model, EUCLIDEAN, Q, cfg.eps, L0=cfg.L0, max_iter=cfg.max_iter)
        x = run.w_hat
    else:
        x0 = Q.project(Q.center + Q.radius * np.ones(n))
        run = mirror_prox_restart_solve(model, EUCLIDEAN, Q, x0, float((x0 - a) @ (x0 - a)), cfg.eps, L0=cfg.L0, x_star=a)
        x = run.x_last
    dist2 = float((x - a) @ (x - a))
    cert = run.records[-1].cert if run.records else float("nan")
    return RunOutcome(run, {"dist2": dist2, "cert": cert, "iterations": run.N, "attempts": run.total_attempts})


def _run_ot(cfg: RunConfig) -> RunOutcome:
    inst = load_instance(cfg.instance)
    if cfg.solver == "prox_sinkhorn":
        res = proximal_sinkhorn(inst, cfg.gamma, cfg.eps, max_outer=cfg.max_iter)
        summary = {"cost": res.cost, "outer": res.run.N, "inner": res.total_inner}
        run = res.run
    else:
        sk = sinkhorn(inst, cfg.gamma, tol=cfg.eps, max_iter=cfg.max_iter)
        run = SolverRun("sinkhorn")
        summary = {"cost": inst.cost(sk.plan), "inner": sk.iterations, "residual": sk.residual}
    if cfg.oracle == "on":
        exact = exact_ot_oracle(inst)
        summary["exact"] = exact
        summary["oracle_dev"] = summary["cost"] - exact
    return RunOutcome(run, summary)


def execute(cfg: RunConfig) -> RunOutcome:
    if cfg.solver in OT_SOLVERS:
        return _run_ot(cfg)
    if cfg.solver in VI_SOLVERS:
        return _run_vi(cfg)
    return _run_min(cfg)


def format_summary(summary: dict) -> str:
    def fmt(v):
        return f"{v:.6g}" if isinstance(v, float) else str(v)

    return " ".join(f"{k}={fmt(v)}" for k, v in summary.items())


# ---------------------------------------------------------------- Sinkhorn comparison


COMPARE_COLUMNS = ("method", "gamma", "outer", "total_inner", "cost", "cost_error")


def compare_sinkhorn(inst: OTInstance, eps: float, gamma_grid, exact: Optional[float] = None) -> list[dict]:
    """Total Sinkhorn sweeps: plain Sinkhorn at gamma = eps / (4 ln n) against
    proximal Sinkhorn started from each gamma in the grid."""
    gamma_grid = list(gamma_grid)
    if not gamma_grid:
        raise ConfigError("gamma_grid: empty")
    if exact is None and inst.n <= 12:
        exact = exact_ot_oracle(inst)
    g_plain = plain_sinkhorn_gamma(inst, eps)
    cost, sweeps = plain_sinkhorn(inst, eps)
    rows = [{"method": "plain", "gamma": g_plain, "outer": 1, "total_inner": sweeps, "cost": cost}]
    for g in gamma_grid:
        res = proximal_sinkhorn(inst, g, eps)
        rows.append({"method": "proximal", "gamma": float(g), "outer": res.run.N, "total_inner": res.total_inner,
                     "cost": res.cost})
    for r in rows:
        r["cost_error"] = r["cost"] - exact if exact is not None else float("nan")
    return rows


def compare_table_csv(rows) -> str:
    lines = ["# imopt-sinkhorn-compare v1", ",".join(COMPARE_COLUMNS)]
    for r in rows:
        lines.append(",".join(r[c] if isinstance(r[c], str) else repr(float(r[c])) if isinstance(r[c], float)
                              else str(r[c]) for c in COMPARE_COLUMNS))
    return "\n".join(lines) + "\n"


def demo_instance(n: int = 4, seed: int = 0) -> OTInstance:
    return random_instance(n, seed)
