"""Discrete optimal transport: Sinkhorn scaling for the KL-regularized problem,
the KL-proximal outer loop built on it, rounding onto the transport polytope
and an exact min-cost-flow oracle for small instances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, InvalidArgument, MaxIterExceeded, MaxOuterExceeded, ScaleError
from .trace import IterRecord, SolverRun

MARGINAL_TOL = 1e-12
LOG_DOMAIN_RATIO = 1e-2  # switch to log-domain updates when gamma < ratio * max C


@dataclass
class OTInstance:
    C: np.ndarray
    l: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.l = np.asarray(self.l, dtype=float).ravel()
        self.w = np.asarray(self.w, dtype=float).ravel()
        n = self.l.size
        if self.C.shape != (n, n) or self.w.size != n:
            raise InvalidArgument(f"cost must be {n}x{n} with marginals of length {n}")
        if not np.all(np.isfinite(self.C)) or self.C.min() < 0:
            raise InvalidArgument("costs must be finite and nonnegative")
        for name, m in (("l", self.l), ("w", self.w)):
            if m.min() < 0 or abs(m.sum() - 1.0) > MARGINAL_TOL * max(1, n):
                raise InvalidArgument(f"marginal {name} must lie on the simplex")

    @property
    def n(self) -> int:
        return self.l.size

    def cost(self, plan) -> float:
        return float(np.sum(self.C * plan))

    def marginal_residual(self, plan) -> float:
        return marginal_residual(plan, self.l, self.w)


def marginal_residual(plan, l, w) -> float:
    """||row sums - l||_1 + ||column sums - w||_1."""
    return float(np.abs(plan.sum(1) - l).sum() + np.abs(plan.sum(0) - w).sum())


def random_instance(n: int, seed: int, scale: int = 1000) -> OTInstance:
    """Uniform costs in [0, 1] and marginals that are multiples of 1/scale
    with every entry at least 1/scale."""
    if n < 1 or scale < n:
        raise InvalidArgument("need n >= 1 and scale >= n")
    rng = np.random.default_rng(seed)

    def marg():
        cuts = np.sort(rng.choice(np.arange(1, scale), n - 1, replace=False))
        return np.diff(np.concatenate([[0], cuts, [scale]])) / scale

    return OTInstance(rng.uniform(0.0, 1.0, (n, n)), marg(), marg())


# ---------------------------------------------------------------- instance files


def format_instance(inst: OTInstance) -> str:
    """`n,<n>` then n cost rows, then `l:` and `w:` rows."""
    lines = [f"n,{inst.n}"]
    lines += [",".join(repr(float(c)) for c in row) for row in inst.C]
    lines.append("l:," + ",".join(repr(float(v)) for v in inst.l))
    lines.append("w:," + ",".join(repr(float(v)) for v in inst.w))
    return "\n".join(lines) + "\n"


def save_instance(inst: OTInstance, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_instance(inst))


def parse_instance(text: str) -> OTInstance:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ConfigError("empty instance file")
    head = rows[0].split(",")
    try:
        n = int(head[-1])
    except ValueError as exc:
        raise ConfigError(f"first line must give n, got {rows[0]!r}") from exc
    marg = {}
    cost = []
    for ln in rows[1:]:
        key, _, rest = ln.partition(":")
        if rest and key.strip() in ("l", "w"):
            marg[key.strip()] = [float(v) for v in rest.strip(", ").split(",") if v.strip()]
        else:
            cost.append([float(v) for v in ln.split(",")])
    if len(cost) != n or set(marg) != {"l", "w"}:
        raise ConfigError(f"expected {n} cost rows and l:, w: rows")
    try:
        return OTInstance(np.array(cost), np.array(marg["l"]), np.array(marg["w"]))
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc


def load_instance(path) -> OTInstance:
    with open(path) as fh:
        return parse_instance(fh.read())


# ---------------------------------------------------------------- Sinkhorn


@dataclass
class SinkhornResult:
    plan: np.ndarray
    iterations: int
    residual: float
    converged: bool
    log_u: np.ndarray  # log row scalings
    log_v: np.ndarray  # log column scalings
    residuals: list = field(default_factory=list)
    log_domain: bool = False


def sinkhorn(
    inst: OTInstance,
    gamma: float,
    prior: Optional[np.ndarray] = None,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    warm: Optional[tuple[np.ndarray, np.ndarray]] = None,
    log_domain: Optional[bool] = None,
    strict: bool = True,
) -> SinkhornResult:
    """argmin <C, x> + gamma KL(x || prior) over plans with marginals l, w.

    The solution is diag(u) K diag(v) with K = prior * exp(-C / gamma); u and v
    are updated alternately. One iteration is a row then a column sweep and the
    residual is the row-marginal l1 error after the column sweep (the columns
    are exact then); it never increases.
    """
    if not gamma > 0:
        raise InvalidArgument("gamma must be positive")
    if max_iter < 1:
        raise InvalidArgument("max_iter must be >= 1")
    n = inst.n
    if prior is None:
        prior = np.outer(inst.l, inst.w)
        prior = np.where(prior > 0, prior, 1.0 / (n * n))
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (n, n) or prior.min() <= 0:
        raise InvalidArgument("prior must be an n x n matrix with positive entries")
    if log_domain is None:
        log_domain = gamma < LOG_DOMAIN_RATIO * max(inst.C.max(), 1e-300)
    with np.errstate(divide="ignore"):
        log_l, log_w = np.log(inst.l), np.log(inst.w)
    log_K = np.log(prior) - inst.C / gamma
    if warm is not None:
        lu, lv = (np.array(a, dtype=float) for a in warm)
    else:
        lu, lv = np.zeros(n), np.zeros(n)
    if not log_domain:
        K = np.exp(log_K)
        v = np.exp(lv)
    history = []
    res = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        if log_domain:
            lu = log_l - logsumexp(log_K + lv[None, :], axis=1)
            lv = log_w - logsumexp(log_K + lu[:, None], axis=0)
            plan = np.exp(log_K + lu[:, None] + lv[None, :])
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                u = np.where(inst.l > 0, inst.l / (K @ v), 0.0)
                v = np.where(inst.w > 0, inst.w / (K.T @ u), 0.0)
            plan = u[:, None] * K * v[None, :]
            if not np.all(np.isfinite(plan)):
                # scalings overflowed; redo this solve in the log domain
                return sinkhorn(inst, gamma, prior, tol, max_iter, warm, True, strict)
        res = float(np.abs(plan.sum(1) - inst.l).sum())
        history.append(res)
        if res <= tol:
            break
    if not log_domain:
        with np.errstate(divide="ignore"):
            lu, lv = np.log(u), np.log(v)
    out = SinkhornResult(plan, it, res, res <= tol, lu, lv, history, bool(log_domain))
    if not out.converged and strict:
        err = MaxIterExceeded(f"Sinkhorn stopped at residual {res:.3g} > {tol:.3g} after {it} sweeps")
        err.result = out
        raise err
    return out


def round_to_polytope(x, l, w) -> np.ndarray:
    """Scale rows and columns down to their marginals, then add the rank-one
    correction err_r err_c^T / ||err_r||_1. The output is feasible and at l1
    distance at most twice the input's marginal residual."""
    x = np.array(x, dtype=float)
    l = np.asarray(l, dtype=float)
    w = np.asarray(w, dtype=float)
    if x.min() < 0:
        raise InvalidArgument("plan entries must be nonnegative")
    r = x.sum(1)
    with np.errstate(divide="ignore", invalid="ignore"):
        x *= np.where(r > l, l / r, 1.0)[:, None]
        c = x.sum(0)
        x *= np.where(c > w, w / c, 1.0)[None, :]
    err_r = np.maximum(l - x.sum(1), 0.0)
    err_c = np.maximum(w - x.sum(0), 0.0)
    mass = err_r.sum()
    if mass > 0:
        x += np.outer(err_r, err_c) / mass
    return x


def kl_divergence(x, y) -> float:
    """Generalized KL: sum x ln(x / y) - x + y, with 0 ln 0 = 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(x > 0, x * np.log(x / y), 0.0)
    return float(np.sum(t - x + y))


# ---------------------------------------------------------------- proximal Sinkhorn


@dataclass
class ProxSinkhornResult:
    plan: np.ndarray  # rounded, exactly feasible
    cost: float
    run: SolverRun
    gammas: list
    inner_counts: list
    descent_excess: list  # <C,x+> + g KL(x+||p) - <C,x> - g KL(x||p) per outer step
    total_inner: int


def proximal_sinkhorn(
    inst: OTInstance,
    gamma0: float,
    eps: float,
    inner_tol: Optional[float] = None,
    max_outer: int = 10_000,
    adaptive: bool = True,
    blowup: float = 10.0,
    inner_max_iter: int = 100_000,
    stab_tol: Optional[float] = None,
    strict: bool = True,
) -> ProxSinkhornResult:
    """Proximal point method in the KL geometry on the transport LP:

        x_{k+1} = argmin <C, x> + gamma_k KL(x || max(x_k, eps / (2 n^2))),

    each step an entropic OT problem solved by Sinkhorn warm-started from the
    previous scalings. With ``adaptive`` the first step uses gamma0 (meant to
    be an overestimate) and later steps halve gamma until the Sinkhorn count
    exceeds ``blowup`` times the first one; gamma is then fixed at the last
    value before the blow-up.

    Stops when the gradient-method certificate ln n / sum(1 / gamma_k) is at
    most eps, or when the cost changes by less than ``stab_tol`` between steps.
    """
    if not gamma0 > 0 or not eps > 0:
        raise InvalidArgument("gamma0 and eps must be positive")
    n = inst.n
    floor = eps / (2.0 * n * n)
    inner_tol = eps / (10.0 * max(inst.C.max(), 1.0)) if inner_tol is None else inner_tol
    stab_tol = eps * 1e-3 if stab_tol is None else stab_tol
    R2 = math.log(n) if n > 1 else 0.0  # KL(x* || l w^T) is a mutual information
    x = np.outer(inst.l, inst.w)
    cost = inst.cost(x)
    gamma = float(gamma0)
    frozen = not adaptive
    first = None
    A = 0.0
    warm = None
    run = SolverRun("prox_sinkhorn")
    gammas, counts, excess = [], [], []
    for k in range(max_outer):
        prior = np.maximum(x, floor)
        sk = sinkhorn(inst, gamma, prior, inner_tol, inner_max_iter, warm=warm, strict=strict)
        discarded = 0
        if not frozen:
            if first is None:
                first = sk.iterations
            elif sk.iterations > blowup * first:
                frozen = True
                discarded = sk.iterations
                gamma *= 2.0
                sk = sinkhorn(inst, gamma, prior, inner_tol, inner_max_iter, warm=warm, strict=strict)
        xn = sk.plan
        new_cost = inst.cost(xn)
        excess.append(new_cost + gamma * kl_divergence(xn, prior) - cost - gamma * kl_divergence(x, prior))
        gammas.append(gamma)
        counts.append(sk.iterations + discarded)
        A += 1.0 / gamma
        cert = R2 / A
        run.records.append(IterRecord(k=k, L=gamma, alpha=1.0 / gamma, A=A, attempts=sk.iterations,
                                      delta_tilde=sk.residual, residual=sk.residual, f=new_cost, cert=cert))
        change = abs(new_cost - cost)
        x, cost, warm = xn, new_cost, (sk.log_u, sk.log_v)
        if cert <= eps:
            run.stop_reason = "certificate"
            break
        if k > 0 and change <= stab_tol:
            run.stop_reason = "stabilized"
            break
        if not frozen:
            gamma /= 2.0
    else:
        if strict:
            raise MaxOuterExceeded(f"no stop after {max_outer} proximal steps")
    plan = round_to_polytope(x, inst.l, inst.w)
    run.x_last = plan.ravel()
    run.meta.update(eps=eps, gamma0=gamma0, floor=floor, inner_tol=inner_tol)
    return ProxSinkhornResult(plan, inst.cost(plan), run, gammas, counts, excess, int(sum(counts)))


def proximal_sinkhorn_doubling(
    inst: OTInstance,
    gamma: float,
    eps: float,
    N_bar: int = 8,
    max_rounds: int = 20,
    max_outer: int = 10_000,
) -> ProxSinkhornResult:
    """Practical variant: every proximal step runs exactly N_bar Sinkhorn sweeps;
    the whole procedure is repeated with N_bar doubled until the final cost
    moves by at most eps / 2. Total sweeps over all rounds are reported."""
    if N_bar < 1:
        raise InvalidArgument("N_bar must be >= 1")
    prev = None
    total = 0
    for _ in range(max_rounds):
        res = proximal_sinkhorn(inst, gamma, eps, inner_tol=0.0, inner_max_iter=N_bar, adaptive=False,
                                max_outer=max_outer, strict=False)
        total += res.total_inner
        if prev is not None and abs(res.cost - prev) <= eps / 2.0:
            res.total_inner = total
            res.run.meta["N_bar"] = N_bar
            return res
        prev = res.cost
        N_bar *= 2
    raise MaxOuterExceeded(f"doubling did not settle within {max_rounds} rounds")


def plain_sinkhorn_gamma(inst: OTInstance, eps: float) -> float:
    """gamma = eps / (4 ln n): the usual choice making the entropic bias at most eps / 2."""
    return eps / (4.0 * math.log(inst.n)) if inst.n > 1 else eps


def plain_sinkhorn(inst: OTInstance, eps: float, max_iter: int = 1_000_000) -> tuple[float, int]:
    """Entropic OT at gamma = O(eps), then rounding. Returns (cost, sweeps)."""
    gamma = plain_sinkhorn_gamma(inst, eps)
    tol = eps / (8.0 * max(inst.C.max(), 1e-300))
    sk = sinkhorn(inst, gamma, None, tol, max_iter)
    plan = round_to_polytope(sk.plan, inst.l, inst.w)
    return inst.cost(plan), sk.iterations


# ---------------------------------------------------------------- exact oracle


def _integer_marginal(m, scale: int, name: str) -> np.ndarray:
    scaled = np.asarray(m, dtype=float) * scale
    ints = np.rint(scaled)
    if np.abs(scaled - ints).max() > 1e-9 * max(1.0, scale):
        raise ScaleError(f"marginal {name} is not a multiple of 1/{scale}")
    return ints.astype(np.int64)


def exact_ot_oracle(inst: OTInstance, scale: int = 1000, return_plan: bool = False):
    """Exact transport cost for small n by successive shortest paths on the
    bipartite flow network with integer supplies round(l * scale).
    Shortest paths use Bellman-Ford on the residual graph."""
    n = inst.n
    if n > 12:
        raise InvalidArgument("the exact oracle is meant for n <= 12")
    if scale < 1:
        raise InvalidArgument("scale must be a positive integer")
    a = _integer_marginal(inst.l, scale, "l")
    b = _integer_marginal(inst.w, scale, "w")
    if a.sum() != b.sum():
        raise ScaleError("scaled marginals have different totals")
    C = inst.C
    flow = np.zeros((n, n), dtype=np.int64)
    supply = a.copy()
    demand = b.copy()
    # nodes: 0 source, 1..n rows, n+1..2n columns, 2n+1 sink
    S, T = 0, 2 * n + 1
    while supply.sum() > 0:
        dist = np.full(2 * n + 2, math.inf)
        pred = [None] * (2 * n + 2)
        dist[S] = 0.0
        for _ in range(2 * n + 2):
            changed = False
            for i in range(n):
                if supply[i] > 0 and dist[S] < dist[1 + i]:
                    dist[1 + i], pred[1 + i] = dist[S], (S, None)
                    changed = True
            for i in range(n):
                di = dist[1 + i]
                for j in range(n):
                    cj = n + 1 + j
                    if di + C[i, j] < dist[cj] - 1e-15:
                        dist[cj], pred[cj] = di + C[i, j], (1 + i, None)
                        changed = True
                    if flow[i, j] > 0 and dist[cj] - C[i, j] < di - 1e-15:
                        di = dist[cj] - C[i, j]
                        dist[1 + i], pred[1 + i] = di, (cj, None)
                        changed = True
            for j in range(n):
                if demand[j] > 0 and dist[n + 1 + j] < dist[T]:
                    dist[T], pred[T] = dist[n + 1 + j], (n + 1 + j, None)
                    changed = True
            if not changed:
                break
        if not math.isfinite(dist[T]):
            raise ScaleError("no augmenting path; marginals are inconsistent")
        path = []
        v = T
        while v != S:
            u = pred[v][0]
            path.append((u, v))
            v = u
        path.reverse()
        amount = min(supply[path[0][1] - 1], demand[path[-1][0] - n - 1])
        for u, v in path[1:-1]:
            if u > n:  # backward edge column -> row
                amount = min(amount, flow[v - 1, u - n - 1])
        for u, v in path[1:-1]:
            if u <= n:
                flow[u - 1, v - n - 1] += amount
            else:
                flow[v - 1, u - n - 1] -= amount
        supply[path[0][1] - 1] -= amount
        demand[path[-1][0] - n - 1] -= amount
    value = float(np.sum(C * flow)) / scale
    if return_plan:
        return value, flow / scale
    return value
