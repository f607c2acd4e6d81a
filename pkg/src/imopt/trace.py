"""Per-iteration run records, certificates and the CSV trace format."""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TRACE_SCHEMA = "imopt-trace v1"
TRACE_COLUMNS = ("k", "L", "alpha", "A", "f", "att", "delta", "cert")


@dataclass
class IterRecord:
    k: int
    L: float
    alpha: float
    A: float
    attempts: int
    delta: float = 0.0
    delta_tilde: float = 0.0
    residual: float = 0.0  # achieved prox residual in the alpha psi + V scale
    f_delta: float = float("nan")
    f: float = float("nan")  # objective at the reported iterate
    cert: float = float("nan")  # certificate after this iteration


@dataclass
class Certificate:
    """A posteriori bound split into its three sources."""

    r2_term: float
    delta_term: float
    delta_tilde_term: float
    extra_term: float = 0.0
    rate_bound: Optional[float] = None
    rate_bound_holds: Optional[bool] = None

    @property
    def bound_value(self) -> float:
        return self.r2_term + self.delta_term + self.delta_tilde_term + self.extra_term


@dataclass
class SolverRun:
    solver: str
    records: list = field(default_factory=list)
    x_last: Optional[np.ndarray] = None
    x_bar: Optional[np.ndarray] = None
    certificate: Optional[Certificate] = None
    stop_reason: str = "max_iter"
    meta: dict = field(default_factory=dict)
    stages: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.records)

    @property
    def A(self) -> float:
        return self.records[-1].A if self.records else 0.0

    @property
    def total_attempts(self) -> int:
        return int(sum(r.attempts for r in self.records))

    @property
    def L_max(self) -> float:
        return max((r.L for r in self.records), default=0.0)

    @property
    def x(self) -> Optional[np.ndarray]:
        """The point the method reports (averaged iterate when it has one)."""
        return self.x_bar if self.x_bar is not None else self.x_last

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)


@dataclass
class VIRun(SolverRun):
    w_hat: Optional[np.ndarray] = None
    S: float = 0.0
    iterates_w: list = field(default_factory=list)
    iterates_z: list = field(default_factory=list)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def trace_csv(run: SolverRun) -> str:
    """CSV text with a schema comment line; repr floats so output is exact and
    byte-identical for identical runs."""
    buf = io.StringIO()
    buf.write(f"# {TRACE_SCHEMA} solver={run.solver}\n")
    buf.write(",".join(TRACE_COLUMNS) + "\n")
    for r in run.records:
        row = (r.k, r.L, r.alpha, r.A, r.f, r.attempts, r.delta, r.cert)
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_trace(run: SolverRun, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(trace_csv(run))


def read_trace(path) -> list[dict]:
    rows = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    header = lines[0].split(",")
    for ln in lines[1:]:
        vals = ln.split(",")
        rows.append({h: float(v) for h, v in zip(header, vals)})
    return rows
