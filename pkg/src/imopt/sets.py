"""Feasible sets: membership, Euclidean projection, linear minimization, sampling.

Every set also has a canonical text form used in CLI configs::

    whole:10   simplex:5   box:[-1,1]^10   ball:0,1.0   simplices:3,4
"""
from __future__ import annotations

import re

import numpy as np

from .errors import ConfigError, DimensionMismatch, InvalidArgument, UnsupportedSet

TOL_FEAS = 1e-12


def as_point(x, n=None) -> np.ndarray:
    if not (type(x) is np.ndarray and x.ndim == 1 and x.dtype == np.float64):
        x = np.asarray(x, dtype=float).reshape(-1)
    if n is not None and x.size != n:
        raise DimensionMismatch(f"expected dimension {n}, got {x.size}")
    return x


def project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = total} (sort-based)."""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    ind = np.arange(1, n + 1)
    rho = np.nonzero(u - css / ind > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class FeasibleSet:
    dim: int
    is_polytope = False

    def contains(self, x, tol: float = TOL_FEAS) -> bool:
        raise NotImplementedError

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def lmo(self, g) -> np.ndarray:
        """A minimizer of <g, v> over the set."""
        raise UnsupportedSet(f"{type(self).__name__} has no linear minimization oracle")

    def support_gap(self, h, x) -> float:
        """max over v in the set of <h, x - v>; nonnegative when x is in the set."""
        h = as_point(h)
        v = self.lmo(h)
        return float(h @ (as_point(x) - v))

    def sample(self, rng: np.random.Generator, k: int) -> np.ndarray:
        raise NotImplementedError

    def vertices(self) -> np.ndarray:
        raise UnsupportedSet(f"{type(self).__name__} is not a polytope")

    @property
    def has_lmo(self) -> bool:
        return True

    def text(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.text()}>"


class WholeSpace(FeasibleSet):
    def __init__(self, n: int, sample_scale: float = 2.0):
        if n < 1:
            raise InvalidArgument("dimension must be positive")
        self.dim = int(n)
        self.sample_scale = sample_scale

    def contains(self, x, tol=TOL_FEAS):
        return bool(np.all(np.isfinite(as_point(x, self.dim))))

    def project(self, x):
        return as_point(x, self.dim).copy()

    def support_gap(self, h, x):
        h = as_point(h, self.dim)
        return 0.0 if np.all(h == 0.0) else float("inf")

    @property
    def has_lmo(self):
        return False

    def sample(self, rng, k):
        return self.sample_scale * rng.standard_normal((k, self.dim))

    def text(self):
        return f"whole:{self.dim}"


class Box(FeasibleSet):
    is_polytope = True

    def __init__(self, lower, upper, n: int | None = None):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if n is not None:
            lower = np.broadcast_to(lower, (n,)).copy()
            upper = np.broadcast_to(upper, (n,)).copy()
        lower, upper = np.broadcast_arrays(lower.reshape(-1), upper.reshape(-1))
        if np.any(lower > upper):
            raise InvalidArgument("box lower bound exceeds upper bound")
        self.lower = lower.copy()
        self.upper = upper.copy()
        self.dim = self.lower.size
        self._finite = bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def contains(self, x, tol=TOL_FEAS):
        x = as_point(x, self.dim)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, x):
        return np.clip(as_point(x, self.dim), self.lower, self.upper)

    def lmo(self, g):
        g = as_point(g, self.dim)
        return np.where(g > 0, self.lower, self.upper)

    def support_gap(self, h, x):
        h = as_point(h, self.dim)
        x = as_point(x, self.dim)
        # per coordinate: max(h*(x-lo), h*(x-hi)); avoid inf*0 on unbounded sides
        if self._finite:
            return float(np.maximum(h * (x - self.lower), h * (x - self.upper)).sum())
        lo_term = np.where(h > 0, h * (x - self.lower), 0.0)
        hi_term = np.where(h < 0, h * (x - self.upper), 0.0)
        return float(np.sum(lo_term + hi_term))

    def sample(self, rng, k):
        return rng.uniform(self.lower, self.upper, size=(k, self.dim))

    def vertices(self):
        if self.dim > 20:
            raise UnsupportedSet("vertex enumeration limited to dimension 20")
        bits = (np.arange(2 ** self.dim)[:, None] >> np.arange(self.dim)) & 1
        return np.where(bits == 1, self.upper, self.lower)

    def text(self):
        if np.all(self.lower == self.lower[0]) and np.all(self.upper == self.upper[0]):
            return f"box:[{self.lower[0]:g},{self.upper[0]:g}]^{self.dim}"
        lo = ",".join(f"{v:g}" for v in self.lower)
        hi = ",".join(f"{v:g}" for v in self.upper)
        return f"box:[{lo}];[{hi}]"


class Simplex(FeasibleSet):
    is_polytope = True

    def __init__(self, n: int):
        if n < 1:
            raise InvalidArgument("dimension must be positive")
        self.dim = int(n)

    def contains(self, x, tol=TOL_FEAS):
        x = as_point(x, self.dim)
        return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol * max(1, self.dim))

    def project(self, x):
        return project_simplex(as_point(x, self.dim))

    def lmo(self, g):
        g = as_point(g, self.dim)
        v = np.zeros(self.dim)
        v[int(np.argmin(g))] = 1.0
        return v

    def sample(self, rng, k):
        return rng.dirichlet(np.ones(self.dim), size=k)

    def vertices(self):
        return np.eye(self.dim)

    def center(self):
        return np.full(self.dim, 1.0 / self.dim)

    def text(self):
        return f"simplex:{self.dim}"


class EuclideanBall(FeasibleSet):
    def __init__(self, center, radius: float, n: int | None = None):
        center = np.asarray(center, dtype=float)
        if n is not None:
            center = np.broadcast_to(center, (n,)).copy()
        self.center = center.reshape(-1).copy()
        if radius <= 0:
            raise InvalidArgument("ball radius must be positive")
        self.radius = float(radius)
        self.dim = self.center.size

    def contains(self, x, tol=TOL_FEAS):
        x = as_point(x, self.dim)
        return bool(np.linalg.norm(x - self.center) <= self.radius + tol)

    def project(self, x):
        x = as_point(x, self.dim)
        d = x - self.center
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return x.copy()
        return self.center + d * (self.radius / nrm)

    def lmo(self, g):
        g = as_point(g, self.dim)
        nrm = np.linalg.norm(g)
        if nrm == 0.0:
            return self.center.copy()
        return self.center - self.radius * g / nrm

    def sample(self, rng, k):
        d = rng.standard_normal((k, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.uniform(size=(k, 1)) ** (1.0 / self.dim)
        return self.center + r * d

    def text(self):
        if np.all(self.center == self.center[0]):
            return f"ball:{self.center[0]:g},{self.radius:g}"
        return "ball:" + ",".join(f"{v:g}" for v in self.center) + f";{self.radius:g}"


class Product(FeasibleSet):
    """Cartesian product of sets; points are concatenations of the blocks."""

    def __init__(self, *sets: FeasibleSet):
        if not sets:
            raise InvalidArgument("empty product")
        self.sets = list(sets)
        self.dim = sum(s.dim for s in sets)
        self.slices = []
        start = 0
        for s in sets:
            self.slices.append(slice(start, start + s.dim))
            start += s.dim
        self.is_polytope = all(s.is_polytope for s in sets)

    def split(self, x):
        x = as_point(x, self.dim)
        return [x[sl] for sl in self.slices]

    def contains(self, x, tol=TOL_FEAS):
        return all(s.contains(b, tol) for s, b in zip(self.sets, self.split(x)))

    def project(self, x):
        return np.concatenate([s.project(b) for s, b in zip(self.sets, self.split(x))])

    def lmo(self, g):
        return np.concatenate([s.lmo(b) for s, b in zip(self.sets, self.split(g))])

    def support_gap(self, h, x):
        hs = self.split(h)
        xs = self.split(x)
        return float(sum(s.support_gap(hb, xb) for s, hb, xb in zip(self.sets, hs, xs)))

    @property
    def has_lmo(self):
        return all(s.has_lmo for s in self.sets)

    def sample(self, rng, k):
        return np.concatenate([s.sample(rng, k) for s in self.sets], axis=1)

    def vertices(self):
        blocks = [s.vertices() for s in self.sets]
        total = 1
        for b in blocks:
            total *= len(b)
        if total > 2 ** 20:
            raise UnsupportedSet("too many product vertices")
        out = blocks[0]
        for b in blocks[1:]:
            out = np.array([np.concatenate([p, q]) for p in out for q in b])
        return out

    def text(self):
        return "product(" + " x ".join(s.text() for s in self.sets) + ")"


class ProductOfSimplices(Product):
    def __init__(self, n1: int, n2: int):
        super().__init__(Simplex(n1), Simplex(n2))
        self.n1, self.n2 = int(n1), int(n2)

    def text(self):
        return f"simplices:{self.n1},{self.n2}"


class TransportPolytope(FeasibleSet):
    """Flattened n x n plans with row sums l and column sums w."""

    is_polytope = True

    def __init__(self, l, w):
        self.l = as_point(l)
        self.w = as_point(w)
        if self.l.size != self.w.size:
            raise DimensionMismatch("marginals must have equal length")
        self.n = self.l.size
        self.dim = self.n * self.n

    def contains(self, x, tol=1e-9):
        x = as_point(x, self.dim).reshape(self.n, self.n)
        return bool(
            np.all(x >= -tol)
            and np.abs(x.sum(1) - self.l).sum() <= tol
            and np.abs(x.sum(0) - self.w).sum() <= tol
        )

    def project(self, x):
        raise UnsupportedSet("no Euclidean projection onto the transport polytope")

    @property
    def has_lmo(self):
        return False

    def lmo(self, g):
        raise UnsupportedSet("transport LMO is an LP; use imopt.ot.exact_ot_oracle")

    def sample(self, rng, k):
        raise UnsupportedSet("sampling the transport polytope is not supported")

    def text(self):
        return f"transport:{self.n}"


_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


def parse_set(text: str, n: int | None = None) -> FeasibleSet:
    """Parse the canonical text form; `n` supplies the dimension of `ball:c,r`."""
    text = text.strip().replace(" ", "")
    kind, _, arg = text.partition(":")
    kind = kind.lower()
    try:
        if kind == "whole":
            return WholeSpace(int(arg) if arg else int(n))
        if kind == "simplex":
            return Simplex(int(arg) if arg else int(n))
        if kind == "simplices":
            a, b = arg.split(",")
            return ProductOfSimplices(int(a), int(b))
        if kind == "box":
            m = re.fullmatch(rf"\[({_NUM}),({_NUM})\](?:\^(\d+))?", arg)
            if m:
                dim = int(m.group(3)) if m.group(3) else n
                if dim is None:
                    raise ConfigError(f"box needs a dimension: {text!r}")
                return Box(float(m.group(1)), float(m.group(2)), n=int(dim))
            lo, hi = arg.split(";")
            return Box(
                [float(v) for v in lo.strip("[]").split(",")],
                [float(v) for v in hi.strip("[]").split(",")],
            )
        if kind == "ball":
            if ";" in arg:
                c, r = arg.split(";")
                return EuclideanBall([float(v) for v in c.split(",")], float(r))
            c, r = arg.split(",")
            if n is None:
                raise ConfigError(f"ball needs a dimension: {text!r}")
            return EuclideanBall(float(c), float(r), n=int(n))
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse set {text!r}: {exc}") from exc
    raise ConfigError(f"unknown set kind in {text!r}")
