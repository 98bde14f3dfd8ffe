"""Multifunctions of (t, x, a) and vector fields of (t, x).

The variation engine evaluates millions of pairwise set distances, so both
wrapper types carry an optional vectorised path: a batch callable that maps
aligned arrays of times and states to value arrays, together with the closed
form of the pairwise distance for that value shape ("points" rows compare by
Euclidean norm, "intervals" rows by the endpoint-gap formula).  Anything
without a batch path falls back to per-sample set construction, which is
correct but only suited to coarse grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .geometry import DENSIFY_RESOLUTION, SetValue, hausdorff_distance

# batch kinds: "points"  -> fn returns (K, d), rows are single points
#              "intervals" -> fn returns (K, 2), rows are [lo, hi] in R^1


@dataclass(frozen=True)
class BatchEval:
    kind: str
    fn: Callable[[np.ndarray, np.ndarray, np.ndarray | None], np.ndarray]

    def __post_init__(self):
        if self.kind not in ("points", "intervals"):
            raise DomainError(f"unknown batch kind {self.kind!r}")


def _pair_rows(kind: str, va: np.ndarray, vb: np.ndarray) -> np.ndarray:
    if kind == "points":
        d = va - vb
        return np.sqrt(np.sum(d * d, axis=1))
    # intervals on the line: Hausdorff distance is the larger endpoint gap
    return np.maximum(np.abs(va[:, 0] - vb[:, 0]), np.abs(va[:, 1] - vb[:, 1]))


_ZERO_A = np.zeros(1)


@dataclass(frozen=True, eq=False)
class Multifunction:
    """F(t, x, a), a set value for each time, state and parameter.

    eval_fn must return a nonempty SetValue for every probed (t, x, a) with t
    in [S, T] and x in the working tube.  A_points is the finite parameter
    sample; callables that ignore the parameter still receive it.

    delta_bar bounds the admissible tube radius, c_bound the set magnitude
    (|F| <= c_bound on the tube), gamma is a modulus of continuity in x
    (d_H(F(t,x,a), F(t,x',a)) <= gamma(|x - x'|)); all three are optional
    metadata used by validation layers, not by evaluation itself.
    breakpoints lists known discontinuity times so grids can land on them.
    """

    eval_fn: Callable[[float, np.ndarray, np.ndarray], SetValue]
    S: float
    T: float
    A_points: tuple = (_ZERO_A,)
    delta_bar: float | None = None
    c_bound: float | None = None
    gamma: Callable[[float], float] | None = None
    breakpoints: tuple = ()
    batch: BatchEval | None = None

    def __post_init__(self):
        if not self.T > self.S:
            raise DomainError("need S < T")
        if len(self.A_points) == 0:
            raise DomainError("A_points must be a nonempty finite sample")
        object.__setattr__(
            self,
            "A_points",
            tuple(np.atleast_1d(np.asarray(a, dtype=float)) for a in self.A_points),
        )
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def eval(self, t: float, x, a=None) -> SetValue:
        a = self.A_points[0] if a is None else np.atleast_1d(np.asarray(a, dtype=float))
        return self.eval_fn(float(t), np.atleast_1d(np.asarray(x, dtype=float)), a)

    def pair_distances(
        self,
        t_hi: np.ndarray,
        t_lo: np.ndarray,
        xs: np.ndarray,
        a: np.ndarray,
        resolution: int = DENSIFY_RESOLUTION,
    ) -> np.ndarray:
        """Rowwise d_H(F(t_hi[k], xs[k], a), F(t_lo[k], xs[k], a)).

        Uses the batch path when present; otherwise builds the sets one by
        one.  Both paths agree up to densification error.
        """
        if self.batch is not None:
            va = self.batch.fn(t_hi, xs, a)
            vb = self.batch.fn(t_lo, xs, a)
            return _pair_rows(self.batch.kind, np.asarray(va, float), np.asarray(vb, float))
        out = np.empty(t_hi.shape[0])
        for k in range(t_hi.shape[0]):
            out[k] = hausdorff_distance(
                self.eval(t_hi[k], xs[k], a), self.eval(t_lo[k], xs[k], a), resolution
            )
        return out

    def spot_check_bound(self, xbar, delta: float, n_probes: int = 32, seed: int = 0) -> float:
        """Largest |F| seen over random tube probes; raises if c_bound is violated."""
        rng = np.random.default_rng(seed)
        ts = rng.uniform(self.S, self.T, n_probes)
        worst = 0.0
        for t in ts:
            x = xbar.eval(t)
            if delta > 0:
                off = rng.normal(size=x.size)
                nrm = np.linalg.norm(off)
                if nrm > 0:
                    x = x + off / nrm * rng.uniform(0, delta)
            for a in self.A_points:
                pts = self.eval(t, x, a).points()
                worst = max(worst, float(np.max(np.linalg.norm(pts, axis=1))))
        if self.c_bound is not None and worst > self.c_bound + 1e-9:
            raise DomainError(
                f"set magnitude {worst:.6g} exceeds declared c_bound {self.c_bound:.6g}"
            )
        return worst


@dataclass(frozen=True, eq=False)
class Field:
    """A vector field m(t, x) in R^r with optional x-gradient.

    Wraps into Multifunction form (singleton values) so the variation engine
    can measure its cumulative variation, and separately so can the gradient.
    """

    m: Callable[[float, np.ndarray], np.ndarray]
    S: float
    T: float
    grad_x_m: Callable[[float, np.ndarray], np.ndarray] | None = None
    delta_prime: float | None = None
    breakpoints: tuple = ()
    batch_m: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    batch_grad: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    gamma: Callable[[float], float] | None = None
    c_bound: float | None = None

    def __post_init__(self):
        if not self.T > self.S:
            raise DomainError("need S < T")
        object.__setattr__(self, "breakpoints", tuple(sorted(float(b) for b in self.breakpoints)))

    def value(self, t: float, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.m(float(t), np.atleast_1d(np.asarray(x, float))), float))

    def values_many(self, ts: np.ndarray, xs: np.ndarray) -> np.ndarray:
        """(K, r) array of m(ts[k], xs[k]); vectorised when batch_m exists."""
        if self.batch_m is not None:
            out = np.asarray(self.batch_m(ts, xs), dtype=float)
            return out if out.ndim == 2 else out[:, None]
        return np.stack([self.value(t, x) for t, x in zip(ts, xs)])

    def gradient(self, t: float, x) -> np.ndarray:
        if self.grad_x_m is None:
            raise DomainError("field has no gradient callable")
        g = np.asarray(self.grad_x_m(float(t), np.atleast_1d(np.asarray(x, float))), float)
        return np.atleast_2d(g)

    def as_multifunction(self) -> Multifunction:
        def ev(t, x, a):
            from .geometry import Singleton

            return Singleton(self.value(t, x))

        batch = None
        if self.batch_m is not None:
            batch = BatchEval("points", lambda ts, xs, a: self.values_many(ts, xs))
        return Multifunction(
            eval_fn=ev,
            S=self.S,
            T=self.T,
            delta_bar=self.delta_prime,
            c_bound=self.c_bound,
            gamma=self.gamma,
            breakpoints=self.breakpoints,
            batch=batch,
        )

    def gradient_as_multifunction(self) -> Multifunction:
        if self.grad_x_m is None:
            raise DomainError("field has no gradient callable")

        def ev(t, x, a):
            from .geometry import Singleton

            return Singleton(self.gradient(t, x).ravel())

        batch = None
        if self.batch_grad is not None:
            bg = self.batch_grad

            def bfn(ts, xs, a):
                out = np.asarray(bg(ts, xs), dtype=float)
                return out.reshape(out.shape[0], -1)

            batch = BatchEval("points", bfn)
        return Multifunction(
            eval_fn=ev,
            S=self.S,
            T=self.T,
            delta_bar=self.delta_prime,
            breakpoints=self.breakpoints,
            batch=batch,
        )
