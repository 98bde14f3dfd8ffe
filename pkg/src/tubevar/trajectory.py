"""Sampled reference arcs and time partitions.

A Trajectory is a continuous curve t -> x(t) on [S, T] stored as samples with
piecewise-linear interpolation in between.  Simulations attach per-node slope
data, in which case evaluation switches to cubic Hermite interpolation (the
slopes are one-sided so a kink at a control jump stays a kink).

The continuity modulus theta(h) = max_t |x(t+h) - x(t)| is tabulated
empirically on a dyadic ladder of steps and interpolated monotonically; an
exact modulus callable can be supplied instead when one is known.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

_MODULUS_DEPTH = 14


class Trajectory:
    """Piecewise-linear (optionally Hermite) arc on [S, T]."""

    def __init__(
        self,
        times,
        values,
        *,
        slopes_right=None,
        slopes_left=None,
        exact_modulus: Callable[[float], float] | None = None,
    ):
        t = np.asarray(times, dtype=float)
        x = np.asarray(values, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if t.ndim != 1 or t.size < 2:
            raise DomainError("trajectory needs at least two sample times")
        if x.shape[0] != t.size:
            raise DomainError("times and values disagree in length")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sample times must be strictly increasing")
        self.times = t
        self.values = x
        self.S = float(t[0])
        self.T = float(t[-1])
        self.dim = x.shape[1]
        self._sr = None if slopes_right is None else np.asarray(slopes_right, dtype=float)
        self._sl = None if slopes_left is None else np.asarray(slopes_left, dtype=float)
        self._exact_modulus = exact_modulus
        self._modulus_table = None

    # ------------------------------------------------------------------
    # evaluation

    def eval_many(self, ts) -> np.ndarray:
        """Vectorised evaluation, returns an array of shape (len(ts), dim)."""
        ts = np.asarray(ts, dtype=float)
        tc = np.clip(ts, self.S, self.T)
        idx = np.searchsorted(self.times, tc, side="right") - 1
        idx = np.clip(idx, 0, self.times.size - 2)
        t0 = self.times[idx]
        t1 = self.times[idx + 1]
        w = (tc - t0) / (t1 - t0)
        x0 = self.values[idx]
        x1 = self.values[idx + 1]
        if self._sr is None or self._sl is None:
            return x0 + w[:, None] * (x1 - x0)
        # Cubic Hermite on each cell with the cell's own end slopes.
        h = (t1 - t0)[:, None]
        u = w[:, None]
        m0 = self._sr[idx]
        m1 = self._sl[idx + 1]
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        return h00 * x0 + h10 * h * m0 + h01 * x1 + h11 * h * m1

    def eval(self, t: float) -> np.ndarray:
        return self.eval_many(np.array([t]))[0]

    def range_samples(self, a: float, b: float) -> np.ndarray:
        """Sample points of the arc restricted to [a, b], endpoints included."""
        if b < a:
            raise DomainError("need a <= b")
        inner = self.times[(self.times > a) & (self.times < b)]
        ts = np.concatenate(([a], inner, [b]))
        return self.eval_many(ts)

    # ------------------------------------------------------------------
    # continuity modulus

    def _build_modulus_table(self):
        span = self.T - self.S
        hs = span * 2.0 ** -np.arange(_MODULUS_DEPTH, -1, -1)  # ascending
        # Evaluate on a uniform probe grid plus the native samples.
        probe = np.union1d(self.times, np.linspace(self.S, self.T, 2049))
        base = self.eval_many(probe)
        theta = np.empty_like(hs)
        for k, h in enumerate(hs):
            shifted = self.eval_many(np.minimum(probe + h, self.T))
            d = np.linalg.norm(shifted - base, axis=1)
            theta[k] = float(np.max(d))
        theta = np.maximum.accumulate(theta)
        self._modulus_table = (hs, theta)

    def continuity_modulus(self, h: float) -> float:
        """theta(h): largest displacement of the arc over a time step h.

        Empirical unless an exact modulus was supplied.  Monotone in h and
        zero at h = 0 by construction.
        """
        h = abs(float(h))
        if h == 0.0:
            return 0.0
        if self._exact_modulus is not None:
            return float(self._exact_modulus(h))
        if self._modulus_table is None:
            self._build_modulus_table()
        hs, theta = self._modulus_table
        if h >= hs[-1]:
            return float(theta[-1])
        return float(np.interp(h, hs, theta))

    def modulus_table(self) -> tuple[np.ndarray, np.ndarray]:
        if self._modulus_table is None:
            self._build_modulus_table()
        return self._modulus_table


def ramp_trajectory(S: float = 0.0, T: float = 1.0) -> Trajectory:
    """x(t) = t (scalar), the identity arc."""
    return Trajectory(
        [S, T], [[S], [T]], exact_modulus=lambda h: min(h, T - S)
    )


def constant_trajectory(x0, S: float = 0.0, T: float = 1.0) -> Trajectory:
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    return Trajectory([S, T], [x0, x0], exact_modulus=lambda h: 0.0)


@dataclass(frozen=True)
class Partition:
    """Strictly increasing grid S = t_0 < t_1 < ... < t_N = t."""

    grid: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in self.grid)
        if len(g) < 2:
            raise DomainError("partition needs at least two points")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise DomainError("partition points must be strictly increasing")
        object.__setattr__(self, "grid", g)

    @property
    def diam(self) -> float:
        return max(b - a for a, b in zip(self.grid, self.grid[1:]))

    @property
    def cells(self) -> list[tuple[float, float]]:
        return list(zip(self.grid, self.grid[1:]))

    @staticmethod
    def uniform(a: float, b: float, n_cells: int) -> "Partition":
        if n_cells < 1:
            raise DomainError("need at least one cell")
        return Partition(tuple(np.linspace(a, b, n_cells + 1)))
