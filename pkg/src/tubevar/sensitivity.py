"""Sensitivity of a terminal cost to a small delay in the control.

A control signal u on [S, T] is delayed by h through u^h(t) = u(clamp(t - h)),
with the clamp holding the first or last value once the shifted time leaves
the window.  The cost J(h) = g(x^h(T)) of the state driven by u^h is in
general only one-sidedly differentiable at h = 0: the derivative from each
side is an integral of the adjoint state against the time measure induced by
the vector field t |-> f(., u(t)), taken over a window of [S, T] that is
half-open on the side matching the derivative.  Atoms of the measure at S or
T (jumps of u at the window ends) are exactly what separates the two
one-sided values.

Everything here is grid-exact where it can be: simulation grids contain
every declared discontinuity of the control, Runge-Kutta stages take the
control limit from inside the current step, and the adjoint sweep reuses a
dense Hermite read of the stored state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .fields import Field
from .measure import DiscreteMeasure, MeasureLimit, integrate, partial_variation_measure
from .trajectory import Trajectory

_SIDES = ("left", "right")


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Piecewise-constant or sampled piecewise-linear control on [S, T].

    Piecewise-constant: knots are the switch times (allowed to sit exactly
    at S or T), values has one row more than there are knots, and
    eval(t, side) returns the one-sided limit at knots.  Sampled: values are
    linearly interpolated between sample times, the side argument is
    accepted but irrelevant, and an optional derivative callable makes the
    signal usable for smooth-chain-rule comparisons.
    """

    kind: str
    S: float
    T: float
    knots: np.ndarray
    values: np.ndarray
    derivative: Callable[[np.ndarray], np.ndarray] | None = None
    kinks: tuple = ()

    @staticmethod
    def piecewise_constant(knots, values, S: float, T: float) -> "ControlSignal":
        k = np.asarray(knots, dtype=float)
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if k.ndim != 1 or np.any(np.diff(k) <= 0):
            raise DomainError("knots must be strictly increasing")
        if v.shape[0] != k.size + 1:
            raise DomainError("need one value row more than knots")
        if k.size and (k[0] < S or k[-1] > T):
            raise DomainError("knots must lie inside [S, T]")
        return ControlSignal(kind="pc", S=float(S), T=float(T), knots=k, values=v)

    @staticmethod
    def sampled(times, values, derivative=None, kinks=()) -> "ControlSignal":
        t = np.asarray(times, dtype=float)
        v = np.asarray(values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise DomainError("sample times must be strictly increasing, length >= 2")
        if v.shape[0] != t.size:
            raise DomainError("one value row per sample time required")
        return ControlSignal(
            kind="sampled",
            S=float(t[0]),
            T=float(t[-1]),
            knots=t,
            values=v,
            derivative=derivative,
            kinks=tuple(sorted(float(c) for c in kinks)),
        )

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def eval_many(self, ts: np.ndarray, side: str = "right") -> np.ndarray:
        if side not in _SIDES:
            raise DomainError("side must be 'left' or 'right'")
        ts = np.asarray(ts, dtype=float)
        if self.kind == "pc":
            ss = "right" if side == "right" else "left"
            idx = np.searchsorted(self.knots, ts, side=ss)
            return self.values[idx]
        out = np.empty((ts.size, self.dim))
        for j in range(self.dim):
            out[:, j] = np.interp(ts, self.knots, self.values[:, j])
        return out

    def eval(self, t: float, side: str = "right") -> np.ndarray:
        return self.eval_many(np.asarray([float(t)]), side)[0]

    @property
    def jump_times(self) -> tuple:
        if self.kind != "pc":
            return ()
        out = []
        for j, k in enumerate(self.knots):
            if np.any(self.values[j + 1] != self.values[j]):
                out.append(float(k))
        return tuple(out)

    @property
    def breakpoints(self) -> tuple:
        if self.kind == "pc":
            return tuple(float(k) for k in self.knots)
        return self.kinks

    def is_continuous_at(self, t: float, tol: float = 1e-9) -> bool:
        gap = np.linalg.norm(self.eval(t, "left") - self.eval(t, "right"))
        return bool(gap <= tol)

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.values, axis=0), axis=1)))

    def _clamped_eval(self, tau: float) -> np.ndarray:
        """Value of u at clamp(tau) with the window-end representatives.

        The held value below S is the left limit there and the held value
        above T the right limit, so jumps sitting exactly on a window end
        stay visible to a shift that pushes them outward.
        """
        if tau <= self.S:
            return self.eval(self.S, "left")
        if tau >= self.T:
            return self.eval(self.T, "right")
        return self.eval(tau, "right")

    def shifted(self, h: float) -> "ControlSignal":
        """The delayed signal t |-> u(clamp(t - h)) on the same window."""
        h = float(h)
        S, T = self.S, self.T
        if self.kind == "pc":
            ev = sorted({float(k) + h for k in self.knots if S <= k + h <= T})
            bounds = [S] + ev + [T]
            vals = []
            for i in range(len(ev) + 1):
                if i == 0:
                    tau = S - h
                elif i == len(ev):
                    tau = T - h
                else:
                    tau = 0.5 * (bounds[i] + bounds[i + 1]) - h
                vals.append(self._clamped_eval(tau))
            return ControlSignal(
                kind="pc",
                S=S,
                T=T,
                knots=np.asarray(ev),
                values=np.asarray(vals),
            )
        inner = [float(t) + h for t in self.knots if S < t + h < T]
        new_t = np.unique(np.asarray([S] + inner + [T]))
        new_v = np.stack([self._clamped_eval(t - h) for t in new_t])
        kinks = sorted({t for t in inner} | {k + h for k in self.kinks if S < k + h < T})
        return ControlSignal(
            kind="sampled",
            S=S,
            T=T,
            knots=new_t,
            values=new_v,
            kinks=tuple(kinks),
        )


def delayed_control(u: ControlSignal, h: float) -> ControlSignal:
    return u.shifted(h)


@dataclass(frozen=True, eq=False)
class ControlSystem:
    """Terminal-cost control problem x' = f(x, u), J = g(x(T)), x(S) = x0.

    grad_x_f returns the (n, n) Jacobian in x; grad_u_f, when available,
    the (n, m) Jacobian in u.  batch_f and batch_grad_x map aligned state
    and control arrays to stacked outputs and unlock vectorised field
    evaluation inside the measure refinement.
    """

    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_x_f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], float]
    grad_g: Callable[[np.ndarray], np.ndarray]
    x0: np.ndarray
    S: float
    T: float
    grad_u_f: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    batch_f: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    batch_grad_x: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    gamma: Callable[[float], float] | None = None
    c_bound: float | None = None

    def __post_init__(self):
        if not self.T > self.S:
            raise DomainError("need S < T")
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))

    @property
    def n(self) -> int:
        return self.x0.size

    def m_field(self, u: ControlSignal, side: str = "right") -> Field:
        """The time-state field t, x |-> f(x, u(t)) driving the measure."""
        batch_m = None
        batch_grad = None
        if self.batch_f is not None:
            batch_m = lambda ts, xs: self.batch_f(xs, u.eval_many(ts, side))
        if self.batch_grad_x is not None:
            batch_grad = lambda ts, xs: self.batch_grad_x(xs, u.eval_many(ts, side))
        return Field(
            m=lambda t, x: self.f(x, u.eval(t, side)),
            S=self.S,
            T=self.T,
            grad_x_m=lambda t, x: self.grad_x_f(x, u.eval(t, side)),
            breakpoints=u.breakpoints,
            batch_m=batch_m,
            batch_grad=batch_grad,
            gamma=self.gamma,
            c_bound=self.c_bound,
        )


def _simulation_grid(sys: ControlSystem, u: ControlSignal, n_steps: int) -> np.ndarray:
    span = sys.T - sys.S
    dt = span / n_steps
    marks = sorted({sys.S, sys.T} | {b for b in u.breakpoints if sys.S < b < sys.T})
    grid = []
    for a, b in zip(marks[:-1], marks[1:]):
        pieces = max(1, int(np.ceil((b - a) / dt - 1e-12)))
        grid.append(np.linspace(a, b, pieces + 1)[:-1])
    grid.append(np.asarray([sys.T]))
    return np.concatenate(grid)


def simulate_state(sys: ControlSystem, u: ControlSignal, n_steps: int = 800) -> Trajectory:
    """Fixed-step Runge-Kutta integration on a discontinuity-aligned grid.

    Stage controls come from inside the step: right limits at the step start
    and midpoint, the left limit at the step end.  Node slopes from both
    sides are stored so the returned trajectory interpolates with cubic
    Hermite accuracy between nodes.
    """
    ts = _simulation_grid(sys, u, n_steps)
    n = sys.n
    xs = np.empty((ts.size, n))
    xs[0] = sys.x0
    for i in range(ts.size - 1):
        a, b = ts[i], ts[i + 1]
        hstep = b - a
        mid = 0.5 * (a + b)
        x = xs[i]
        k1 = sys.f(x, u.eval(a, "right"))
        k2 = sys.f(x + 0.5 * hstep * k1, u.eval(mid, "right"))
        k3 = sys.f(x + 0.5 * hstep * k2, u.eval(mid, "right"))
        k4 = sys.f(x + hstep * k3, u.eval(b, "left"))
        xs[i + 1] = x + hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    sr = np.stack([sys.f(xs[i], u.eval(ts[i], "right")) for i in range(ts.size)])
    sl = np.stack([sys.f(xs[i], u.eval(ts[i], "left")) for i in range(ts.size)])
    return Trajectory(ts, xs, slopes_right=sr, slopes_left=sl)


def simulate_costate(sys: ControlSystem, u: ControlSignal, x: Trajectory) -> Trajectory:
    """Backward sweep of p' = -grad_x_f(x, u)^T p from p(T) = grad g(x(T))."""
    ts = x.times
    n = sys.n
    ps = np.empty((ts.size, n))
    ps[-1] = sys.grad_g(x.eval(sys.T))

    def rhs(t, p, side):
        A = np.atleast_2d(sys.grad_x_f(x.eval(t), u.eval(t, side)))
        return -A.T @ p

    for i in range(ts.size - 1, 0, -1):
        b, a = ts[i], ts[i - 1]
        hstep = a - b  # negative
        mid = 0.5 * (a + b)
        p = ps[i]
        k1 = rhs(b, p, "left")
        k2 = rhs(mid, p + 0.5 * hstep * k1, "right")
        k3 = rhs(mid, p + 0.5 * hstep * k2, "right")
        k4 = rhs(a, p + hstep * k3, "right")
        ps[i - 1] = p + hstep / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    sr = np.stack([rhs(ts[i], ps[i], "right") for i in range(ts.size)])
    sl = np.stack([rhs(ts[i], ps[i], "left") for i in range(ts.size)])
    return Trajectory(ts, ps, slopes_right=sr, slopes_left=sl)


def output_J(sys: ControlSystem, u: ControlSignal, n_steps: int = 800) -> float:
    x = simulate_state(sys, u, n_steps)
    return float(sys.g(x.eval(sys.T)))


def fd_oracle(
    sys: ControlSystem,
    u: ControlSignal,
    h0: float = 0.0,
    side: str = "right",
    steps: Sequence[float] | None = None,
    n_steps: int = 800,
) -> dict:
    """One-sided difference quotients of J at h0, with extrapolation.

    The quotient error is first order in the step for a one-sided limit, so
    the last two quotients Richardson-combine to the reported value.
    """
    if side not in _SIDES:
        raise DomainError("side must be 'left' or 'right'")
    if steps is None:
        steps = [1e-2 * 2.0**-k for k in range(4)]
    steps = sorted(float(s) for s in steps)[::-1]
    if len(steps) < 2:
        raise DomainError("need at least two steps to extrapolate")
    J0 = output_J(sys, u.shifted(h0) if h0 else u, n_steps)
    quots = []
    for s in steps:
        if side == "right":
            q = (output_J(sys, u.shifted(h0 + s), n_steps) - J0) / s
        else:
            q = (J0 - output_J(sys, u.shifted(h0 - s), n_steps)) / s
        quots.append(q)
    extrapolated = 2.0 * quots[-1] - quots[-2]
    return {"steps": steps, "quotients": quots, "extrapolated": extrapolated, "J0": J0}


@dataclass
class SensitivityReport:
    value: float
    side: str
    h: float
    window: str
    atom_mass_S: np.ndarray
    atom_mass_T: np.ndarray
    measure_tv: float
    converged: bool
    budgets: dict
    cauchy_trace: list
    measure: DiscreteMeasure = field(repr=False, default=None)
    limit: MeasureLimit = field(repr=False, default=None)
    state: Trajectory = field(repr=False, default=None)
    costate: Trajectory = field(repr=False, default=None)

    def to_json(self, path) -> None:
        doc = {
            "schema_version": 1,
            "kind": "sensitivity-report",
            "value": self.value,
            "side": self.side,
            "h": self.h,
            "window": self.window,
            "atom_mass_S": [float(v) for v in np.atleast_1d(self.atom_mass_S)],
            "atom_mass_T": [float(v) for v in np.atleast_1d(self.atom_mass_T)],
            "measure_total_variation": self.measure_tv,
            "converged": self.converged,
            "budgets": self.budgets,
            "cauchy_trace": self.cauchy_trace,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def endpoint_atom(mu: DiscreteMeasure, end: str) -> np.ndarray:
    """Total weight of the atoms snapped to the window end S or T."""
    if end == "S":
        sel = mu.times < mu.S + mu.endpoint_snap
    elif end == "T":
        sel = mu.times >= mu.T - mu.endpoint_snap
    else:
        raise DomainError("end must be 'S' or 'T'")
    return mu.weights[sel].sum(axis=0)

_WINDOW_FOR_SIDE = {"right": "right_open", "left": "left_open", "two_sided": "closed"}


def sensitivity_derivative(
    sys: ControlSystem,
    u: ControlSignal,
    h: float = 0.0,
    side: str = "right",
    *,
    measure_levels: int = 14,
    n_steps: int = 800,
    measure_tol: float = 1e-3,
    continuity_tol: float = 1e-9,
) -> SensitivityReport:
    """One-sided derivative of h |-> J(u^h) through the adjoint and measure.

    The derivative from the requested side is minus the integral of the
    adjoint against the time measure of the field f(., u^h(.)), built along
    the perturbed trajectory, over the window of [S, T] open at the matching
    end.  side='two_sided' uses the closed window and demands the control be
    continuous at both window ends; otherwise the two one-sided values
    differ and no two-sided derivative exists.
    """
    if side not in ("left", "right", "two_sided"):
        raise DomainError("side must be 'left', 'right' or 'two_sided'")
    u_h = u.shifted(h) if h else u
    if side == "two_sided":
        jumps = [
            end
            for end, t in (("S", sys.S), ("T", sys.T))
            if not u_h.is_continuous_at(t, continuity_tol)
        ]
        if jumps:
            raise DomainError(
                "two-sided derivative needs the control continuous at the "
                f"window ends; it jumps at {', '.join(jumps)}"
            )
    x_h = simulate_state(sys, u_h, n_steps)
    p_h = simulate_costate(sys, u_h, x_h)
    m = sys.m_field(u_h)
    limit = partial_variation_measure(m, x_h, levels=measure_levels, tol=measure_tol)
    mu = limit.measure
    window = _WINDOW_FOR_SIDE[side]
    value = -integrate(p_h.eval_many, mu, window)
    return SensitivityReport(
        value=float(value),
        side=side,
        h=float(h),
        window=window,
        atom_mass_S=endpoint_atom(mu, "S"),
        atom_mass_T=endpoint_atom(mu, "T"),
        measure_tv=mu.total_variation,
        converged=limit.converged,
        budgets=limit.budgets,
        cauchy_trace=limit.cauchy_trace,
        measure=mu,
        limit=limit,
        state=x_h,
        costate=p_h,
    )


def smooth_gradient(sys: ControlSystem, u: ControlSignal, n_steps: int = 800) -> float:
    """Chain-rule shift gradient for differentiable controls.

    Integrates p^T grad_u_f(x, u) u' over [S, T] by the trapezoid rule on
    the simulation grid.  Needs grad_u_f on the system and a derivative on
    the control.  Finite differences of J orient opposite to this integral:
    a positive value here goes with a falling J under a small delay.
    """
    if sys.grad_u_f is None:
        raise DomainError("system has no grad_u_f")
    if u.derivative is None:
        raise DomainError("control has no derivative callable")
    x = simulate_state(sys, u, n_steps)
    p = simulate_costate(sys, u, x)
    ts = x.times
    du = np.atleast_2d(np.asarray(u.derivative(ts), dtype=float))
    if du.shape[0] != ts.size:
        du = du.T
    vals = np.empty(ts.size)
    for i, t in enumerate(ts):
        B = np.atleast_2d(sys.grad_u_f(x.eval(t), u.eval(t, "right")))
        vals[i] = p.eval(t) @ (B @ du[i])
    return float(np.trapezoid(vals, ts))


def filippov_check(
    sys: ControlSystem,
    u: ControlSignal,
    hs: Sequence[float] | None = None,
    n_steps: int = 800,
    probe_count: int = 2049,
) -> dict:
    """Sup-norm deviation of the delayed trajectory, per delay size.

    Reports sup_t |x^h(t) - x(t)| together with the ratio to h; a bounded,
    slowly varying ratio across dyadic h is the expected first-order
    response to a shift of an integrable control.
    """
    if hs is None:
        hs = [2.0**-k for k in range(3, 9)]
    x0 = simulate_state(sys, u, n_steps)
    probes = np.linspace(sys.S, sys.T, probe_count)
    base = x0.eval_many(probes)
    rows = []
    for h in hs:
        xh = simulate_state(sys, u.shifted(float(h)), n_steps)
        diff = float(np.max(np.linalg.norm(xh.eval_many(probes) - base, axis=1)))
        rows.append({"h": float(h), "sup_diff": diff, "ratio": diff / float(h)})
    ratios = [r["ratio"] for r in rows]
    spread = (max(ratios) / min(ratios)) if min(ratios) > 0 else float("inf")
    return {"rows": rows, "spread": spread}
