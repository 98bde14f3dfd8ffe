"""Built-in problem catalog: named fields, arcs, systems and controls.

Every entry lives on the unit window [0, 1] and ships with closed-form
expectations (variation profiles, total variations, atom positions, exact
derivatives) that the verification suite checks the engine against.  Entry
keys are stable identifiers used by scenario files; summaries state what the
object is and what is known about it in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .fields import BatchEval, Field, Multifunction
from .geometry import Box, Singleton
from .sensitivity import ControlSignal, ControlSystem
from .trajectory import constant_trajectory, ramp_trajectory


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    kind: str  # variation | tv | measure | system | control
    summary: str
    build: Callable[[], dict]


_REGISTRY: dict[str, CatalogEntry] = {}


def _register(key: str, kind: str, summary: str):
    def deco(fn):
        if key in _REGISTRY:
            raise DomainError(f"duplicate catalog key {key!r}")
        _REGISTRY[key] = CatalogEntry(key=key, kind=kind, summary=summary, build=fn)
        return fn

    return deco


def get(key: str) -> dict:
    if key not in _REGISTRY:
        known = ", ".join(sorted(_REGISTRY))
        raise DomainError(f"unknown catalog entry {key!r}; known: {known}")
    return _REGISTRY[key].build()


def entries(kind: str | None = None) -> list[CatalogEntry]:
    out = sorted(_REGISTRY.values(), key=lambda e: (e.kind, e.key))
    if kind is not None:
        out = [e for e in out if e.kind == kind]
    return out


def list_catalog() -> str:
    rows = [(e.key, e.kind, e.summary) for e in entries()]
    wk = max(len(r[0]) for r in rows)
    wd = max(len(r[1]) for r in rows)
    lines = [f"{'key':<{wk}}  {'kind':<{wd}}  summary"]
    lines.append("-" * len(lines[0]))
    for key, kind, summary in rows:
        lines.append(f"{key:<{wk}}  {kind:<{wd}}  {summary}")
    return "\n".join(lines)


# ----------------------------------------------------------------------
# scalar helper: an x-independent multifunction from a scalar signal


def scalar_multifunction(
    fn: Callable[[float], float],
    batch_fn: Callable[[np.ndarray], np.ndarray],
    breakpoints=(),
    c_bound: float | None = None,
) -> Multifunction:
    def ev(t, x, a):
        return Singleton(np.asarray([fn(float(t))]))

    return Multifunction(
        eval_fn=ev,
        S=0.0,
        T=1.0,
        delta_bar=1.0,
        c_bound=c_bound,
        gamma=lambda s: 0.0,
        breakpoints=breakpoints,
        batch=BatchEval("points", lambda ts, xs, a: np.asarray(batch_fn(ts), float)[:, None]),
    )


# ----------------------------------------------------------------------
# variation scenarios with closed forms


@_register(
    "section2-example",
    "variation",
    "F(t,x) = {t x} along x(t) = t; trajectory variation t^2/2, plain variation t",
)
def _build_model_problem():
    def ev(t, x, a):
        return Singleton(np.asarray([t * x[0]]))

    F = Multifunction(
        eval_fn=ev,
        S=0.0,
        T=1.0,
        delta_bar=1.0,
        c_bound=2.0,
        gamma=lambda s: s,
        batch=BatchEval("points", lambda ts, xs, a: (ts * xs[:, 0])[:, None]),
    )
    return {
        "F": F,
        "xbar": ramp_trajectory(),
        "expected": {
            "eta": lambda t: 0.5 * t * t,
            "eta_simple": lambda t: t,
            "X": Box(np.asarray([0.0]), np.asarray([1.0])),
            # exact mesh-and-radius value before either limit is taken
            "eta_delta_eps": lambda t, delta, eps: 0.5 * t * t + 0.5 * eps * t + delta * t,
        },
    }


@_register("constant-field", "variation", "constant singleton field; variation identically 0")
def _build_constant():
    F = scalar_multifunction(lambda t: 1.0, lambda ts: np.ones_like(ts), c_bound=1.5)
    return {
        "F": F,
        "xbar": constant_trajectory([0.0]),
        "expected": {"eta": lambda t: 0.0},
    }


def _two_steps_scalar(ts: np.ndarray) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    return np.where(ts >= 0.75, 3.0, np.where(ts >= 0.25, 2.0, 0.0))


@_register(
    "two-steps",
    "variation",
    "steps of size 2 at t=1/4 and 1 at t=3/4; total variation 3",
)
def _build_two_steps():
    F = scalar_multifunction(
        lambda t: float(_two_steps_scalar(np.asarray([t]))[0]),
        _two_steps_scalar,
        breakpoints=(0.25, 0.75),
        c_bound=3.5,
    )
    return {
        "F": F,
        "xbar": constant_trajectory([0.0]),
        "expected": {"tv": 3.0, "jumps": ((0.25, 2.0), (0.75, 1.0))},
    }


@_register(
    "jump-at-start",
    "variation",
    "unit jump exactly at the left window end, constant after",
)
def _build_jump_start():
    F = scalar_multifunction(
        lambda t: 0.0 if t <= 0.0 else 1.0,
        lambda ts: (np.asarray(ts) > 0.0).astype(float),
        c_bound=1.5,
    )
    return {
        "F": F,
        "xbar": constant_trajectory([0.0]),
        "expected": {"jump_S": 1.0, "jump_T": 0.0, "interior_eta": lambda t: 1.0},
    }


@_register(
    "jump-at-end",
    "variation",
    "jump of size 2 exactly at the right window end, constant before",
)
def _build_jump_end():
    F = scalar_multifunction(
        lambda t: 2.0 if t >= 1.0 else 0.0,
        lambda ts: 2.0 * (np.asarray(ts) >= 1.0).astype(float),
        c_bound=2.5,
    )
    return {
        "F": F,
        "xbar": constant_trajectory([0.0]),
        "expected": {"jump_S": 0.0, "jump_T": 2.0, "interior_eta": lambda t: 0.0},
    }


@_register(
    "jumps-both-ends",
    "variation",
    "jump 1 at the left end, 2 at the right end, drift 0.2 t between",
)
def _build_jumps_both():
    def fn(t):
        if t <= 0.0:
            return -1.0
        if t >= 1.0:
            return 2.2
        return 0.2 * t

    def batch(ts):
        ts = np.asarray(ts, dtype=float)
        return np.where(ts <= 0.0, -1.0, np.where(ts >= 1.0, 2.2, 0.2 * ts))

    F = scalar_multifunction(fn, batch, c_bound=2.5)
    return {
        "F": F,
        "xbar": constant_trajectory([0.0]),
        "expected": {
            "jump_S": 1.0,
            "jump_T": 2.0,
            "interior_eta": lambda t: 1.0 + 0.2 * t,
            "interior_regularized": lambda t: 0.2 * t,
        },
    }


# ----------------------------------------------------------------------
# total-variation suite: x-independent piecewise-monotone scalars


def _tv_entry(key, summary, fn, batch, tv, breakpoints=(), c_bound=None):
    @_register(key, "tv", summary)
    def _build():
        return {
            "F": scalar_multifunction(fn, batch, breakpoints=breakpoints, c_bound=c_bound),
            "xbar": constant_trajectory([0.0]),
            "scalar_fn": batch,
            "breakpoints": breakpoints,
            "expected_tv": tv,
        }


_tv_entry(
    "tv-step-half",
    "unit step at t=1/2; total variation 1",
    lambda t: 0.0 if t < 0.5 else 1.0,
    lambda ts: (np.asarray(ts) >= 0.5).astype(float),
    1.0,
    breakpoints=(0.5,),
    c_bound=1.5,
)

_tv_entry(
    "tv-quadratic",
    "t^2, monotone; total variation 1",
    lambda t: t * t,
    lambda ts: np.asarray(ts, float) ** 2,
    1.0,
    c_bound=1.5,
)

_tv_entry(
    "tv-sine",
    "sin(2 pi t); total variation 4",
    lambda t: float(np.sin(2 * np.pi * t)),
    lambda ts: np.sin(2 * np.pi * np.asarray(ts, float)),
    4.0,
    breakpoints=(0.25, 0.75),
    c_bound=1.5,
)


def _zigzag(ts):
    ts = np.asarray(ts, dtype=float)
    return 1.0 - np.abs(np.mod(8.0 * ts, 2.0) - 1.0)


_tv_entry(
    "tv-zigzag",
    "triangle wave with 4 full periods; total variation 8",
    lambda t: float(_zigzag(np.asarray([t]))[0]),
    _zigzag,
    8.0,
    breakpoints=tuple(k / 8.0 for k in range(1, 8)),
    c_bound=1.5,
)


def _staircase(ts):
    ts = np.asarray(ts, dtype=float)
    return np.floor(5.0 * ts) / 5.0


_tv_entry(
    "tv-staircase",
    "floor(5t)/5, five jumps of 0.2 (last exactly at t=1); total variation 1",
    lambda t: float(_staircase(np.asarray([t]))[0]),
    _staircase,
    1.0,
    breakpoints=(0.2, 0.4, 0.6, 0.8),
    c_bound=1.5,
)


# ----------------------------------------------------------------------
# measure scenarios: fields with gradients along an arc


@_register(
    "step-half",
    "measure",
    "field chi_{t>=1/2}, x-independent; the time measure is a unit atom at 1/2",
)
def _build_step_half_measure():
    field = Field(
        m=lambda t, x: np.asarray([0.0 if t < 0.5 else 1.0]),
        S=0.0,
        T=1.0,
        grad_x_m=lambda t, x: np.zeros((1, 1)),
        delta_prime=1.0,
        breakpoints=(0.5,),
        batch_m=lambda ts, xs: (np.asarray(ts) >= 0.5).astype(float)[:, None],
        batch_grad=lambda ts, xs: np.zeros((np.asarray(ts).size, 1, 1)),
        gamma=lambda s: 0.0,
        c_bound=1.5,
    )
    return {
        "field": field,
        "xbar": ramp_trajectory(),
        "expected": {
            "atom_time": 0.5,
            "atom_mass": 1.0,
            "pairing": lambda g: float(np.asarray(g(np.asarray([0.5])))[0]),
        },
    }


@_register(
    "field-smooth",
    "measure",
    "m(t,x) = sin(2 pi t)(1 + x/2) along x(t) = t; smooth density in time",
)
def _build_field_smooth():
    two_pi = 2.0 * np.pi

    field = Field(
        m=lambda t, x: np.asarray([np.sin(two_pi * t) * (1.0 + 0.5 * x[0])]),
        S=0.0,
        T=1.0,
        grad_x_m=lambda t, x: np.asarray([[0.5 * np.sin(two_pi * t)]]),
        delta_prime=1.0,
        batch_m=lambda ts, xs: (np.sin(two_pi * np.asarray(ts)) * (1.0 + 0.5 * xs[:, 0]))[:, None],
        batch_grad=lambda ts, xs: (0.5 * np.sin(two_pi * np.asarray(ts)))[:, None, None],
        gamma=lambda s: 0.5 * s,
        c_bound=2.0,
    )
    return {
        "field": field,
        "xbar": ramp_trajectory(),
        "expected": {
            # density of the time measure along the identity arc
            "density": lambda ts: two_pi * np.cos(two_pi * np.asarray(ts)) * (1.0 + 0.5 * np.asarray(ts)),
        },
    }


@_register(
    "bilinear-field",
    "measure",
    "m(t,x) = t x along x(t) = t; gradient field is the ramp t",
)
def _build_bilinear_field():
    field = Field(
        m=lambda t, x: np.asarray([t * x[0]]),
        S=0.0,
        T=1.0,
        grad_x_m=lambda t, x: np.asarray([[t]]),
        delta_prime=0.5,
        batch_m=lambda ts, xs: (np.asarray(ts) * xs[:, 0])[:, None],
        batch_grad=lambda ts, xs: np.asarray(ts, float)[:, None, None],
        gamma=lambda s: s,
        c_bound=2.0,
    )
    return {
        "field": field,
        "xbar": ramp_trajectory(),
        "expected": {"density": lambda ts: np.asarray(ts, float)},
    }


@_register(
    "two-steps-field",
    "measure",
    "x-independent two-step field; atoms of mass 2 at 1/4 and 1 at 3/4",
)
def _build_two_steps_field():
    field = Field(
        m=lambda t, x: np.asarray([float(_two_steps_scalar(np.asarray([t]))[0])]),
        S=0.0,
        T=1.0,
        grad_x_m=lambda t, x: np.zeros((1, 1)),
        delta_prime=1.0,
        breakpoints=(0.25, 0.75),
        batch_m=lambda ts, xs: _two_steps_scalar(ts)[:, None],
        batch_grad=lambda ts, xs: np.zeros((np.asarray(ts).size, 1, 1)),
        gamma=lambda s: 0.0,
        c_bound=3.5,
    )
    return {
        "field": field,
        "xbar": ramp_trajectory(),
        "expected": {"atoms": ((0.25, 2.0), (0.75, 1.0))},
    }


# ----------------------------------------------------------------------
# control systems


@_register("integrator", "system", "x' = u, J = x(1); adjoint constant 1")
def _build_integrator():
    return {
        "system": ControlSystem(
            f=lambda x, u: np.asarray([u[0]]),
            grad_x_f=lambda x, u: np.zeros((1, 1)),
            g=lambda x: float(x[0]),
            grad_g=lambda x: np.asarray([1.0]),
            x0=np.asarray([0.0]),
            S=0.0,
            T=1.0,
            grad_u_f=lambda x, u: np.asarray([[1.0]]),
            batch_f=lambda xs, us: us[:, :1],
            batch_grad_x=lambda xs, us: np.zeros((xs.shape[0], 1, 1)),
            gamma=lambda s: 0.0,
            c_bound=2.0,
        )
    }


@_register(
    "relaxation",
    "system",
    "x' = -x + u, J = x(1); adjoint e^{-(1-t)}",
)
def _build_relaxation():
    return {
        "system": ControlSystem(
            f=lambda x, u: np.asarray([-x[0] + u[0]]),
            grad_x_f=lambda x, u: np.asarray([[-1.0]]),
            g=lambda x: float(x[0]),
            grad_g=lambda x: np.asarray([1.0]),
            x0=np.asarray([0.0]),
            S=0.0,
            T=1.0,
            grad_u_f=lambda x, u: np.asarray([[1.0]]),
            batch_f=lambda xs, us: -xs[:, :1] + us[:, :1],
            batch_grad_x=lambda xs, us: np.full((xs.shape[0], 1, 1), -1.0),
            gamma=lambda s: s,
            c_bound=4.0,
        )
    }


@_register(
    "relaxation-abs",
    "system",
    "x' = -x + |u|, J = x(1); Lipschitz but not differentiable in u",
)
def _build_relaxation_abs():
    return {
        "system": ControlSystem(
            f=lambda x, u: np.asarray([-x[0] + abs(u[0])]),
            grad_x_f=lambda x, u: np.asarray([[-1.0]]),
            g=lambda x: float(x[0]),
            grad_g=lambda x: np.asarray([1.0]),
            x0=np.asarray([0.0]),
            S=0.0,
            T=1.0,
            batch_f=lambda xs, us: -xs[:, :1] + np.abs(us[:, :1]),
            batch_grad_x=lambda xs, us: np.full((xs.shape[0], 1, 1), -1.0),
            gamma=lambda s: s,
            c_bound=4.0,
        )
    }


# ----------------------------------------------------------------------
# controls on [0, 1]


@_register("ramp", "control", "u(t) = t, continuous with unit slope")
def _build_ramp_control():
    return {
        "control": ControlSignal.sampled(
            [0.0, 1.0], [[0.0], [1.0]], derivative=lambda ts: np.ones((np.asarray(ts).size, 1))
        )
    }


@_register("hold-one", "control", "u identically 1")
def _build_hold_one():
    return {"control": ControlSignal.piecewise_constant([], [[1.0]], 0.0, 1.0)}


@_register("bangbang-half", "control", "u = 0 then 1, switching at t=1/2")
def _build_bangbang():
    return {"control": ControlSignal.piecewise_constant([0.5], [[0.0], [1.0]], 0.0, 1.0)}


@_register("bump", "control", "u = 1 on [1/4, 3/4), else 0; continuous at both window ends")
def _build_bump():
    return {
        "control": ControlSignal.piecewise_constant(
            [0.25, 0.75], [[0.0], [1.0], [0.0]], 0.0, 1.0
        )
    }


@_register("jump-at-T", "control", "u = 0 up to the right window end, 1 exactly there")
def _build_jump_at_T():
    return {"control": ControlSignal.piecewise_constant([1.0], [[0.0], [1.0]], 0.0, 1.0)}


@_register("sine", "control", "u(t) = sin(2 pi t), equal window-end values")
def _build_sine_control():
    ts = np.linspace(0.0, 1.0, 257)
    two_pi = 2.0 * np.pi
    return {
        "control": ControlSignal.sampled(
            ts,
            np.sin(two_pi * ts)[:, None],
            derivative=lambda q: (two_pi * np.cos(two_pi * np.asarray(q)))[:, None],
            kinks=tuple(ts[1:-1]),
        )
    }
