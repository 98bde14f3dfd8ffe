"""Discrete time measures induced by a field along an arc, and their limit.

Given a field m(t, x) and a partition of [S, T], each cell [t_i, t_{i+1}]
contributes the increment m(t_{i+1}, xi_i) - m(t_i, xi_i) as an atom sitting
at the cell's left endpoint, with xi_i a state probe taken on the arc inside
the cell.  Refining the partitions dyadically drives these measures to a
weak-star limit whenever the field has bounded variation along the tube; the
refinement loop certifies that with a Cauchy criterion over a fixed catalog
of Lipschitz test functions and compares each discrepancy against the
variation-budget bound it must stay under.

Endpoint handling: partitions always contain the buffer nodes S + tau and
T - tau with tau seven orders below the window length.  Any persistent jump
of the field at S or T then lands in a buffer cell whose atom carries only
that jump (plus O(tau) of regular mass), so integration over the half-open
windows [S, T) and (S, T] reduces to dropping whole endpoint atoms.  Atoms
are never split.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConsistencyError, DomainError
from .fields import Field
from .trajectory import Partition, Trajectory
from .variation import EngineConfig, VariationContext, _eps_descent

WINDOWS = ("closed", "left_open", "right_open")


@dataclass(frozen=True)
class TestFunction:
    """A test integrand with a declared Lipschitz constant."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz: float


def default_test_functions(S: float, T: float) -> list[TestFunction]:
    """Constants, a ramp, low harmonics and a ladder of hats."""
    span = T - S
    funcs = [
        TestFunction("const", lambda ts: np.ones_like(ts), 0.0),
        TestFunction("ramp", lambda ts: ts, 1.0),
    ]
    for k in range(1, 5):
        w = 2.0 * np.pi * k / span
        funcs.append(
            TestFunction(f"sin{k}", lambda ts, w=w, S=S: np.sin(w * (ts - S)), w)
        )
        funcs.append(
            TestFunction(f"cos{k}", lambda ts, w=w, S=S: np.cos(w * (ts - S)), w)
        )
    width = span / 8.0
    for i in range(1, 8):
        c = S + i * width

        def hat(ts, c=c, width=width):
            return np.maximum(0.0, 1.0 - np.abs(ts - c) / width)

        funcs.append(TestFunction(f"hat{i}", hat, 1.0 / width))
    return funcs


@dataclass(eq=False)
class DiscreteMeasure:
    """Finitely many vector atoms on [S, T].

    times are nondecreasing atom locations, weights the (N, r) atom values.
    An atom stamps the left end of the mass it carries, so for windowed
    integration the S-endpoint atoms are those with t < S + endpoint_snap
    and the T-endpoint atoms those with t >= T - endpoint_snap.  Grid-built
    measures set endpoint_snap to the endpoint buffer width; raw hand-built
    measures use zero, which makes only an atom exactly at T an endpoint one.
    """

    times: np.ndarray
    weights: np.ndarray
    S: float
    T: float
    endpoint_snap: float = 0.0
    mesh: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if t.ndim != 1 or w.shape[0] != t.size:
            raise DomainError("atom times and weights disagree in shape")
        if np.any(np.diff(t) < 0):
            raise DomainError("atom times must be nondecreasing")
        self.times = t
        self.weights = w

    @property
    def r(self) -> int:
        return self.weights.shape[1]

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.linalg.norm(self.weights, axis=1)))

    def window_mask(self, window: str) -> np.ndarray:
        if window not in WINDOWS:
            raise DomainError(f"window must be one of {WINDOWS}")
        mask = np.ones(self.times.size, dtype=bool)
        snap = self.endpoint_snap
        if window == "left_open":
            mask &= self.times >= self.S + snap
        elif window == "right_open":
            mask &= self.times < self.T - snap
        return mask

    def to_csv(self, path) -> None:
        """Write the atoms as CSV, skipping rows whose weight is exactly zero.

        Step-like fields produce grids where almost every cell contributes
        nothing; listing only the carriers keeps the artifact readable.
        """
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"w_{j + 1}" for j in range(self.r)])
            for t, row in zip(self.times, self.weights):
                if np.any(row != 0.0):
                    w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def discrete_measure(
    m: Field,
    xbar: Trajectory,
    P: Partition | Sequence[float],
    xi_rule: str = "left",
    xi_points: np.ndarray | None = None,
    rho: float | None = None,
) -> DiscreteMeasure:
    """Cell-increment measure of m along the arc for one partition.

    xi_rule picks the state probe per cell ("left", "right", "mid" evaluate
    the arc at the matching cell time); explicit xi_points are validated to
    lie within rho (default: the partition mesh) of the arc.
    """
    if not isinstance(P, Partition):
        P = Partition(tuple(P))
    g = np.asarray(P.grid)
    t_lo = g[:-1]
    t_hi = g[1:]
    if xi_points is not None:
        xi = np.asarray(xi_points, dtype=float)
        if xi.ndim == 1:
            xi = xi[:, None]
        if xi.shape[0] != t_lo.size:
            raise DomainError("one xi point per cell required")
        rho = P.diam if rho is None else rho
        for k in range(t_lo.size):
            arc = xbar.range_samples(t_lo[k], t_hi[k])
            d = np.min(np.linalg.norm(arc - xi[k], axis=1))
            if d > rho + 1e-9:
                raise DomainError(
                    f"xi for cell {k} sits {d:.3g} from the arc, beyond rho={rho:.3g}"
                )
    else:
        if xi_rule == "left":
            xi = xbar.eval_many(t_lo)
        elif xi_rule == "right":
            xi = xbar.eval_many(t_hi)
        elif xi_rule == "mid":
            xi = xbar.eval_many(0.5 * (t_lo + t_hi))
        else:
            raise DomainError("xi_rule must be left, right or mid")
    w = m.values_many(t_hi, xi) - m.values_many(t_lo, xi)
    return DiscreteMeasure(
        times=t_lo, weights=w, S=float(g[0]), T=float(g[-1]), mesh=P.diam
    )


def integrate(g: Callable, mu: DiscreteMeasure, window: str = "closed") -> float:
    """sum of g(t_i)^T w_i over the atoms inside the window.

    g maps a time array to (K,) values when the measure is scalar or to
    (K, r) rows otherwise; plain scalar callables are lifted pointwise.
    """
    mask = mu.window_mask(window)
    ts = mu.times[mask]
    if ts.size == 0:
        return 0.0
    try:
        gv = np.asarray(g(ts), dtype=float)
        if gv.shape[0] != ts.size:
            raise ValueError
    except (TypeError, ValueError):
        gv = np.asarray([g(float(t)) for t in ts], dtype=float)
    w = mu.weights[mask]
    if gv.ndim == 1:
        if mu.r != 1:
            raise DomainError("scalar integrand against a vector measure")
        return float(np.dot(gv, w[:, 0]))
    if gv.shape != w.shape:
        raise DomainError(f"integrand rows {gv.shape} do not match atoms {w.shape}")
    return float(np.sum(gv * w))


@dataclass
class MeasureLimit:
    """Finest refinement measure plus the convergence evidence."""

    measure: DiscreteMeasure
    cauchy_trace: list
    test_functions: list
    converged: bool
    budgets: dict = field(default_factory=dict)

    def to_json(self, path) -> None:
        doc = {
            "schema_version": 1,
            "kind": "measure-limit",
            "converged": self.converged,
            "test_functions": self.test_functions,
            "budgets": self.budgets,
            "cauchy_trace": self.cauchy_trace,
            "total_variation": self.measure.total_variation,
            "atom_count": int(self.measure.times.size),
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


def _level_grid(
    S: float, T: float, level: int, base_cells: int, seeds: Sequence[float], tau: float
) -> Partition:
    base = np.linspace(S, T, base_cells * 2**level + 1)
    extra = [s for s in seeds if S < s < T]
    extra += [S + tau, T - tau]
    g = np.union1d(base, np.asarray(extra, dtype=float))
    keep = np.concatenate(([True], np.diff(g) > tau * 1e-3))
    keep[-1] = True
    return Partition(tuple(g[keep]))


def variation_budgets(
    m: Field,
    xbar: Trajectory,
    delta: float,
    *,
    config: EngineConfig | None = None,
) -> dict:
    """Cumulative-variation totals of m and of its x-gradient at radius delta.

    These feed the refinement-discrepancy bound.  Engine values are certified
    lower bounds; treat domination checks against them as indicative rather
    than proof.
    """
    cfg = config or EngineConfig(eps_steps=5, validate_bound=False)
    ctx_m = VariationContext(m.as_multifunction(), xbar, config=cfg, radii=[delta])
    v_m, _, _, _ = _eps_descent(ctx_m, delta, cfg.stop_tol)
    out = {"field": float(v_m[-1]), "delta": delta}
    if m.grad_x_m is not None:
        ctx_g = VariationContext(m.gradient_as_multifunction(), xbar, config=cfg, radii=[delta])
        v_g, _, _, _ = _eps_descent(ctx_g, delta, cfg.stop_tol)
        out["gradient"] = float(v_g[-1])
    return out


def partial_variation_measure(
    m: Field,
    xbar: Trajectory,
    levels: int = 9,
    test_functions: Sequence[TestFunction] | None = None,
    tol: float = 1e-3,
    *,
    base_cells: int = 8,
    xi_rule: str = "left",
    endpoint_buffer: float | None = None,
    budgets: dict | None = None,
    budget_delta: float | None = None,
) -> MeasureLimit:
    """Weak-star refinement limit of the cell-increment measures.

    Runs dyadic partitions (seeded with the field's breakpoints and the
    endpoint buffer nodes) until every catalog test function moves by less
    than tol between consecutive levels, recording for each level the worst
    discrepancy next to the modulus bound theta_g(mesh) * H +
    2 * (theta_xbar(mesh) + rho) * sup|g| * H_grad built from the variation
    budgets H of the field and H_grad of its gradient.
    """
    if levels < 1:
        raise DomainError("need at least one refinement level")
    S, T = m.S, m.T
    span = T - S
    tau = endpoint_buffer if endpoint_buffer is not None else span * 1e-7
    tfs = list(test_functions) if test_functions is not None else default_test_functions(S, T)
    if budgets is None:
        delta = budget_delta
        if delta is None:
            delta = span / 20.0 if m.delta_prime is None else m.delta_prime / 2.0
        budgets = variation_budgets(m, xbar, delta)
    h_field = budgets.get("field", 0.0)
    h_grad = budgets.get("gradient", 0.0)

    prev_vals = None
    prev_mesh = None
    mu = None
    trace = []
    converged = False
    r = None
    for level in range(levels):
        part = _level_grid(S, T, level, base_cells, m.breakpoints, tau)
        mu = discrete_measure(m, xbar, part, xi_rule=xi_rule)
        mu.endpoint_snap = tau
        if r is None:
            r = mu.r
            if r > 1:
                scalar = tfs
                tfs = []
                for tf in scalar:
                    for comp in range(r):
                        def vec_fn(ts, tf=tf, comp=comp, r=r):
                            out = np.zeros((ts.size, r))
                            out[:, comp] = tf.fn(ts)
                            return out

                        tfs.append(TestFunction(f"{tf.name}[{comp}]", vec_fn, tf.lipschitz))
        vals = np.array([integrate(tf.fn, mu) for tf in tfs])
        if prev_vals is not None:
            diffs = np.abs(vals - prev_vals)
            worst = int(np.argmax(diffs))
            sup_d = float(diffs[worst])
            # modulus bound for the step from the previous level to this one
            theta_x = xbar.continuity_modulus(prev_mesh)
            tf = tfs[worst]
            sup_g = float(np.max(np.abs(tf.fn(np.linspace(S, T, 513)))))
            bound = tf.lipschitz * prev_mesh * h_field + 2.0 * theta_x * sup_g * h_grad
            row = {
                "level": level,
                "mesh": mu.mesh,
                "sup_discrepancy": sup_d,
                "worst_function": tfs[worst].name,
                "bound": bound,
                "dominated": bool(sup_d <= bound + 1e-12),
            }
            trace.append(row)
            if sup_d < tol:
                converged = True
                break
        prev_vals = vals
        prev_mesh = mu.mesh
    return MeasureLimit(
        measure=mu,
        cauchy_trace=trace,
        test_functions=[tf.name for tf in tfs],
        converged=converged,
        budgets=budgets,
    )


# ----------------------------------------------------------------------
# interval bound


class IntervalBoundChecker:
    """Bound |mu([a,b]) - (m(b,xi) - m(a,xi))| by modulus and jump terms.

    Builds the refinement measure once plus cumulative-variation curves for
    the field and its gradient at tube radius delta, then answers repeated
    interval queries.  Probe endpoints snap to the variation grid; one-sided
    variation jumps at the endpoints are read off as one-grid-cell
    differences of the curve, which overestimates them and so only widens
    the right-hand side.
    """

    def __init__(
        self,
        m: Field,
        xbar: Trajectory,
        delta: float | None = None,
        *,
        levels: int = 8,
        config: EngineConfig | None = None,
    ):
        if m.grad_x_m is None:
            raise DomainError("interval bound needs the field gradient")
        span = m.T - m.S
        if delta is None:
            delta = span / 20.0 if m.delta_prime is None else m.delta_prime / 2.0
        self.m = m
        self.xbar = xbar
        self.delta = delta
        self.tau = span * 1e-7
        self.limit = partial_variation_measure(
            m, xbar, levels=levels, budget_delta=delta, endpoint_buffer=self.tau
        )
        cfg = config or EngineConfig(validate_bound=False)
        extra = [m.S + self.tau, m.T - self.tau]
        self.ctx_m = VariationContext(m.as_multifunction(), xbar, config=cfg, radii=[delta], extra_times=extra)
        self.v_m, _, _, _ = _eps_descent(self.ctx_m, delta, cfg.stop_tol)
        self.ctx_g = VariationContext(
            m.gradient_as_multifunction(), xbar, config=cfg, radii=[delta], extra_times=extra
        )
        self.v_g, _, _, _ = _eps_descent(self.ctx_g, delta, cfg.stop_tol)

    def _variation_index(self, t: float) -> int:
        try:
            return self.ctx_m.index_of(t)
        except DomainError:
            # probe fell between variation nodes; nearest node plus the
            # one-cell extension below keeps the bound conservative
            return int(np.argmin(np.abs(self.ctx_m.dp.grid - t)))

    def check(self, a: float, b: float, xi_time: float | None = None) -> dict:
        m, xbar = self.m, self.xbar
        if not (m.S <= a < b <= m.T):
            raise DomainError("need S <= a < b <= T")
        mu = self.limit.measure
        nodes = np.append(mu.times, m.T)
        a_s = float(nodes[np.argmin(np.abs(nodes - a))])
        b_s = float(nodes[np.argmin(np.abs(nodes - b))])
        if b_s <= a_s:
            raise DomainError("interval collapsed after grid snapping")
        theta = xbar.continuity_modulus(b_s - a_s)
        if theta > self.delta:
            return {
                "status": "rejected-modulus",
                "a": a_s,
                "b": b_s,
                "theta": theta,
                "delta": self.delta,
            }
        sel = (mu.times >= a_s - 1e-15) & (mu.times < b_s - 1e-15)
        mu_ab = mu.weights[sel].sum(axis=0)
        t_star = 0.5 * (a_s + b_s) if xi_time is None else float(xi_time)
        if not (a_s <= t_star <= b_s):
            raise DomainError("xi probe time must lie inside the interval")
        xi = xbar.eval(t_star)
        diff = mu_ab - (m.value(b_s, xi) - m.value(a_s, xi))
        lhs = float(np.linalg.norm(diff))
        ia = self._variation_index(a_s)
        ib = self._variation_index(b_s)
        ja = max(ia - 1, 0)
        jb = min(ib + 1, self.v_m.size - 1)
        grad_term = theta * float(self.v_g[jb] - self.v_g[ja])
        jump_a = float(self.v_m[ia] - self.v_m[ja])
        jump_b = float(self.v_m[jb] - self.v_m[ib])
        rhs = grad_term + jump_a + jump_b
        return {
            "status": "ok",
            "a": a_s,
            "b": b_s,
            "xi_time": t_star,
            "lhs": lhs,
            "rhs": rhs,
            "grad_term": grad_term,
            "jump_a": jump_a,
            "jump_b": jump_b,
            "margin": rhs - lhs,
        }


def interval_bound_check(
    m: Field,
    xbar: Trajectory,
    a: float,
    b: float,
    xi_time: float | None = None,
    delta: float | None = None,
    *,
    checker: IntervalBoundChecker | None = None,
) -> dict:
    """One-shot interval bound; build an IntervalBoundChecker for many."""
    if checker is None:
        checker = IntervalBoundChecker(m, xbar, delta)
    return checker.check(a, b, xi_time)
