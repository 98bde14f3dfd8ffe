"""Acceptance checks: closed forms, oracles and property suites in one place.

Each criterion function builds its own problems from the catalog, runs the
engine, and returns a CheckResult with a pass flag and a human-readable
detail line.  The same functions back both the test suite and the CLI
verify-all subcommand, so a shipped binary can re-certify itself.

The total-variation oracle here is deliberately independent of the engine:
it never touches partitions-as-chains, tubes or Hausdorff code, only summed
absolute differences over refining grids.
"""

from __future__ import annotations

import functools
import time
from dataclasses import dataclass, field

import numpy as np

from . import catalog
from .measure import (
    default_test_functions,
    integrate,
    IntervalBoundChecker,
    partial_variation_measure,
)
from .sensitivity import (
    endpoint_atom,
    fd_oracle,
    filippov_check,
    sensitivity_derivative,
    simulate_state,
)
from .variation import (
    EngineConfig,
    check_endpoint_identities,
    check_increment_bound,
    check_monotone_nesting,
    eta,
    eta_profile,
    eta_simple,
)


def brute_force_total_variation(
    batch_fn,
    S: float = 0.0,
    T: float = 1.0,
    breakpoints=(),
    max_depth: int = 14,
    tol: float = 1e-9,
) -> float:
    """Sum of |f(t_{i+1}) - f(t_i)| over refining grids until stable.

    batch_fn maps a time array to values.  Grids are dyadic unions with the
    declared breakpoints so jump locations are always sampled exactly.
    """
    bp = np.asarray(sorted(breakpoints), dtype=float)
    prev = None
    for d in range(6, max_depth + 1):
        g = np.linspace(S, T, 2**d + 1)
        if bp.size:
            g = np.union1d(g, bp)
        v = np.asarray(batch_fn(g), dtype=float)
        tv = float(np.sum(np.abs(np.diff(v))))
        if prev is not None and abs(tv - prev) < tol:
            return tv
        prev = tv
    return prev


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    @property
    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {word} ({self.seconds:.2f} s) - {self.detail}"


def _timed(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> CheckResult:
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    return wrapper


@_timed
def criterion_1_closed_form_variation() -> CheckResult:
    """Bilinear field along the identity arc: eta = t^2/2, plain variation t."""
    entry = catalog.get("section2-example")
    F, xbar, exp = entry["F"], entry["xbar"], entry["expected"]
    times = [0.2, 0.4, 0.6, 0.8, 1.0]
    t0 = time.perf_counter()
    profile = eta_profile(F, xbar, times)
    prof = dict(profile.values)
    worst_eta = max(abs(prof[t] - exp["eta"](t)) for t in times)
    worst_simple = 0.0
    for t in times:
        v = eta_simple(F, xbar, t, exp["X"]).value
        worst_simple = max(worst_simple, abs(v - exp["eta_simple"](t)))
    elapsed = time.perf_counter() - t0
    ok = worst_eta <= 1e-3 and worst_simple <= 1e-3 and elapsed < 10.0
    return CheckResult(
        name="closed-form-variation",
        passed=ok,
        detail=(
            f"max |eta - t^2/2| = {worst_eta:.2e}, "
            f"max |eta_simple - t| = {worst_simple:.2e}, core {elapsed:.2f} s"
        ),
        data={"worst_eta": worst_eta, "worst_simple": worst_simple, "core_seconds": elapsed},
    )


_TV_KEYS = ("tv-step-half", "tv-quadratic", "tv-sine", "tv-zigzag", "tv-staircase")


@_timed
def criterion_2_total_variation() -> CheckResult:
    """Engine variation vs the independent grid-sum oracle on five scalars."""
    worst = 0.0
    rows = {}
    for key in _TV_KEYS:
        entry = catalog.get(key)
        oracle = brute_force_total_variation(
            entry["scalar_fn"], breakpoints=entry["breakpoints"]
        )
        if abs(oracle - entry["expected_tv"]) > 1e-9:
            return CheckResult(
                name="total-variation-agreement",
                passed=False,
                detail=f"oracle drifted from closed form on {key}: {oracle!r}",
            )
        got = eta(entry["F"], entry["xbar"], 1.0).value
        err = abs(got - oracle)
        rows[key] = {"oracle": oracle, "engine": got, "error": err}
        worst = max(worst, err)
    return CheckResult(
        name="total-variation-agreement",
        passed=worst <= 1e-6,
        detail=f"worst |engine - oracle| = {worst:.2e} over {len(rows)} scalars",
        data=rows,
    )


_ORDERING_KEYS = ("section2-example", "two-steps", "tv-sine")


@_timed
def criterion_3_ordering_suite() -> CheckResult:
    """Randomised ordering, monotonicity and increment probes, 100 each."""
    worst = 0.0
    n_rows = 0
    for key in _ORDERING_KEYS:
        entry = catalog.get(key)
        F, xbar = entry["F"], entry["xbar"]
        for checker in (check_monotone_nesting, check_increment_bound):
            rep = checker(F, xbar, probes=100, seed=7)
            n_rows += len(rep.rows)
            worst = max(worst, rep.worst)
            if not rep.ok:
                return CheckResult(
                    name="ordering-suite",
                    passed=False,
                    detail=f"{checker.__name__} violated on {key}: worst {rep.worst:.3e}",
                )
    return CheckResult(
        name="ordering-suite",
        passed=True,
        detail=f"{n_rows} probe rows across {len(_ORDERING_KEYS)} scenarios, worst margin {worst:.2e}",
    )


_ENDPOINT_KEYS = ("jump-at-start", "jump-at-end", "jumps-both-ends")


@_timed
def criterion_4_endpoint_identities() -> CheckResult:
    """Regularised-variation identities on constructed endpoint jumps."""
    worst = 0.0
    for key in _ENDPOINT_KEYS:
        entry = catalog.get(key)
        rep = check_endpoint_identities(entry["F"], entry["xbar"])
        exp = entry["expected"]
        jump_err = max(abs(rep.jump_S - exp["jump_S"]), abs(rep.jump_T - exp["jump_T"]))
        worst = max(worst, rep.worst_z1, rep.worst_z2, rep.worst_z3, jump_err)
        if not rep.passed or jump_err > 1e-3:
            return CheckResult(
                name="endpoint-identities",
                passed=False,
                detail=(
                    f"{key}: z1 {rep.worst_z1:.2e} z2 {rep.worst_z2:.2e} "
                    f"z3 {rep.worst_z3:.2e} jump err {jump_err:.2e}"
                ),
            )
    return CheckResult(
        name="endpoint-identities",
        passed=True,
        detail=f"worst residual {worst:.2e} over {len(_ENDPOINT_KEYS)} scenarios",
    )


@_timed
def criterion_5_step_measure() -> CheckResult:
    """Unit atom of the step field: position, mass, pairings, trace bound."""
    entry = catalog.get("step-half")
    fld, xbar, exp = entry["field"], entry["xbar"], entry["expected"]
    limit = partial_variation_measure(fld, xbar, levels=14)
    mu = limit.measure
    tv = mu.total_variation
    near = mu.times[np.linalg.norm(mu.weights, axis=1) > 0]
    sel = np.abs(mu.times - exp["atom_time"]) <= mu.mesh
    mass_near = float(np.sum(np.linalg.norm(mu.weights[sel], axis=1)))
    fraction = mass_near / tv if tv > 0 else 0.0
    tfs = default_test_functions(fld.S, fld.T)
    worst_pair = max(
        abs(integrate(tf.fn, mu) - exp["pairing"](tf.fn)) for tf in tfs
    )
    dominated = all(row["dominated"] for row in limit.cauchy_trace)
    ok = (
        abs(tv - exp["atom_mass"]) <= 1e-6
        and fraction >= 0.999
        and worst_pair <= 1e-3
        and dominated
        and limit.converged
    )
    return CheckResult(
        name="step-measure-concentration",
        passed=ok,
        detail=(
            f"mass {tv:.6f}, fraction within one cell {fraction:.6f}, "
            f"worst |<mu,g> - g(1/2)| = {worst_pair:.2e}, "
            f"trace dominated: {dominated}, levels run: {len(limit.cauchy_trace) + 1}"
        ),
        data={"atom_times": near.tolist(), "trace": limit.cauchy_trace},
    )


_UNIQUENESS_KEYS = ("step-half", "field-smooth", "bilinear-field")


@_timed
def criterion_6_limit_uniqueness() -> CheckResult:
    """Left-probe and right-probe refinement schemes land on the same limit."""
    worst = 0.0
    for key in _UNIQUENESS_KEYS:
        entry = catalog.get(key)
        fld, xbar = entry["field"], entry["xbar"]
        mus = {}
        for rule in ("left", "right"):
            lim = partial_variation_measure(fld, xbar, levels=11, tol=0.0, xi_rule=rule)
            mus[rule] = lim.measure
        tfs = default_test_functions(fld.S, fld.T)
        gap = max(
            abs(integrate(tf.fn, mus["left"]) - integrate(tf.fn, mus["right"]))
            for tf in tfs
        )
        worst = max(worst, gap)
    return CheckResult(
        name="limit-uniqueness",
        passed=worst <= 2e-3,
        detail=f"worst scheme disagreement {worst:.2e} over {len(_UNIQUENESS_KEYS)} fields",
    )


_INTERVAL_KEYS = ("bilinear-field", "field-smooth", "two-steps-field", "step-half")


@_timed
def criterion_7_interval_bound() -> CheckResult:
    """Random subintervals: measure mass vs field increment stays bounded."""
    rng = np.random.default_rng(11)
    worst_margin = np.inf
    count = 0
    for key in _INTERVAL_KEYS:
        entry = catalog.get(key)
        checker = IntervalBoundChecker(entry["field"], entry["xbar"])
        per_field = 13 if key != _INTERVAL_KEYS[-1] else 50 - 3 * 13
        for _ in range(per_field):
            length = rng.uniform(0.01, 0.2)
            a = rng.uniform(0.0, 1.0 - length)
            out = checker.check(a, a + length)
            if out["status"] != "ok":
                return CheckResult(
                    name="interval-bound",
                    passed=False,
                    detail=f"{key}: probe [{a:.3f}, {a + length:.3f}] {out['status']}",
                )
            count += 1
            worst_margin = min(worst_margin, out["margin"])
    return CheckResult(
        name="interval-bound",
        passed=worst_margin >= 0.0,
        detail=f"{count} subintervals, smallest margin {worst_margin:.3e}",
    )


@_timed
def criterion_8_sensitivity_vs_oracle() -> CheckResult:
    """Closed-form ramp derivative -1 and bang-bang right derivative -1."""
    sys_i = catalog.get("integrator")["system"]
    ramp = catalog.get("ramp")["control"]
    rep = sensitivity_derivative(sys_i, ramp, side="right")
    err_formula = abs(rep.value - (-1.0))
    fd = fd_oracle(sys_i, ramp, side="right")
    err_fd = abs(rep.value - fd["extrapolated"])
    bang = catalog.get("bangbang-half")["control"]
    rep_b = sensitivity_derivative(sys_i, bang, side="right")
    err_bang = abs(rep_b.value - (-1.0))
    fd_b = fd_oracle(sys_i, bang, side="right")
    err_bang_fd = abs(rep_b.value - fd_b["extrapolated"])
    ok = err_formula <= 1e-3 and err_fd <= 1e-2 and err_bang <= 1e-2 and err_bang_fd <= 1e-2
    return CheckResult(
        name="sensitivity-vs-oracle",
        passed=ok,
        detail=(
            f"ramp: formula err {err_formula:.2e}, vs fd {err_fd:.2e}; "
            f"bang-bang: err {err_bang:.2e}, vs fd {err_bang_fd:.2e}"
        ),
        data={"ramp": rep.value, "ramp_fd": fd["extrapolated"], "bang": rep_b.value},
    )


_CONTINUOUS_PAIRS = (("integrator", "ramp"), ("relaxation", "sine"), ("integrator", "bump"))


@_timed
def criterion_9_endpoint_continuity() -> CheckResult:
    """Two-sided differentiability for window-end-continuous controls."""
    worst = 0.0
    for sys_key, ctl_key in _CONTINUOUS_PAIRS:
        sys = catalog.get(sys_key)["system"]
        u = catalog.get(ctl_key)["control"]
        left = sensitivity_derivative(sys, u, side="left")
        right = sensitivity_derivative(sys, u, side="right")
        gap = abs(left.value - right.value)
        worst = max(worst, gap)
        if gap > 1e-3:
            return CheckResult(
                name="endpoint-continuity-differentiability",
                passed=False,
                detail=f"({sys_key}, {ctl_key}): |left - right| = {gap:.3e}",
            )
    # a control jumping exactly at T: the gap must equal the endpoint atom
    sys = catalog.get("integrator")["system"]
    u = catalog.get("jump-at-T")["control"]
    left = sensitivity_derivative(sys, u, side="left")
    right = sensitivity_derivative(sys, u, side="right")
    p = left.costate
    predicted = float(
        p.eval(sys.S) @ endpoint_atom(left.measure, "S")
        - p.eval(sys.T) @ endpoint_atom(left.measure, "T")
    )
    gap = left.value - right.value
    atom_err = abs(gap - predicted)
    ok = atom_err <= 1e-2
    return CheckResult(
        name="endpoint-continuity-differentiability",
        passed=ok,
        detail=(
            f"continuous pairs worst gap {worst:.2e}; jump-at-T gap {gap:.4f} "
            f"vs predicted atom term {predicted:.4f} (err {atom_err:.2e})"
        ),
    )


_FILIPPOV_PAIRS = (
    ("integrator", "ramp"),
    ("relaxation", "sine"),
    ("relaxation-abs", "bangbang-half"),
)


@_timed
def criterion_10_deviation_ratio() -> CheckResult:
    """sup |x^h - x| / h stays within a factor 2 across dyadic delays."""
    worst_spread = 0.0
    for sys_key, ctl_key in _FILIPPOV_PAIRS:
        sys = catalog.get(sys_key)["system"]
        u = catalog.get(ctl_key)["control"]
        out = filippov_check(sys, u)
        worst_spread = max(worst_spread, out["spread"])
        if out["spread"] > 2.0:
            return CheckResult(
                name="trajectory-deviation-ratio",
                passed=False,
                detail=f"({sys_key}, {ctl_key}): ratio spread {out['spread']:.3f}",
            )
    return CheckResult(
        name="trajectory-deviation-ratio",
        passed=True,
        detail=f"worst ratio spread {worst_spread:.3f} over {len(_FILIPPOV_PAIRS)} systems",
    )


@_timed
def criterion_11_integrator_order() -> CheckResult:
    """Step halving cuts the terminal error by roughly 2^4 on closed forms."""
    sysd = catalog.get("relaxation")["system"]
    cases = {
        "hold-one": (catalog.get("hold-one")["control"], 1.0 - np.exp(-1.0)),
        "ramp": (catalog.get("ramp")["control"], np.exp(-1.0)),
    }
    ratios = {}
    for key, (u, exact) in cases.items():
        errs = []
        for n in (25, 50):
            xT = simulate_state(sysd, u, n_steps=n).eval(1.0)[0]
            errs.append(abs(xT - exact))
        ratios[key] = errs[0] / errs[1]
    ok = all(12.0 <= r <= 20.0 for r in ratios.values())
    detail = ", ".join(f"{k}: ratio {r:.2f}" for k, r in sorted(ratios.items()))
    return CheckResult(name="integrator-order", passed=ok, detail=detail, data=ratios)


ALL_CRITERIA = (
    criterion_1_closed_form_variation,
    criterion_2_total_variation,
    criterion_3_ordering_suite,
    criterion_4_endpoint_identities,
    criterion_5_step_measure,
    criterion_6_limit_uniqueness,
    criterion_7_interval_bound,
    criterion_8_sensitivity_vs_oracle,
    criterion_9_endpoint_continuity,
    criterion_10_deviation_ratio,
    criterion_11_integrator_order,
)


def run_all(report=None) -> list[CheckResult]:
    """Run every criterion; report (if given) receives one line per result."""
    results = []
    for i, fn in enumerate(ALL_CRITERIA, start=1):
        res = fn()
        results.append(res)
        if report is not None:
            report(f"criterion {i:2d} {res.line}")
    return results
