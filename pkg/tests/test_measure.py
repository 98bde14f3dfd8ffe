"""Time-measure construction: telescoping, refinement limits, windows, bounds."""

import numpy as np
import pytest

from tubevar import catalog
from tubevar.errors import DomainError
from tubevar.measure import (
    DiscreteMeasure,
    IntervalBoundChecker,
    default_test_functions,
    discrete_measure,
    integrate,
    interval_bound_check,
    partial_variation_measure,
    variation_budgets,
)
from tubevar.trajectory import Partition, ramp_trajectory


def test_atoms_telescope_for_time_only_field():
    e = catalog.get("two-steps-field")
    fld, xbar = e["field"], e["xbar"]
    mu = discrete_measure(fld, xbar, Partition.uniform(0.0, 1.0, 8))
    # increments of the two-step signal: mass 2 crossing 1/4, mass 1 crossing 3/4
    assert mu.total_variation == pytest.approx(3.0, abs=1e-12)
    assert integrate(lambda ts: np.ones_like(ts), mu) == pytest.approx(3.0, abs=1e-12)
    # atom positions are cell-left endpoints, so each carrier sits one cell
    # left of the jump it picks up
    carriers = mu.times[np.abs(mu.weights[:, 0]) > 0]
    assert carriers == pytest.approx([0.125, 0.625])


def test_xi_rules_differ_only_second_order():
    e = catalog.get("bilinear-field")
    fld, xbar = e["field"], e["xbar"]
    P = Partition.uniform(0.0, 1.0, 256)
    left = discrete_measure(fld, xbar, P, xi_rule="left")
    right = discrete_measure(fld, xbar, P, xi_rule="right")
    g = lambda ts: np.sin(2 * np.pi * ts)
    gap = abs(integrate(g, left) - integrate(g, right))
    assert gap < 2e-2  # one order below the O(1) atom scale
    mid = discrete_measure(fld, xbar, P, xi_rule="mid")
    assert abs(integrate(g, mid) - integrate(g, left)) < gap + 1e-12


def test_step_field_limit_concentrates():
    e = catalog.get("step-half")
    limit = partial_variation_measure(e["field"], e["xbar"], levels=14)
    assert limit.converged
    mu = limit.measure
    assert mu.total_variation == pytest.approx(1.0, abs=1e-9)
    carrier = mu.times[np.argmax(np.abs(mu.weights[:, 0]))]
    assert abs(carrier - 0.5) <= mu.mesh + 1e-12
    assert all(row["dominated"] for row in limit.cauchy_trace)


def test_smooth_field_limit_matches_density():
    e = catalog.get("field-smooth")
    limit = partial_variation_measure(e["field"], e["xbar"], levels=12)
    assert limit.converged
    density = e["expected"]["density"]
    for g in (lambda ts: ts, lambda ts: np.cos(np.pi * ts)):
        ts = np.linspace(0.0, 1.0, 4097)
        want = np.trapezoid(g(ts) * density(ts), ts)
        got = integrate(g, limit.measure)
        assert got == pytest.approx(want, abs=2e-3)


def _time_step_field(jump_fn, batch_fn, c_bound):
    from tubevar.fields import Field

    return Field(
        m=lambda t, x: np.asarray([jump_fn(t)]),
        S=0.0,
        T=1.0,
        grad_x_m=lambda t, x: np.zeros((1, 1)),
        delta_prime=1.0,
        batch_m=lambda ts, xs: batch_fn(np.asarray(ts))[:, None],
        batch_grad=lambda ts, xs: np.zeros((np.asarray(ts).size, 1, 1)),
        gamma=lambda s: 0.0,
        c_bound=c_bound,
    )


def test_endpoint_jump_lands_in_window_buffers():
    one = lambda ts: np.ones_like(ts)
    at_start = _time_step_field(
        lambda t: 0.0 if t <= 0.0 else 1.0,
        lambda ts: (ts > 0.0).astype(float),
        1.5,
    )
    mu = partial_variation_measure(at_start, ramp_trajectory(), levels=10).measure
    assert integrate(one, mu, "closed") == pytest.approx(1.0, abs=1e-9)
    # the unit atom sits at S, so the left-open window loses it
    assert integrate(one, mu, "left_open") == pytest.approx(0.0, abs=1e-9)
    assert integrate(one, mu, "right_open") == pytest.approx(1.0, abs=1e-9)

    at_end = _time_step_field(
        lambda t: 2.0 if t >= 1.0 else 0.0,
        lambda ts: 2.0 * (ts >= 1.0).astype(float),
        2.5,
    )
    mu2 = partial_variation_measure(at_end, ramp_trajectory(), levels=10).measure
    assert integrate(one, mu2, "closed") == pytest.approx(2.0, abs=1e-9)
    assert integrate(one, mu2, "right_open") == pytest.approx(0.0, abs=1e-9)
    assert integrate(one, mu2, "left_open") == pytest.approx(2.0, abs=1e-9)


def test_raw_measure_window_convention():
    # hand-built measure, snap zero: an atom exactly at T is an endpoint
    # atom, an atom at S is interior (it stamps mass to its right)
    mu = DiscreteMeasure(np.array([0.0, 0.5, 1.0]), np.array([1.0, 2.0, 4.0]), 0.0, 1.0)
    one = lambda ts: np.ones_like(ts)
    assert integrate(one, mu, "closed") == 7.0
    assert integrate(one, mu, "right_open") == 3.0
    assert integrate(one, mu, "left_open") == 7.0


def test_window_name_validation():
    mu = DiscreteMeasure(np.array([0.5]), np.array([1.0]), 0.0, 1.0)
    with pytest.raises(DomainError):
        integrate(lambda ts: ts, mu, "open")


def test_measure_validation():
    with pytest.raises(DomainError):
        DiscreteMeasure(np.array([0.5, 0.2]), np.array([1.0, 1.0]), 0.0, 1.0)
    with pytest.raises(DomainError):
        DiscreteMeasure(np.array([0.5]), np.array([[1.0], [2.0]]), 0.0, 1.0)


def test_csv_lists_only_carriers(tmp_path):
    e = catalog.get("step-half")
    mu = partial_variation_measure(e["field"], e["xbar"], levels=12).measure
    path = tmp_path / "atoms.csv"
    mu.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t,w_1"
    assert len(lines) == 2
    t_str, w_str = lines[1].split(",")
    assert float(w_str) == 1.0


def test_test_function_family_covers_scales():
    tfs = default_test_functions(0.0, 1.0)
    names = [tf.name for tf in tfs]
    assert "const" in names and "ramp" in names
    assert sum(n.startswith("hat") for n in names) == 7
    # Lipschitz declarations are honest on a sample
    ts = np.linspace(0.0, 1.0, 2048)
    for tf in tfs:
        vals = tf.fn(ts)
        slopes = np.abs(np.diff(vals) / np.diff(ts))
        assert slopes.max() <= tf.lipschitz + 1e-6


def test_variation_budgets_positive():
    e = catalog.get("bilinear-field")
    budgets = variation_budgets(e["field"], e["xbar"], 0.1)
    assert budgets["delta"] == 0.1
    # tube variation of t x along x = t is t^2/2 plus the delta t widening
    assert 0.55 < budgets["field"] < 0.66
    # the gradient field is the plain ramp t, total variation one
    assert budgets["gradient"] == pytest.approx(1.0, abs=1e-6)


def test_interval_bound_holds_on_probes():
    e = catalog.get("bilinear-field")
    checker = IntervalBoundChecker(e["field"], e["xbar"])
    rng = np.random.default_rng(5)
    for _ in range(10):
        a = float(rng.uniform(0.0, 0.8))
        b = a + float(rng.uniform(0.02, 0.15))
        res = checker.check(a, b)
        assert res["status"] == "ok"
        assert res["margin"] >= 0.0


def test_interval_bound_rejects_wide_interval():
    # tiny tube radius: the trajectory moves farther than delta across the
    # probe interval, so the premise fails and the checker must say so
    e = catalog.get("bilinear-field")
    res = interval_bound_check(e["field"], e["xbar"], 0.1, 0.6, delta=1e-3)
    assert res["status"] == "rejected-modulus"
    assert res["theta"] > res["delta"]


def test_interval_bound_sees_step_jump():
    e = catalog.get("step-half")
    checker = IntervalBoundChecker(e["field"], ramp_trajectory())
    res = checker.check(0.3, 0.7)
    assert res["status"] == "ok"
    # the unit jump inside [a, b] shows up on both sides of the inequality
    assert res["lhs"] == pytest.approx(0.0, abs=1e-9)
    assert res["margin"] >= 0.0
