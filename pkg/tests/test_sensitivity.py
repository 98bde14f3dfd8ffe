"""Delayed-control sensitivity: signals, simulation, adjoints, derivative formula.

Closed forms used as references:
  - integrator with the ramp control: J(h) = (1 - h)^2 / 2, so dJ/dh = h - 1
  - relaxation with unit control: x(t) = 1 - e^{-t}, adjoint p(t) = e^{-(1-t)}
"""

import json
import math

import numpy as np
import pytest

from tubevar import catalog
from tubevar.errors import DomainError
from tubevar.sensitivity import (
    ControlSignal,
    delayed_control,
    endpoint_atom,
    fd_oracle,
    filippov_check,
    output_J,
    sensitivity_derivative,
    simulate_costate,
    simulate_state,
    smooth_gradient,
)


@pytest.fixture(scope="module")
def systems():
    return {
        "integ": catalog.get("integrator")["system"],
        "relax": catalog.get("relaxation")["system"],
    }


@pytest.fixture(scope="module")
def controls():
    return {k: catalog.get(k)["control"] for k in ("ramp", "bangbang-half", "hold-one", "sine", "jump-at-T")}


# ----------------------------------------------------------------------
# control signals


def test_piecewise_constant_sides(controls):
    u = controls["bangbang-half"]
    assert u.eval(0.5, "left")[0] == 0.0
    assert u.eval(0.5, "right")[0] == 1.0
    assert u.eval(0.3, "left")[0] == u.eval(0.3, "right")[0] == 0.0
    assert u.jump_times == (0.5,)
    assert u.total_variation == 1.0
    assert not u.is_continuous_at(0.5)
    assert u.is_continuous_at(0.25)


def test_shift_by_zero_is_identity(controls):
    ts = np.linspace(0.0, 1.0, 257)
    for key in ("bangbang-half", "ramp", "sine"):
        u = controls[key]
        v = u.shifted(0.0)
        for side in ("left", "right"):
            np.testing.assert_array_equal(u.eval_many(ts, side), v.eval_many(ts, side))


def test_shift_moves_switch_and_clamps(controls):
    u = controls["bangbang-half"]
    v = u.shifted(0.25)  # u_h(tau) = u(tau - 0.25)
    assert v.jump_times == (0.75,)
    assert v.eval(0.1, "right")[0] == 0.0  # clamped into the pre-switch value
    assert v.eval(0.8, "right")[0] == 1.0

    w = u.shifted(-0.25)
    assert w.jump_times == (0.25,)
    assert w.eval(0.9, "right")[0] == 1.0  # past T the held value applies


def test_shift_of_terminal_jump_erases_it(controls):
    u = controls["jump-at-T"]
    assert u.eval(1.0, "right")[0] == 1.0
    assert u.eval(1.0, "left")[0] == 0.0
    # any positive delay pushes the jump outside the window: the window-end
    # representative u(T - h) sits strictly left of the old knot
    v = u.shifted(0.01)
    ts = np.linspace(0.0, 1.0, 101)
    assert np.all(v.eval_many(ts, "right") == 0.0)
    assert v.is_continuous_at(1.0)


def test_delayed_control_alias(controls):
    u = controls["ramp"]
    v = delayed_control(u, 0.1)
    assert v.eval(0.5, "right")[0] == pytest.approx(0.4, abs=1e-12)
    assert v.eval(0.05, "right")[0] == pytest.approx(0.0, abs=1e-12)


def test_signal_validation():
    with pytest.raises(DomainError):
        ControlSignal.piecewise_constant([0.5], [[0.0]], 0.0, 1.0)  # needs 2 rows
    with pytest.raises(DomainError):
        ControlSignal.piecewise_constant([1.5], [[0.0], [1.0]], 0.0, 1.0)


# ----------------------------------------------------------------------
# simulation


def test_integrator_with_ramp_exact(systems, controls):
    x = simulate_state(systems["integ"], controls["ramp"])
    assert x.eval(1.0)[0] == pytest.approx(0.5, abs=1e-12)
    assert output_J(systems["integ"], controls["ramp"]) == pytest.approx(0.5, abs=1e-12)


def test_relaxation_closed_form(systems, controls):
    x = simulate_state(systems["relax"], controls["hold-one"])
    ts = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(x.eval_many(ts)[:, 0], 1.0 - np.exp(-ts), atol=1e-10)
    p = simulate_costate(systems["relax"], controls["hold-one"], x)
    np.testing.assert_allclose(p.eval_many(ts)[:, 0], np.exp(-(1.0 - ts)), atol=1e-10)


def test_shifted_objective_closed_form(systems, controls):
    u = controls["ramp"].shifted(0.1)
    assert output_J(systems["integ"], u) == pytest.approx(0.405, abs=1e-12)


# ----------------------------------------------------------------------
# finite differences and the measure formula


def test_fd_oracle_quotients(systems, controls):
    fd = fd_oracle(systems["integ"], controls["ramp"], side="right")
    # raw quotient at step 1e-2 carries the half-step bias of the quadratic J
    assert fd["quotients"][0] == pytest.approx(-0.995, abs=1e-10)
    assert fd["extrapolated"] == pytest.approx(-1.0, abs=1e-10)
    assert fd["J0"] == pytest.approx(0.5, abs=1e-12)


def test_sensitivity_ramp(systems, controls):
    rep = sensitivity_derivative(systems["integ"], controls["ramp"], side="right")
    assert rep.converged
    assert rep.window == "right_open"
    assert rep.value == pytest.approx(-1.0, abs=1e-3)


def test_sensitivity_bangbang_atom(systems, controls):
    rep = sensitivity_derivative(systems["integ"], controls["bangbang-half"], side="right")
    assert rep.converged
    # unit atom at the switch paired with the constant adjoint
    assert rep.value == pytest.approx(-1.0, abs=1e-9)
    assert rep.measure_tv == pytest.approx(1.0, abs=1e-9)
    fd = fd_oracle(systems["integ"], controls["bangbang-half"], side="right")
    assert rep.value == pytest.approx(fd["extrapolated"], abs=1e-2)


def test_terminal_jump_atom_splits_sides(systems, controls):
    left = sensitivity_derivative(systems["integ"], controls["jump-at-T"], side="left")
    right = sensitivity_derivative(systems["integ"], controls["jump-at-T"], side="right")
    assert float(endpoint_atom(left.measure, "T")[0]) == pytest.approx(1.0, abs=1e-9)
    assert float(endpoint_atom(left.measure, "S")[0]) == pytest.approx(0.0, abs=1e-9)
    # the left window keeps the terminal atom, the right window drops it
    assert left.value - right.value == pytest.approx(-1.0, abs=1e-6)


def test_two_sided_needs_continuity(systems, controls):
    with pytest.raises(DomainError):
        sensitivity_derivative(systems["integ"], controls["jump-at-T"], side="two_sided")
    rep = sensitivity_derivative(systems["relax"], controls["sine"], side="two_sided")
    assert rep.window == "closed"
    assert rep.converged


def test_smooth_gradient_orients_opposite_to_fd(systems, controls):
    g = smooth_gradient(systems["integ"], controls["ramp"])
    assert g == pytest.approx(1.0, abs=1e-10)
    g2 = smooth_gradient(systems["relax"], controls["sine"])
    fd = fd_oracle(systems["relax"], controls["sine"], side="right")
    assert g2 == pytest.approx(-fd["extrapolated"], abs=1e-4)


def test_filippov_deviation_is_first_order(systems, controls):
    out = filippov_check(systems["integ"], controls["bangbang-half"])
    for row in out["rows"]:
        assert row["ratio"] == pytest.approx(1.0, abs=1e-10)
    assert out["spread"] == pytest.approx(1.0, abs=1e-10)


def test_report_serialization(tmp_path, systems, controls):
    rep = sensitivity_derivative(systems["integ"], controls["bangbang-half"], side="right")
    path = tmp_path / "report.json"
    rep.to_json(path)
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == 1
    assert doc["kind"] == "sensitivity-report"
    assert doc["value"] == pytest.approx(-1.0, abs=1e-9)
    assert doc["side"] == "right"
