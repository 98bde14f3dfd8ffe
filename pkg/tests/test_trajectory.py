import numpy as np
import pytest

from tubevar.errors import DomainError
from tubevar.trajectory import Partition, Trajectory, constant_trajectory, ramp_trajectory


def test_linear_interpolation_and_clamping():
    arc = ramp_trajectory()
    assert arc.eval(0.3)[0] == pytest.approx(0.3, abs=1e-15)
    # evaluation clamps to the window
    assert arc.eval(-5.0)[0] == 0.0
    assert arc.eval(7.0)[0] == 1.0


def test_hermite_reproduces_a_quadratic():
    # x(t) = t^2 sampled at three nodes with exact one-sided slopes 2t;
    # cubic Hermite is exact on quadratics, so the midpoint of the first
    # cell must come back with no interpolation error.
    ts = np.array([0.0, 0.5, 1.0])
    xs = ts**2
    slopes = 2 * ts
    arc = Trajectory(ts, xs, slopes_right=slopes[:, None], slopes_left=slopes[:, None])
    assert arc.eval(0.25)[0] == pytest.approx(0.0625, abs=1e-14)
    assert arc.eval(0.9)[0] == pytest.approx(0.81, abs=1e-14)


def test_hermite_keeps_kinks():
    # |t - 1/2| with one-sided slopes -1 / +1 at the kink: evaluation just
    # left and right of the node must follow the respective branch.
    ts = np.array([0.0, 0.5, 1.0])
    xs = np.abs(ts - 0.5)
    sr = np.array([[-1.0], [1.0], [1.0]])
    sl = np.array([[-1.0], [-1.0], [1.0]])
    arc = Trajectory(ts, xs, slopes_right=sr, slopes_left=sl)
    assert arc.eval(0.5 - 1e-6)[0] == pytest.approx(1e-6, abs=1e-12)
    assert arc.eval(0.5 + 1e-6)[0] == pytest.approx(1e-6, abs=1e-12)


def test_eval_many_shape():
    arc = ramp_trajectory()
    out = arc.eval_many(np.linspace(0, 1, 7))
    assert out.shape == (7, 1)


def test_range_samples_includes_endpoints():
    arc = Trajectory(np.linspace(0, 1, 5), np.linspace(0, 2, 5))
    pts = arc.range_samples(0.1, 0.6)
    assert pts[0, 0] == pytest.approx(0.2)
    assert pts[-1, 0] == pytest.approx(1.2)
    assert pts.shape[0] == 4  # two endpoints plus the nodes at 0.25 and 0.5


def test_continuity_modulus_exact_and_empirical():
    ramp = ramp_trajectory()
    assert ramp.continuity_modulus(0.25) == 0.25
    assert ramp.continuity_modulus(3.0) == 1.0
    assert constant_trajectory([2.0]).continuity_modulus(0.5) == 0.0

    ts = np.linspace(0, 1, 513)
    wiggle = Trajectory(ts, np.sin(2 * np.pi * ts))
    theta = wiggle.continuity_modulus(0.01)
    assert theta == pytest.approx(2 * np.pi * 0.01, rel=0.2)
    # monotone, zero at zero
    assert wiggle.continuity_modulus(0.0) == 0.0
    assert wiggle.continuity_modulus(0.02) >= theta


def test_trajectory_validation():
    with pytest.raises(DomainError):
        Trajectory([0.0], [1.0])
    with pytest.raises(DomainError):
        Trajectory([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        Trajectory([0.0, 1.0], [1.0, 2.0, 3.0])


def test_partition_basics():
    p = Partition.uniform(0.0, 1.0, 4)
    assert p.diam == 0.25
    assert p.cells[0] == (0.0, 0.25)
    assert len(p.cells) == 4
    with pytest.raises(DomainError):
        Partition((0.0, 0.0, 1.0))
    with pytest.raises(DomainError):
        Partition.uniform(0.0, 1.0, 0)
