"""Set distances against brute-force grid oracles and metric axioms.

Frozen reference values below were produced by an independent script that
densifies every operand onto a fine grid (1e-4 spacing in 1d, 101 points per
axis in 2d) and takes the two-sided sup-inf directly, with no imports from
this package.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubevar.errors import DomainError
from tubevar.geometry import Box, PointCloud, Singleton, directed_distance, hausdorff_distance, singleton


def box1(lo, hi):
    return Box(np.array([lo]), np.array([hi]))


# ----------------------------------------------------------------------
# frozen oracle values


def test_interval_pair_matches_grid_oracle():
    # oracle: 1.0 (grid step 1e-4); closed form max(|0-1|, |2-3|)
    assert hausdorff_distance(box1(0.0, 2.0), box1(1.0, 3.0)) == 1.0


def test_cloud_to_interval_directed():
    cloud = PointCloud(np.array([[0.0], [2.0]]))
    b = box1(0.5, 1.5)
    # oracle: 0.5 forward (both cloud points are 0.5 from the interval),
    # 1.0 backward (the interval midpoint is 1.0 from either cloud point)
    assert directed_distance(cloud, b) == pytest.approx(0.5, abs=1e-12)
    assert directed_distance(b, cloud) == pytest.approx(1.0, abs=1e-12)
    assert hausdorff_distance(cloud, b) == pytest.approx(1.0, abs=1e-12)


def test_plane_box_against_point():
    b = Box(np.zeros(2), np.ones(2))
    p = singleton(2.0, 3.0)
    # oracle: sqrt(13) = 3.605551275463989 out, sqrt(5) = 2.23606797749979 back
    assert directed_distance(b, p) == pytest.approx(math.sqrt(13), abs=1e-12)
    assert directed_distance(p, b) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert hausdorff_distance(b, p) == pytest.approx(math.sqrt(13), abs=1e-12)


def test_translated_plane_boxes_via_densification():
    # 2d box pairs go through the point-cloud fallback; a pure x-shift by 0.5
    # lands on densification nodes exactly, so the oracle value 0.5 is hit
    # with no grid error.
    a = Box(np.zeros(2), np.ones(2))
    b = Box(np.array([0.5, 0.0]), np.array([1.5, 1.0]))
    assert hausdorff_distance(a, b) == pytest.approx(0.5, abs=1e-12)


def test_cloud_pair_plane():
    p = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    q = PointCloud(np.array([[0.25, 0.25], [1.0, 1.0]]))
    # oracle: 0.7905694150420949 forward, 1.0 backward
    assert directed_distance(p, q) == pytest.approx(0.7905694150420949, abs=1e-12)
    assert directed_distance(q, p) == pytest.approx(1.0, abs=1e-12)
    assert hausdorff_distance(p, q) == pytest.approx(1.0, abs=1e-12)


def test_point_inside_box_is_at_zero_distance():
    assert directed_distance(singleton(0.25, 0.75), Box(np.zeros(2), np.ones(2))) == 0.0


def test_degenerate_box_axis():
    flat = Box(np.array([0.0, 0.5]), np.array([1.0, 0.5]))
    assert hausdorff_distance(flat, singleton(0.0, 0.5)) == pytest.approx(1.0, abs=1e-12)


# ----------------------------------------------------------------------
# metric axioms, sampled


coord = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False, allow_infinity=False)


def _cloud(draw_pts):
    return PointCloud(np.array(draw_pts, dtype=float))


@given(a=st.lists(coord, min_size=1, max_size=2), b=st.lists(coord, min_size=1, max_size=2))
def test_singleton_distance_is_symmetric_and_euclid(a, b):
    if len(a) != len(b):
        return
    sa, sb = Singleton(np.array(a)), Singleton(np.array(b))
    d = hausdorff_distance(sa, sb)
    assert d == hausdorff_distance(sb, sa)
    assert d == pytest.approx(np.linalg.norm(np.array(a) - np.array(b)), abs=1e-12)


@given(
    pts_a=st.lists(st.tuples(coord, coord), min_size=1, max_size=5),
    pts_b=st.lists(st.tuples(coord, coord), min_size=1, max_size=5),
)
@settings(max_examples=60)
def test_cloud_distance_symmetry_and_zero_on_equal(pts_a, pts_b):
    ca, cb = _cloud(pts_a), _cloud(pts_b)
    assert hausdorff_distance(ca, cb) == hausdorff_distance(cb, ca)
    assert hausdorff_distance(ca, ca) == 0.0
    assert directed_distance(ca, cb) <= hausdorff_distance(ca, cb)
    assert hausdorff_distance(ca, cb) >= 0.0


@given(
    pts_a=st.lists(st.tuples(coord, coord), min_size=1, max_size=4),
    pts_b=st.lists(st.tuples(coord, coord), min_size=1, max_size=4),
    pts_c=st.lists(st.tuples(coord, coord), min_size=1, max_size=4),
)
@settings(max_examples=60)
def test_cloud_triangle_inequality(pts_a, pts_b, pts_c):
    ca, cb, cc = _cloud(pts_a), _cloud(pts_b), _cloud(pts_c)
    lhs = hausdorff_distance(ca, cc)
    rhs = hausdorff_distance(ca, cb) + hausdorff_distance(cb, cc)
    assert lhs <= rhs + 1e-9


@given(lo=coord, w1=st.floats(min_value=0.0, max_value=10.0), lo2=coord, w2=st.floats(min_value=0.0, max_value=10.0))
def test_interval_closed_form_vs_endpoints(lo, w1, lo2, w2):
    a, b = box1(lo, lo + w1), box1(lo2, lo2 + w2)
    want = max(abs(a.lo[0] - b.lo[0]), abs(a.hi[0] - b.hi[0]))
    assert hausdorff_distance(a, b) == want


def test_subset_has_zero_directed_distance():
    inner = PointCloud(np.array([[0.2], [0.8]]))
    outer = box1(0.0, 1.0)
    assert directed_distance(inner, outer) == 0.0
    # but not the other way around
    assert directed_distance(outer, inner) > 0.0


# ----------------------------------------------------------------------
# validation


def test_dimension_mismatch_rejected():
    with pytest.raises(DomainError):
        hausdorff_distance(singleton(0.0), singleton(0.0, 1.0))


def test_bad_box_rejected():
    with pytest.raises(DomainError):
        Box(np.array([1.0]), np.array([0.0]))


def test_empty_cloud_rejected():
    with pytest.raises(DomainError):
        PointCloud(np.empty((0, 2)))


def test_nonfinite_rejected():
    with pytest.raises(DomainError):
        Singleton(np.array([np.nan]))
