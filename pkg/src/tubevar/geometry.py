"""Finite set values in R^n and Hausdorff-type distances between them.

Sets are represented exactly in one of three closed forms: a single point,
an axis-aligned box, or a finite point cloud.  Distances use closed-form
expressions wherever they are exact (singleton pairs, box/point pairs in any
dimension, box/box pairs on the line) and fall back to densifying boxes into
point clouds otherwise.  All values are plain floats; set objects are
immutable once built.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# Resolution used when a Box in dimension >= 2 has to be turned into a point
# cloud for a brute-force distance.  Per-axis point count.
DENSIFY_RESOLUTION = 33


def _as_vector(v) -> np.ndarray:
    a = np.atleast_1d(np.asarray(v, dtype=float))
    if a.ndim != 1:
        raise DomainError(f"expected a vector, got shape {a.shape}")
    if a.size == 0:
        raise DomainError("empty vector is not a point of R^n")
    if not np.all(np.isfinite(a)):
        raise DomainError("set values must have finite coordinates")
    return a


@dataclass(frozen=True, eq=False)
class Singleton:
    """A one-point set {v}."""

    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", _as_vector(self.v))

    @property
    def dim(self) -> int:
        return self.v.size

    def points(self, resolution: int = DENSIFY_RESOLUTION) -> np.ndarray:
        return self.v[None, :]


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [lo_1,hi_1] x ... x [lo_n,hi_n], componentwise lo <= hi."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _as_vector(self.lo)
        hi = _as_vector(self.hi)
        if lo.size != hi.size:
            raise DomainError("box corners must have equal dimension")
        if np.any(lo > hi):
            raise DomainError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    def points(self, resolution: int = DENSIFY_RESOLUTION) -> np.ndarray:
        """Densify into a regular grid (exact for degenerate axes)."""
        axes = []
        for l, h in zip(self.lo, self.hi):
            if h > l:
                axes.append(np.linspace(l, h, resolution))
            else:
                axes.append(np.array([l]))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite nonempty collection of points, one per row."""

    pts: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pts, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise DomainError("point cloud needs a nonempty (k, n) array")
        if not np.all(np.isfinite(a)):
            raise DomainError("set values must have finite coordinates")
        object.__setattr__(self, "pts", a)

    @property
    def dim(self) -> int:
        return self.pts.shape[1]

    def points(self, resolution: int = DENSIFY_RESOLUTION) -> np.ndarray:
        return self.pts


SetValue = Singleton | Box | PointCloud


def _check_dims(a: SetValue, b: SetValue) -> None:
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _point_to_box(p: np.ndarray, box: Box) -> float:
    # Componentwise clamp; zero inside the box.
    gap = np.maximum(np.maximum(box.lo - p, p - box.hi), 0.0)
    return float(np.linalg.norm(gap))


def _farthest_corner(box: Box, p: np.ndarray) -> float:
    # sup over the box of |x - p| is attained at a corner, axis by axis.
    per_axis = np.maximum(np.abs(box.lo - p), np.abs(box.hi - p))
    return float(np.linalg.norm(per_axis))


def _cloud_to_cloud(a: np.ndarray, b: np.ndarray) -> float:
    # sup over rows of a of the distance to the nearest row of b.
    diff = a[:, None, :] - b[None, :, :]
    d = np.sqrt(np.sum(diff * diff, axis=2))
    return float(np.max(np.min(d, axis=1)))


def directed_distance(a: SetValue, b: SetValue, resolution: int = DENSIFY_RESOLUTION) -> float:
    """One-sided distance sup_{x in a} dist(x, b).

    Zero iff a is contained in b (up to densification error for boxes in
    dimension >= 2).  Not symmetric.
    """
    _check_dims(a, b)
    if isinstance(a, Singleton):
        if isinstance(b, Singleton):
            return float(np.linalg.norm(a.v - b.v))
        if isinstance(b, Box):
            return _point_to_box(a.v, b)
        return _cloud_to_cloud(a.points(), b.points(resolution))
    if isinstance(a, Box) and isinstance(b, Singleton):
        return _farthest_corner(a, b.v)
    if isinstance(a, Box) and isinstance(b, Box) and a.dim == 1:
        lo_a, hi_a = a.lo[0], a.hi[0]
        lo_b, hi_b = b.lo[0], b.hi[0]
        d_lo = max(lo_b - lo_a, lo_a - hi_b, 0.0)
        d_hi = max(lo_b - hi_a, hi_a - hi_b, 0.0)
        return float(max(d_lo, d_hi))
    pts_a = a.points(resolution)
    if isinstance(b, Box):
        return float(max(_point_to_box(p, b) for p in pts_a))
    return _cloud_to_cloud(pts_a, b.points(resolution))


def hausdorff_distance(a: SetValue, b: SetValue, resolution: int = DENSIFY_RESOLUTION) -> float:
    """max of the two directed distances.

    Exact closed forms: singleton pairs (Euclidean norm), singleton/box in any
    dimension, box/box on the line (max of endpoint gaps).  Other pairings go
    through point clouds.
    """
    _check_dims(a, b)
    if isinstance(a, Singleton) and isinstance(b, Singleton):
        return float(np.linalg.norm(a.v - b.v))
    if isinstance(a, Box) and isinstance(b, Box) and a.dim == 1:
        return float(
            max(abs(a.lo[0] - b.lo[0]), abs(a.hi[0] - b.hi[0]))
        )
    return max(
        directed_distance(a, b, resolution),
        directed_distance(b, a, resolution),
    )


def singleton(*coords: float) -> Singleton:
    """Convenience constructor: singleton(1.0) or singleton(1.0, 2.0)."""
    return Singleton(np.array(coords, dtype=float))
