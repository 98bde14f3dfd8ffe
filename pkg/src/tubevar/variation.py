"""Cumulative variation of a multifunction along a trajectory tube.

The central object is the mesh-constrained variation

    V(t; delta, eps) = sup over partitions S = t_0 < ... < t_N = t with
                       t_{i+1} - t_i <= eps  of
                       sum_i  sup { d_H(F(t_{i+1}, x, a), F(t_i, x, a)) :
                                    x in tube(t_i, t_{i+1}; delta), a in A }

where the tube is the delta-neighbourhood of the arc x(.) restricted to the
cell.  Sending eps down gives the delta-perturbed cumulative variation, and
sending delta down after that gives the unperturbed one.

Two facts shape the implementation.  First, inserting points into a partition
can strictly *decrease* the sum when F depends on x (the per-cell supremum
couples neighbouring cells through the tube), so naive midpoint refinement
does not approach the supremum.  Second, the supremum over partitions drawn
from a fixed grid is a longest-path problem: nodes are grid times, an edge
(i, j) carries the sampled per-cell supremum, and a single left-to-right
sweep yields the optimum for every endpoint at once.  The engine therefore
fixes one fine grid, evaluates edge weights for a dyadic ladder of cell
lengths, and runs a max-weight-chain dynamic program per (eps, delta) level.

Sampling is nested across levels by construction (radius blocks accumulate
through a running maximum, smaller eps keeps a subset of edges, parameter
subsets shrink the max), which makes the monotonicity relations between
levels hold exactly in floating point, not just up to tolerance.  Every
reported value is a certified lower bound of the true supremum.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, ConvergenceError, DomainError
from .fields import Multifunction
from .geometry import SetValue, hausdorff_distance
from .trajectory import Partition, Trajectory


def _directions(n: int) -> np.ndarray:
    eye = np.eye(n)
    return np.vstack([eye, -eye])


# ----------------------------------------------------------------------
# tube sampling for standalone partition sums


@dataclass(frozen=True)
class TubeResolution:
    arc_samples: int = 5
    radial_fractions: tuple = (0.5, 1.0)
    set_resolution: int = 33


@dataclass(frozen=True, eq=False)
class TubeSample:
    """Deterministic sample of a tube segment: arc points plus radial shifts."""

    t_lo: float
    t_hi: float
    delta: float
    x_points: np.ndarray
    a_points: tuple

    def validate(self, xbar: Trajectory, slack: float = 1e-9) -> None:
        arc = xbar.range_samples(self.t_lo, self.t_hi)
        dense_t = np.linspace(self.t_lo, self.t_hi, 257)
        dense = xbar.eval_many(dense_t)
        ref = np.vstack([arc, dense])
        d = self.x_points[:, None, :] - ref[None, :, :]
        dist = np.min(np.sqrt(np.sum(d * d, axis=2)), axis=1)
        if np.any(dist > self.delta + slack):
            raise DomainError("tube sample contains points outside the tube")


def tube_samples(
    xbar: Trajectory,
    t_lo: float,
    t_hi: float,
    delta: float,
    res: TubeResolution = TubeResolution(),
    a_points: tuple = (),
) -> TubeSample:
    if delta < 0:
        raise DomainError("tube radius must be nonnegative")
    ts = np.linspace(t_lo, t_hi, max(2, res.arc_samples))
    arc = xbar.eval_many(ts)
    blocks = [arc]
    if delta > 0:
        dirs = _directions(arc.shape[1])
        for frac in res.radial_fractions:
            r = delta * frac
            if r <= 0:
                continue
            for d in dirs:
                blocks.append(arc + r * d)
    return TubeSample(
        t_lo=float(t_lo),
        t_hi=float(t_hi),
        delta=float(delta),
        x_points=np.vstack(blocks),
        a_points=a_points,
    )


def partition_sum(
    F: Multifunction,
    xbar: Trajectory,
    P: Partition | Sequence[float],
    delta: float,
    tube_resolution: TubeResolution = TubeResolution(),
) -> float:
    """Partition sum of sampled per-cell tube suprema, in fixed cell order.

    A lower bound of the exact per-cell suprema.  Requires delta within the
    declared admissible radius and the partition inside [S, T].
    """
    if not isinstance(P, Partition):
        P = Partition(tuple(P))
    if delta < 0:
        raise DomainError("tube radius must be nonnegative")
    if F.delta_bar is not None and delta > F.delta_bar + 1e-12:
        raise DomainError(f"delta {delta} exceeds admissible radius {F.delta_bar}")
    if P.grid[0] < F.S - 1e-12 or P.grid[-1] > F.T + 1e-12:
        raise DomainError("partition leaves the time window")
    total = 0.0
    for a_cell, b_cell in P.cells:
        sample = tube_samples(xbar, a_cell, b_cell, delta, tube_resolution, F.A_points)
        k = sample.x_points.shape[0]
        t_hi = np.full(k, b_cell)
        t_lo = np.full(k, a_cell)
        best = 0.0
        for a in F.A_points:
            d = F.pair_distances(t_hi, t_lo, sample.x_points, a, tube_resolution.set_resolution)
            best = max(best, float(np.max(d)))
        total += best
    return total


# ----------------------------------------------------------------------
# the grid engine


@dataclass(frozen=True)
class EngineConfig:
    """Knobs for the variation engine.

    eps0/eps_steps: geometric mesh schedule eps0 * 2^-k (eps0 defaults to an
    eighth of the window).  delta0/delta_steps: geometric tube schedule.
    stop_tol: absolute Cauchy stop for both schedules.  grid_refine: grid
    spacing is the finest eps divided by this.  arc_samples: arc points per
    edge.  Requested eps values are snapped to grid multiples so that
    mesh-limit cells are exactly representable.
    """

    eps0: float | None = None
    eps_steps: int = 9
    delta0: float | None = None
    delta_steps: int = 10
    stop_tol: float = 1e-4
    grid_refine: int = 2
    arc_samples: int = 5
    set_resolution: int = 33
    validate_bound: bool = True


class _TubeDP:
    """Edge weights and max-chain sweeps on one fixed grid."""

    def __init__(
        self,
        F: Multifunction,
        xbar: Trajectory,
        t_end: float,
        spacing: float,
        radii: Sequence[float],
        seeds: Sequence[float] = (),
        arc_samples: int = 5,
        eps_max: float | None = None,
        set_resolution: int = 33,
    ):
        self.F = F
        self.xbar = xbar
        S = F.S
        n_cells = max(1, int(round((t_end - S) / spacing)))
        base = np.linspace(S, t_end, n_cells + 1)
        inner = [s for s in seeds if S < s < t_end]
        grid = np.union1d(base, np.asarray(inner, dtype=float)) if inner else base
        # drop near-duplicate nodes introduced by seeds sitting on the grid
        keep = np.concatenate(([True], np.diff(grid) > spacing * 1e-9))
        keep[-1] = True
        grid = grid[keep]
        if grid[-1] != t_end:
            grid = np.append(grid[grid < t_end], t_end)
        self.grid = grid
        self.spacing = (t_end - S) / n_cells
        self.radii = np.concatenate(([0.0], np.asarray(sorted(r for r in radii if r > 0))))
        self.n_levels = self.radii.size
        self.arc_fr = np.linspace(0.0, 1.0, max(2, arc_samples))
        self.set_resolution = set_resolution
        self.eps_max = eps_max if eps_max is not None else (t_end - S)
        m = grid.size - 1
        offsets = []
        o = 1
        while o <= m:
            span_min = float(np.min(grid[o:] - grid[:-o]))
            if span_min > self.eps_max * (1 + 1e-12):
                break
            offsets.append(o)
            o *= 2
        self.offsets = offsets
        self.spans = {o: grid[o:] - grid[:-o] for o in offsets}
        self.weights = {o: self._edge_weights(o) for o in offsets}
        self._sweep_cache: dict = {}

    # -- weight construction ------------------------------------------

    def _edge_blocks(self, o: int, rows: slice):
        """Yield (level, t_hi, t_lo, points) blocks for edges grid[i]..grid[i+o].

        Level l blocks use radius radii[l]; level 0 is the bare arc.  The
        same code path serves full-offset construction and single-edge
        probes, so recomputed values match stored ones bit for bit.
        """
        g = self.grid
        a_t = g[:-o][rows]
        b_t = g[o:][rows]
        fr = self.arc_fr
        k = fr.size
        tau = a_t[:, None] * (1.0 - fr) + b_t[:, None] * fr
        arc = self.xbar.eval_many(tau.ravel())
        t_hi = np.repeat(b_t, k)
        t_lo = np.repeat(a_t, k)
        yield 0, t_hi, t_lo, arc
        dirs = _directions(arc.shape[1])
        for lvl in range(1, self.n_levels):
            r = self.radii[lvl]
            for d in dirs:
                yield lvl, t_hi, t_lo, arc + r * d

    def _edge_weights(self, o: int) -> np.ndarray:
        """(E, n_levels, n_A) array; level axis is a running max over radii."""
        g = self.grid
        e_count = g.size - o
        k = self.arc_fr.size
        n_a = len(self.F.A_points)
        out = np.empty((e_count, self.n_levels, n_a))
        for ai, a in enumerate(self.F.A_points):
            cur = None
            cursor = 0
            for lvl, t_hi, t_lo, pts in self._edge_blocks(o, slice(None)):
                if lvl != cursor:
                    out[:, cursor, ai] = cur
                    cursor = lvl
                d = self.F.pair_distances(t_hi, t_lo, pts, a, self.set_resolution)
                d = d.reshape(e_count, k).max(axis=1)
                cur = d if cur is None else np.maximum(cur, d)
            out[:, cursor, ai] = cur
            for lvl in range(cursor + 1, self.n_levels):
                out[:, lvl, ai] = cur
        return out

    def edge_sample_distances(self, o: int, e: int, level: int, a_idx: int) -> np.ndarray:
        """All sampled distances for one edge up to a radius level (flat)."""
        a = self.F.A_points[a_idx]
        pieces = []
        for lvl, t_hi, t_lo, pts in self._edge_blocks(o, slice(e, e + 1)):
            if lvl > level:
                break
            pieces.append(self.F.pair_distances(t_hi, t_lo, pts, a, self.set_resolution))
        return np.concatenate(pieces)

    # -- sweeps -------------------------------------------------------

    def combined_weights(self, o: int, level: int, a_mask: tuple) -> np.ndarray:
        return self.weights[o][:, level, list(a_mask)].max(axis=-1)

    def sweep(self, eps: float, level: int, a_mask: tuple | None = None) -> np.ndarray:
        """Max-chain values V over all grid nodes for one (eps, level)."""
        if a_mask is None:
            a_mask = tuple(range(len(self.F.A_points)))
        key = (float(eps), int(level), a_mask)
        hit = self._sweep_cache.get(key)
        if hit is not None:
            return hit
        g = self.grid
        m = g.size
        wl = {}
        fl = {}
        active = []
        for o in self.offsets:
            feas = self.spans[o] <= eps * (1 + 1e-12)
            if not feas.any():
                continue
            active.append(o)
            wl[o] = self.combined_weights(o, level, a_mask).tolist()
            fl[o] = feas.tolist()
        if 1 not in active:
            raise ConsistencyError("grid spacing exceeds requested mesh bound")
        v = [0.0] * m
        w1 = wl[1]
        others = [o for o in active if o != 1]
        for j in range(1, m):
            best = v[j - 1] + w1[j - 1]
            for o in others:
                i = j - o
                if i >= 0 and fl[o][i]:
                    c = v[i] + wl[o][i]
                    if c > best:
                        best = c
            v[j] = best
        out = np.asarray(v)
        self._sweep_cache[key] = out
        return out


class VariationContext:
    """One grid, one sampling family, shared across every level query.

    Values from the same context are mutually consistent: eps ordering,
    radius (delta) ordering and parameter-subset ordering all hold exactly.
    """

    def __init__(
        self,
        F: Multifunction,
        xbar: Trajectory,
        t_end: float | None = None,
        config: EngineConfig | None = None,
        radii: Sequence[float] | None = None,
        extra_times: Sequence[float] = (),
    ):
        cfg = config or EngineConfig()
        self.F = F
        self.xbar = xbar
        self.config = cfg
        t_end = F.T if t_end is None else float(t_end)
        if not (F.S < t_end <= F.T + 1e-12):
            raise DomainError("t_end must lie in (S, T]")
        self.t_end = t_end
        span = t_end - F.S
        eps0 = cfg.eps0 if cfg.eps0 is not None else span / 8.0
        eps0 = min(eps0, span)
        eps_min = eps0 * 2.0 ** -(cfg.eps_steps - 1)
        spacing_target = eps_min / cfg.grid_refine
        if radii is not None:
            sched = sorted({float(r) for r in radii if r > 0}, reverse=True)
        else:
            delta0 = cfg.delta0
            if delta0 is None:
                delta0 = span / 20.0
                if F.delta_bar is not None:
                    delta0 = min(delta0, F.delta_bar / 2.0)
            sched = [delta0 * 2.0**-k for k in range(cfg.delta_steps)]
        if F.delta_bar is not None:
            bad = [r for r in sched if r > F.delta_bar + 1e-12]
            if bad:
                raise DomainError(
                    f"tube radii {bad} exceed the admissible radius {F.delta_bar}"
                )
        self.delta_schedule = sched  # descending, possibly empty
        seeds = list(F.breakpoints) + [float(t) for t in extra_times]
        if xbar.times.size <= 4097:
            seeds += [float(t) for t in xbar.times]
        self.dp = _TubeDP(
            F,
            xbar,
            t_end,
            spacing_target,
            radii=sched,
            seeds=seeds,
            arc_samples=cfg.arc_samples,
            eps_max=eps0 * (1 + 1e-12),
            set_resolution=cfg.set_resolution,
        )
        # eps levels as exact multiples of the realised spacing
        unit = self.dp.spacing * cfg.grid_refine
        self.eps_schedule = [unit * 2.0 ** (cfg.eps_steps - 1 - k) for k in range(cfg.eps_steps)]
        if cfg.validate_bound and F.c_bound is not None:
            top = sched[0] if sched else 0.0
            F.spot_check_bound(xbar, top)

    # -- helpers ------------------------------------------------------

    def level_for(self, delta: float) -> int:
        r = self.dp.radii
        lvl = int(np.searchsorted(r, delta + 1e-15, side="right")) - 1
        return max(lvl, 0)

    def index_of(self, t: float) -> int:
        g = self.dp.grid
        i = int(np.searchsorted(g, t))
        best = None
        for j in (i - 1, i, i + 1):
            if 0 <= j < g.size and (best is None or abs(g[j] - t) < abs(g[best] - t)):
                best = j
        if best is None or abs(g[best] - t) > self.dp.spacing * 1e-3:
            raise DomainError(
                f"time {t} is not on the engine grid; pass it via extra_times"
            )
        return best

    def values(self, eps: float, delta: float, a_mask: tuple | None = None) -> np.ndarray:
        return self.dp.sweep(eps, self.level_for(delta), a_mask)


# ----------------------------------------------------------------------
# results and profiles


@dataclass
class EtaResult:
    value: float
    converged: bool
    trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


@dataclass
class VariationProfile:
    """Sampled cumulative-variation curve t -> eta(t).

    eps is None when the value is an eps-limit estimate (the usual case);
    values must be nondecreasing in t.
    """

    delta: float
    eps: float | None
    values: list
    refinement_trace: list = field(default_factory=list)

    def __post_init__(self):
        ts = [t for t, _ in self.values]
        vs = [v for _, v in self.values]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DomainError("profile times must increase")
        if any(b < a - 1e-12 for a, b in zip(vs, vs[1:])):
            raise ConsistencyError("cumulative variation profile must be nondecreasing")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "eta"])
            for t, v in self.values:
                w.writerow([repr(float(t)), repr(float(v))])

    def to_json(self, path) -> None:
        doc = {
            "schema_version": 1,
            "kind": "variation-profile",
            "delta": self.delta,
            "eps": "limit" if self.eps is None else self.eps,
            "values": [[float(t), float(v)] for t, v in self.values],
            "refinement_trace": self.refinement_trace,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)


# ----------------------------------------------------------------------
# schedule drivers


def _eps_descent(ctx: VariationContext, delta: float, stop_tol: float):
    """Run the eps schedule at fixed delta; return (V, eps, converged, rows)."""
    rows = []
    prev = None
    v_arr = None
    eps_used = None
    converged = False
    for eps in ctx.eps_schedule:
        v_arr = ctx.values(eps, delta)
        v_end = float(v_arr[-1])
        rows.append({"delta": delta, "eps": eps, "value": v_end})
        if prev is not None:
            if v_end > prev + 1e-12:
                raise ConsistencyError(
                    "mesh refinement increased the variation value; "
                    "sampling resolution is inconsistent"
                )
            if prev - v_end < stop_tol:
                eps_used = eps
                converged = True
                break
        prev = v_end
        eps_used = eps
    return v_arr, eps_used, converged, rows


def eta_delta(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    delta: float,
    eps_schedule: Sequence[float] | None = None,
    *,
    config: EngineConfig | None = None,
    ctx: VariationContext | None = None,
) -> EtaResult:
    """delta-perturbed cumulative variation at time t (eps sent to zero).

    The eps schedule is geometric; the run stops once successive values agree
    within stop_tol and flags non-convergence otherwise.  Values decrease
    along the schedule by construction; an increase raises ConsistencyError.
    """
    cfg = config or EngineConfig()
    if eps_schedule is not None:
        cfg = replace(cfg, eps0=max(eps_schedule), eps_steps=len(eps_schedule))
    if ctx is None:
        ctx = VariationContext(F, xbar, t_end=t, config=cfg, radii=[delta])
    idx = ctx.index_of(t)
    rows = []
    prev = None
    converged = False
    value = 0.0
    for eps in ctx.eps_schedule:
        v = float(ctx.values(eps, delta)[idx])
        rows.append({"delta": delta, "eps": eps, "value": v})
        if prev is not None:
            if v > prev + 1e-12:
                raise ConsistencyError("mesh refinement increased the variation value")
            if prev - v < cfg.stop_tol:
                value = v
                converged = True
                break
        prev = v
        value = v
    warnings = [] if converged else ["eps schedule exhausted before Cauchy stop"]
    return EtaResult(value=value, converged=converged, trace=rows, warnings=warnings)


def eta(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    delta_schedule: Sequence[float] | None = None,
    eps_schedule: Sequence[float] | None = None,
    *,
    config: EngineConfig | None = None,
    ctx: VariationContext | None = None,
) -> EtaResult:
    """Cumulative variation at time t with both eps and delta sent to zero."""
    cfg = config or EngineConfig()
    if ctx is None:
        radii = sorted(delta_schedule, reverse=True) if delta_schedule else None
        if eps_schedule is not None:
            cfg = replace(cfg, eps0=max(eps_schedule), eps_steps=len(eps_schedule))
        ctx = VariationContext(F, xbar, t_end=t, config=cfg, radii=radii, extra_times=(t,))
    idx = ctx.index_of(t)
    deltas = ctx.delta_schedule
    if not deltas:
        raise DomainError("empty delta schedule")
    rows = []
    # settle the mesh at the largest radius, then descend in delta
    _, eps_star, eps_ok, head = _eps_descent(ctx, deltas[0], ctx.config.stop_tol)
    rows.extend(head)
    prev = None
    value = 0.0
    delta_ok = False
    for d in deltas:
        v = float(ctx.values(eps_star, d)[idx])
        rows.append({"delta": d, "eps": eps_star, "value": v})
        if prev is not None:
            if v > prev + 1e-12:
                raise ConsistencyError("radius refinement increased the variation value")
            if prev - v < ctx.config.stop_tol:
                value = v
                delta_ok = True
                break
        prev = v
        value = v
    warnings = []
    if not eps_ok:
        warnings.append("eps schedule exhausted before Cauchy stop")
    if not delta_ok:
        warnings.append("delta schedule exhausted before Cauchy stop")
    return EtaResult(value=value, converged=eps_ok and delta_ok, trace=rows, warnings=warnings)


def eta_profile(
    F: Multifunction,
    xbar: Trajectory,
    times: Sequence[float],
    *,
    config: EngineConfig | None = None,
    ctx: VariationContext | None = None,
) -> VariationProfile:
    """Limit-variation curve sampled at the given times (plus S)."""
    times = sorted(float(t) for t in times)
    if ctx is None:
        ctx = VariationContext(F, xbar, config=config, extra_times=times)
    res = eta(F, xbar, ctx.t_end, ctx=ctx)
    final = res.trace[-1]
    v = ctx.values(final["eps"], final["delta"])
    vals = [(t, float(v[ctx.index_of(t)])) for t in times]
    if not vals or vals[0][0] > F.S:
        vals = [(F.S, 0.0)] + vals
    return VariationProfile(
        delta=final["delta"], eps=None, values=vals, refinement_trace=res.trace
    )


def eta_delta_eps(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    delta: float,
    eps: float,
    refine_tolerance: float = 1e-4,
    *,
    max_depth: int = 8,
    config: EngineConfig | None = None,
) -> EtaResult:
    """Mesh-constrained variation at fixed (delta, eps).

    Starts from a grid with one node per eps and keeps halving the spacing;
    at each depth the value is the best partition drawn from that grid with
    cells at most eps long.  The trace records the raw per-depth optimum and
    the running best; the returned value is the largest seen, a certified
    lower bound of the supremum.
    """
    cfg = config or EngineConfig()
    if eps <= 0:
        raise DomainError("eps must be positive")
    rows = []
    best = None
    converged = False
    for depth in range(max_depth + 1):
        spacing = eps / 2.0**depth
        dp = _TubeDP(
            F,
            xbar,
            t,
            spacing,
            radii=[delta] if delta > 0 else [],
            seeds=list(F.breakpoints),
            arc_samples=cfg.arc_samples,
            eps_max=eps * (1 + 1e-12),
            set_resolution=cfg.set_resolution,
        )
        raw = float(dp.sweep(eps, dp.n_levels - 1)[-1])
        prev_best = best
        best = raw if best is None else max(best, raw)
        rows.append({"depth": depth, "spacing": dp.spacing, "raw": raw, "best": best})
        if prev_best is not None and abs(best - prev_best) < refine_tolerance:
            converged = True
            break
    warnings = [] if converged else ["depth schedule exhausted before Cauchy stop"]
    return EtaResult(value=best, converged=converged, trace=rows, warnings=warnings)


def eta_simple(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    X: SetValue,
    *,
    tol: float = 1e-6,
    max_depth: int = 12,
    config: EngineConfig | None = None,
) -> EtaResult:
    """Cumulative variation over a fixed state set X (no tube, no mesh cap).

    Cell weights are subadditive here, so dyadic refinement increases the sum
    and the finest grid wins; the loop stops when the increase drops below
    tol.  xbar is unused by the definition and accepted for signature
    symmetry with the tube-based quantities.
    """
    cfg = config or EngineConfig()
    pts = X.points(cfg.set_resolution)
    seeds = [b for b in F.breakpoints if F.S < b < t]
    prev = None
    converged = False
    rows = []
    value = 0.0
    for depth in range(max_depth + 1):
        n0 = 8 * 2**depth
        grid = np.union1d(np.linspace(F.S, t, n0 + 1), np.asarray(seeds, float)) if seeds else np.linspace(F.S, t, n0 + 1)
        t_hi = grid[1:]
        t_lo = grid[:-1]
        best = np.zeros(t_hi.size)
        for a in F.A_points:
            for x in pts:
                xs = np.tile(x, (t_hi.size, 1))
                d = F.pair_distances(t_hi, t_lo, xs, a, cfg.set_resolution)
                best = np.maximum(best, d)
        value = float(np.sum(best))
        rows.append({"depth": depth, "value": value})
        if prev is not None and abs(value - prev) < tol:
            converged = True
            break
        prev = value
    warnings = [] if converged else ["depth schedule exhausted before Cauchy stop"]
    return EtaResult(value=value, converged=converged, trace=rows, warnings=warnings)


# ----------------------------------------------------------------------
# one-sided structure


def _one_sided_probe(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    side: str,
    x=None,
    a=None,
    t_schedule: Sequence[float] | None = None,
    tol: float = 1e-8,
    resolution: int = 33,
):
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    sgn = 1.0 if side == "right" else -1.0
    span = F.T - F.S
    room = (F.T - t) if side == "right" else (t - F.S)
    if room <= 0:
        raise DomainError(f"no room for a {side} limit at t={t}")
    if t_schedule is None:
        # deep enough that a Lipschitz drift of slope ~1 passes the Cauchy
        # test: successive distances shrink like slope * offset / 2
        t_schedule = [span / 4 * 2.0**-k for k in range(28)]
    offs = [o for o in t_schedule if 0 < o <= room]
    if len(offs) < 3:
        raise DomainError("one-sided schedule has fewer than three usable offsets")
    x = xbar.eval(t) if x is None else np.atleast_1d(np.asarray(x, float))
    a = F.A_points[0] if a is None else a
    trace = []
    prev_set = None
    hits = 0
    for off in offs:
        cur = F.eval(t + sgn * off, x, a)
        if prev_set is not None:
            d = hausdorff_distance(prev_set, cur, resolution)
            trace.append({"offset": off, "distance": d})
            hits = hits + 1 if d < tol else 0
            if hits >= 2:
                # plateau guard: two agreeing probes on a flat stretch beyond
                # a jump would certify the wrong limit, so confirm against a
                # much finer offset before accepting
                spot = F.eval(t + sgn * off / 16.0, x, a)
                d_spot = hausdorff_distance(cur, spot, resolution)
                trace.append({"offset": off / 16.0, "distance": d_spot})
                if d_spot < tol:
                    return spot, off / 16.0
                hits = 0
        prev_set = cur
    raise ConvergenceError(
        f"no Cauchy behaviour for the {side} limit at t={t} within the schedule",
        trace,
    )


def one_sided_limit(
    F: Multifunction,
    xbar: Trajectory,
    t: float,
    side: str,
    x=None,
    a=None,
    t_schedule: Sequence[float] | None = None,
    tol: float = 1e-8,
    resolution: int = 33,
) -> SetValue:
    """Set-valued one-sided limit of s -> F(s, x, a) at t.

    Probes a geometric schedule approaching t from the requested side and
    returns the last evaluation once successive Hausdorff distances stay
    below tol twice in a row.  Raises ConvergenceError with the probe trace
    when no Cauchy behaviour shows up, which is how a violated bounded
    variation hypothesis surfaces here.
    """
    s, _ = _one_sided_probe(F, xbar, t, side, x, a, t_schedule, tol, resolution)
    return s


def discontinuity_scan(
    F: Multifunction,
    xbar: Trajectory,
    delta: float,
    grid: Sequence[float],
    *,
    tol: float = 1e-6,
    radial_fractions: tuple = (0.0, 0.5, 1.0),
    limit_tol: float = 1e-8,
    resolution: int = 33,
) -> list:
    """Interior grid times where the one-sided limits disagree over the tube.

    Returns (t, jump) pairs sorted by time, jump being the sampled sup over
    the delta-tube cross-section and parameter sample of the Hausdorff gap
    between left and right limits.
    """
    out = []
    grid = sorted(float(g) for g in grid)
    for t in grid:
        if t <= F.S or t >= F.T:
            continue
        centre = xbar.eval(t)
        probes = [centre]
        if delta > 0:
            for frac in radial_fractions:
                if frac <= 0:
                    continue
                for d in _directions(centre.size):
                    probes.append(centre + delta * frac * d)
        jump = 0.0
        for x in probes:
            for a in F.A_points:
                left = one_sided_limit(F, xbar, t, "left", x, a, tol=limit_tol, resolution=resolution)
                right = one_sided_limit(F, xbar, t, "right", x, a, tol=limit_tol, resolution=resolution)
                jump = max(jump, hausdorff_distance(left, right, resolution))
        if jump > tol:
            out.append((t, jump))
    return out


def endpoint_regularize(
    F: Multifunction,
    xbar: Trajectory,
    delta_bar: float | None = None,
) -> Multifunction:
    """Replace the endpoint values of F by their one-sided limits.

    Inside the open delta_bar ball around the endpoint states, F(S, x, a)
    becomes the right limit and F(T, x, a) the left limit; everything else is
    untouched.  The limits are realised by evaluating at a converged probe
    offset, so the batch path stays vectorised; batch evaluation applies the
    replacement to every row at exactly t = S or t = T and is therefore meant
    for tube points with radius below delta_bar.
    """
    db = delta_bar if delta_bar is not None else F.delta_bar
    if db is None:
        raise DomainError("endpoint regularisation needs an admissible radius")
    _, off_s = _one_sided_probe(F, xbar, F.S, "right")
    _, off_t = _one_sided_probe(F, xbar, F.T, "left")
    x_s = xbar.eval(F.S)
    x_t = xbar.eval(F.T)
    t_s = F.S + off_s
    t_t = F.T - off_t
    base_eval = F.eval

    def ev(t, x, a):
        x = np.atleast_1d(np.asarray(x, float))
        if t == F.S and float(np.linalg.norm(x - x_s)) < db:
            return base_eval(t_s, x, a)
        if t == F.T and float(np.linalg.norm(x - x_t)) < db:
            return base_eval(t_t, x, a)
        return base_eval(t, x, a)

    batch = None
    if F.batch is not None:
        inner = F.batch.fn

        def bfn(ts, xs, a):
            ts2 = np.where(ts == F.S, t_s, np.where(ts == F.T, t_t, ts))
            return inner(ts2, xs, a)

        from .fields import BatchEval

        batch = BatchEval(F.batch.kind, bfn)

    return Multifunction(
        eval_fn=lambda t, x, a: ev(t, x, a),
        S=F.S,
        T=F.T,
        A_points=F.A_points,
        delta_bar=db,
        c_bound=F.c_bound,
        gamma=F.gamma,
        breakpoints=F.breakpoints,
        batch=batch,
    )


# ----------------------------------------------------------------------
# structural checks


@dataclass
class EndpointReport:
    delta: float
    jump_S: float
    jump_T: float
    worst_z1: float
    worst_z2: float
    worst_z3: float
    rows: list
    passed: bool


def check_endpoint_identities(
    F: Multifunction,
    xbar: Trajectory,
    delta: float | None = None,
    *,
    config: EngineConfig | None = None,
    z_tol: float = 1e-3,
) -> EndpointReport:
    """Compare the variation of F with that of its endpoint-regularised copy.

    Checks, at tube radius delta: one-sided continuity of the regularised
    variation at the window ends (z1), the constant offset by the endpoint
    jumps (z2), and equality of interior increments (z3).
    """
    if delta is None:
        delta = (F.T - F.S) / 20.0 if F.delta_bar is None else F.delta_bar / 2.0
    db = F.delta_bar if F.delta_bar is not None else 2.0 * delta
    cfg = config or EngineConfig(eps_steps=6)
    ft = endpoint_regularize(F, xbar, db)
    span = F.T - F.S
    probes = [F.S + span * k / 8.0 for k in range(1, 8)]
    ctx_f = VariationContext(F, xbar, config=cfg, radii=[delta], extra_times=probes)
    ctx_g = VariationContext(ft, xbar, config=cfg, radii=[delta], extra_times=probes)
    v_f, _, _, _ = _eps_descent(ctx_f, delta, cfg.stop_tol)
    v_g, _, _, _ = _eps_descent(ctx_g, delta, cfg.stop_tol)
    if ctx_f.dp.grid.size != ctx_g.dp.grid.size:
        raise ConsistencyError("engine grids for F and its regularisation diverged")

    # endpoint jumps: sampled sup over the delta ball at the endpoint states
    def jump_at(t_node):
        centre = xbar.eval(t_node)
        probes_x = [centre]
        for frac in (0.5, 1.0):
            for d in _directions(centre.size):
                probes_x.append(centre + delta * frac * d)
        worst = 0.0
        for x in probes_x:
            for a in F.A_points:
                worst = max(
                    worst,
                    hausdorff_distance(F.eval(t_node, x, a), ft.eval(t_node, x, a)),
                )
        return worst

    jump_s = jump_at(F.S)
    jump_t = jump_at(F.T)

    rows = []
    # z1: one-sided continuity of the regularised variation at S and T
    z1_s = float(v_g[1] - v_g[0])
    z1_t = float(v_g[-1] - v_g[-2])
    rows.append({"check": "z1-right-at-S", "residual": z1_s})
    rows.append({"check": "z1-left-at-T", "residual": z1_t})
    worst_z1 = max(abs(z1_s), abs(z1_t))

    # z2: interior offset by jump_S, full offset at T
    worst_z2 = 0.0
    for t in probes:
        i = ctx_f.index_of(t)
        res = abs(float(v_g[i]) - (float(v_f[i]) - jump_s))
        rows.append({"check": "z2-interior", "t": t, "residual": res})
        worst_z2 = max(worst_z2, res)
    res_t = abs(float(v_g[-1]) - (float(v_f[-1]) - jump_s - jump_t))
    rows.append({"check": "z2-at-T", "residual": res_t})
    worst_z2 = max(worst_z2, res_t)

    # z3: interior increments agree
    worst_z3 = 0.0
    for t0, t1 in zip(probes, probes[1:]):
        i0, i1 = ctx_f.index_of(t0), ctx_f.index_of(t1)
        res = abs((float(v_g[i1]) - float(v_g[i0])) - (float(v_f[i1]) - float(v_f[i0])))
        rows.append({"check": "z3-increment", "s": t0, "t": t1, "residual": res})
        worst_z3 = max(worst_z3, res)

    passed = max(worst_z1, worst_z2, worst_z3) <= z_tol
    return EndpointReport(
        delta=delta,
        jump_S=jump_s,
        jump_T=jump_t,
        worst_z1=worst_z1,
        worst_z2=worst_z2,
        worst_z3=worst_z3,
        rows=rows,
        passed=passed,
    )


@dataclass
class ProbeReport:
    rows: list
    ok: bool
    worst: float


def check_monotone_nesting(
    F: Multifunction,
    xbar: Trajectory,
    probes: int = 100,
    *,
    seed: int = 0,
    config: EngineConfig | None = None,
    ctx: VariationContext | None = None,
    hard_tol: float = 1e-9,
) -> ProbeReport:
    """Randomised ordering checks between engine levels.

    Pointwise: smaller eps, smaller radius and smaller parameter subset never
    increase the value (checked at hard_tol, holds exactly by construction),
    and each value is nonnegative and nondecreasing in t.  Increments of the
    smaller-radius value against the larger-radius one are checked with the
    finite-mesh slack 2*gamma(c_bound*eps) when both moduli are declared;
    rows without moduli are skipped.
    """
    if ctx is None:
        ctx = VariationContext(F, xbar, config=config)
    rng = np.random.default_rng(seed)
    n_eps = len(ctx.eps_schedule)
    deltas = ctx.delta_schedule
    n_a = len(F.A_points)
    rows = []
    worst = -np.inf
    for _ in range(probes):
        k_big = int(rng.integers(0, n_eps))
        k_small = int(rng.integers(k_big, n_eps))
        d_big = deltas[int(rng.integers(0, len(deltas)))]
        d_small = d_big * 2.0 ** -int(rng.integers(0, 3))
        if n_a > 1:
            size = int(rng.integers(1, n_a + 1))
            sub = tuple(sorted(rng.choice(n_a, size=size, replace=False).tolist()))
        else:
            sub = (0,)
        full = tuple(range(n_a))
        v_small = ctx.dp.sweep(ctx.eps_schedule[k_small], ctx.level_for(d_small), sub)
        v_big = ctx.dp.sweep(ctx.eps_schedule[k_big], ctx.level_for(d_big), full)
        point_margin = float(np.max(v_small - v_big))
        mono_margin = float(-min(np.min(np.diff(v_big)), v_big[0], np.min(np.diff(v_small)), v_small[0]))
        row = {
            "eps": ctx.eps_schedule[k_big],
            "eps_small": ctx.eps_schedule[k_small],
            "delta": d_big,
            "delta_small": d_small,
            "pointwise_margin": point_margin,
            "monotone_margin": mono_margin,
        }
        worst = max(worst, point_margin, mono_margin)
        if F.gamma is not None and F.c_bound is not None:
            slack = 2.0 * float(F.gamma(F.c_bound * ctx.eps_schedule[k_big])) + hard_tol
            m = ctx.dp.grid.size
            i = int(rng.integers(0, m - 1))
            j = int(rng.integers(i + 1, m))
            inc_small = float(v_small[j] - v_small[i])
            inc_big = float(v_big[j] - v_big[i])
            row["increment_margin"] = inc_small - inc_big - slack
            worst = max(worst, row["increment_margin"])
        rows.append(row)
    ok = worst <= hard_tol
    return ProbeReport(rows=rows, ok=ok, worst=float(worst))


def check_increment_bound(
    F: Multifunction,
    xbar: Trajectory,
    probes: int = 100,
    *,
    seed: int = 0,
    config: EngineConfig | None = None,
    ctx: VariationContext | None = None,
    hard_tol: float = 1e-9,
) -> ProbeReport:
    """Sampled per-cell distances never exceed the variation increment.

    Probes are drawn from the engine's own edge lattice and sample family, so
    the inequality V(t) - V(s) >= d_H(F(t, y, a), F(s, y, a)) is certified at
    hard_tol with no numerical head-room games: the sampled distance is one
    of the terms inside the edge weight, and the sweep kept that weight as a
    chain candidate.
    """
    if ctx is None:
        ctx = VariationContext(F, xbar, config=config)
    rng = np.random.default_rng(seed)
    dp = ctx.dp
    rows = []
    worst = -np.inf
    n_eps = len(ctx.eps_schedule)
    for _ in range(probes):
        k = int(rng.integers(0, n_eps))
        eps = ctx.eps_schedule[k]
        delta = ctx.delta_schedule[int(rng.integers(0, len(ctx.delta_schedule)))]
        level = ctx.level_for(delta)
        feas_offsets = [o for o in dp.offsets if bool(np.any(dp.spans[o] <= eps * (1 + 1e-12)))]
        o = feas_offsets[int(rng.integers(0, len(feas_offsets)))]
        feas = np.flatnonzero(dp.spans[o] <= eps * (1 + 1e-12))
        e = int(feas[int(rng.integers(0, feas.size))])
        a_idx = int(rng.integers(0, len(F.A_points)))
        d_all = dp.edge_sample_distances(o, e, level, a_idx)
        d = float(d_all[int(rng.integers(0, d_all.size))])
        stored = float(dp.weights[o][e, level, a_idx])
        if float(np.max(d_all)) > stored + 1e-12:
            raise ConsistencyError("edge probe recomputation exceeded the stored weight")
        v = dp.sweep(eps, level)
        margin = d - (float(v[e + o]) - float(v[e]))
        rows.append(
            {
                "eps": eps,
                "delta": delta,
                "s": float(dp.grid[e]),
                "t": float(dp.grid[e + o]),
                "distance": d,
                "increment": float(v[e + o]) - float(v[e]),
                "margin": margin,
            }
        )
        worst = max(worst, margin)
    ok = worst <= hard_tol
    return ProbeReport(rows=rows, ok=ok, worst=float(worst))
