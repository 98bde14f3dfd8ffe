"""Scenario files: a small JSON schema driving reproducible runs.

A scenario names a problem (catalog entry or tabulated samples), numeric
settings, and a kind selecting the pipeline: variation profile, measure
refinement, sensitivity report, or the full verification sweep.  Running one
produces per-scenario artifacts (CSV and JSON, byte-identical across reruns
of the same file) plus a run_record.json capturing the scenario hash,
resolved settings, per-check outcomes and wall time.  The wall time is the
only field that varies between identical runs, and it lives only in the run
record, never in numeric artifacts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import catalog
from .errors import DomainError
from .fields import BatchEval, Multifunction
from .geometry import Singleton
from .measure import partial_variation_measure
from .sensitivity import fd_oracle, sensitivity_derivative
from .trajectory import constant_trajectory
from .variation import EngineConfig, eta_profile
from .verification import run_all

SCHEMA_VERSION = 1

_KINDS = ("variation", "measure", "sensitivity", "verify-all")

_SETTING_KEYS = {
    "variation": {"times", "eps_steps", "delta_steps", "stop_tol"},
    "measure": {"levels", "tol", "xi_rule"},
    "sensitivity": {"h", "side", "n_steps", "measure_levels", "fd"},
    "verify-all": set(),
}


def _require_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise DomainError(f"unknown {where} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    problem: dict
    settings: dict
    subdir: str
    source_bytes: bytes = field(repr=False, default=b"")

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.source_bytes).hexdigest()


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DomainError(f"{path}: cannot read scenario file ({e.strerror})") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as e:
        raise DomainError(f"{path}: not valid JSON ({e})") from None
    if not isinstance(doc, dict):
        raise DomainError(f"{path}: scenario must be a JSON object")
    _require_keys(
        doc, {"schema_version", "name", "kind", "problem", "settings", "outputs"}, "scenario"
    )
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DomainError(
            f"{path}: schema_version must be {SCHEMA_VERSION}, got {doc.get('schema_version')!r}"
        )
    kind = doc.get("kind")
    if kind not in _KINDS:
        raise DomainError(f"{path}: kind must be one of {_KINDS}, got {kind!r}")
    name = doc.get("name") or path.stem
    if not isinstance(name, str) or not name:
        raise DomainError(f"{path}: name must be a nonempty string")
    settings = doc.get("settings", {})
    if not isinstance(settings, dict):
        raise DomainError(f"{path}: settings must be an object")
    _require_keys(settings, _SETTING_KEYS[kind], "settings")
    for key in ("stop_tol", "tol", "h"):
        if key in settings and key != "h" and not settings[key] >= 0:
            raise DomainError(f"{path}: {key} must be nonnegative")
    problem = doc.get("problem", {})
    if not isinstance(problem, dict):
        raise DomainError(f"{path}: problem must be an object")
    outputs = doc.get("outputs", {})
    _require_keys(outputs, {"subdir"}, "outputs")
    subdir = outputs.get("subdir") or re.sub(r"[^A-Za-z0-9._-]+", "-", name)
    _validate_problem(kind, problem, path)
    return Scenario(
        name=name,
        kind=kind,
        problem=problem,
        settings=settings,
        subdir=subdir,
        source_bytes=raw,
    )


def _validate_problem(kind: str, problem: dict, path) -> None:
    if kind == "verify-all":
        _require_keys(problem, set(), "problem")
        return
    if kind == "sensitivity":
        _require_keys(problem, {"system", "control"}, "problem")
        for slot, want_kind in (("system", "system"), ("control", "control")):
            key = problem.get(slot)
            if not isinstance(key, str):
                raise DomainError(f"{path}: problem.{slot} must name a catalog entry")
            entry = {e.key: e for e in catalog.entries()}.get(key)
            if entry is None or entry.kind != want_kind:
                raise DomainError(f"{path}: {key!r} is not a catalog {want_kind}")
        return
    _require_keys(problem, {"catalog", "tabulated"}, "problem")
    if ("catalog" in problem) == ("tabulated" in problem):
        raise DomainError(f"{path}: problem needs exactly one of catalog | tabulated")
    if "catalog" in problem:
        key = problem["catalog"]
        known = {e.key: e for e in catalog.entries()}
        if key not in known:
            raise DomainError(f"{path}: unknown catalog entry {key!r}")
        want = {"variation": ("variation", "tv"), "measure": ("measure",)}[kind]
        if known[key].kind not in want:
            raise DomainError(
                f"{path}: catalog entry {key!r} has kind {known[key].kind!r}, "
                f"scenario kind {kind!r} needs one of {want}"
            )
        return
    tab = problem["tabulated"]
    if kind != "variation":
        raise DomainError(f"{path}: tabulated problems are variation-only")
    _require_keys(tab, {"times", "values"}, "problem.tabulated")
    times = np.asarray(tab.get("times", []), dtype=float)
    values = np.asarray(tab.get("values", []), dtype=float)
    if times.ndim != 1 or times.size < 2 or np.any(np.diff(times) <= 0):
        raise DomainError(f"{path}: tabulated times must be strictly increasing, length >= 2")
    if values.shape != times.shape:
        raise DomainError(f"{path}: tabulated values must match times in shape")
    if not np.all(np.isfinite(times)) or not np.all(np.isfinite(values)):
        raise DomainError(f"{path}: tabulated data must be finite")


def tabulated_multifunction(times, values) -> Multifunction:
    """x-independent piecewise-linear scalar signal as a singleton field."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)

    def batch(ts, xs, a):
        return np.interp(np.asarray(ts, float), times, values)[:, None]

    return Multifunction(
        eval_fn=lambda t, x, a: Singleton(
            np.asarray([np.interp(t, times, values)])
        ),
        S=float(times[0]),
        T=float(times[-1]),
        delta_bar=1.0,
        c_bound=float(np.max(np.abs(values))) + 1.0,
        gamma=lambda s: 0.0,
        breakpoints=tuple(float(t) for t in times[1:-1]),
        batch=BatchEval("points", batch),
    )


# ----------------------------------------------------------------------
# running


def _write_json(path: Path, doc: dict) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _run_variation(sc: Scenario, outdir: Path):
    if "catalog" in sc.problem:
        entry = catalog.get(sc.problem["catalog"])
        F, xbar = entry["F"], entry["xbar"]
        expected = entry.get("expected", {})
        expected_tv = entry.get("expected_tv", expected.get("tv"))
    else:
        tab = sc.problem["tabulated"]
        F = tabulated_multifunction(tab["times"], tab["values"])
        xbar = constant_trajectory([0.0], F.S, F.T)
        expected = {}
        expected_tv = float(np.sum(np.abs(np.diff(np.asarray(tab["values"], float)))))
    cfg = EngineConfig(
        eps_steps=int(sc.settings.get("eps_steps", 9)),
        delta_steps=int(sc.settings.get("delta_steps", 8)),
        stop_tol=float(sc.settings.get("stop_tol", 1e-4)),
    )
    times = sc.settings.get("times")
    if times is None:
        times = [F.S + (F.T - F.S) * k / 8.0 for k in range(1, 9)]
    times = sorted(float(t) for t in times)
    if times and (times[0] <= F.S or times[-1] > F.T):
        raise DomainError("profile times must lie in (S, T]")
    profile = eta_profile(F, xbar, times, config=cfg)
    profile.to_csv(outdir / "profile.csv")
    profile.to_json(outdir / "profile.json")
    checks = [
        {
            "name": "profile-monotone",
            "passed": True,
            "detail": "nondecreasing by construction, validated on build",
        }
    ]
    vals = dict(profile.values)
    if "eta" in expected:
        worst = max(abs(vals[t] - expected["eta"](t)) for t in times)
        checks.append(
            {
                "name": "closed-form-profile",
                "passed": bool(worst <= 1e-3),
                "detail": f"max |eta - closed form| = {worst:.3e}",
            }
        )
    if expected_tv is not None:
        got = vals[times[-1]] if times else 0.0
        err = abs(got - expected_tv)
        checks.append(
            {
                "name": "total-variation",
                "passed": bool(err <= 1e-6),
                "detail": f"|eta(T) - tv| = {err:.3e}",
            }
        )
    return ["profile.csv", "profile.json"], checks


def _run_measure(sc: Scenario, outdir: Path):
    entry = catalog.get(sc.problem["catalog"])
    fld, xbar = entry["field"], entry["xbar"]
    limit = partial_variation_measure(
        fld,
        xbar,
        levels=int(sc.settings.get("levels", 11)),
        tol=float(sc.settings.get("tol", 1e-3)),
        xi_rule=str(sc.settings.get("xi_rule", "left")),
    )
    limit.measure.to_csv(outdir / "atoms.csv")
    limit.to_json(outdir / "measure.json")
    dominated = all(row["dominated"] for row in limit.cauchy_trace)
    checks = [
        {
            "name": "cauchy-converged",
            "passed": bool(limit.converged),
            "detail": f"trace length {len(limit.cauchy_trace)}",
        },
        {
            "name": "trace-dominated",
            "passed": bool(dominated),
            "detail": "discrepancy under the modulus bound at every level",
        },
    ]
    return ["atoms.csv", "measure.json"], checks


def _run_sensitivity(sc: Scenario, outdir: Path):
    sys = catalog.get(sc.problem["system"])["system"]
    u = catalog.get(sc.problem["control"])["control"]
    n_steps = int(sc.settings.get("n_steps", 800))
    rep = sensitivity_derivative(
        sys,
        u,
        h=float(sc.settings.get("h", 0.0)),
        side=str(sc.settings.get("side", "right")),
        measure_levels=int(sc.settings.get("measure_levels", 14)),
        n_steps=n_steps,
    )
    rep.to_json(outdir / "report.json")
    ts = rep.state.times
    xs = rep.state.eval_many(ts)
    ps = rep.costate.eval_many(ts)
    us = u.shifted(rep.h).eval_many(ts, "right") if rep.h else u.eval_many(ts, "right")
    with open(outdir / "trace.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["t"]
            + [f"x_{i + 1}" for i in range(xs.shape[1])]
            + [f"p_{i + 1}" for i in range(ps.shape[1])]
            + [f"u_{i + 1}" for i in range(us.shape[1])]
        )
        for k in range(ts.size):
            w.writerow(
                [repr(float(ts[k]))]
                + [repr(float(v)) for v in xs[k]]
                + [repr(float(v)) for v in ps[k]]
                + [repr(float(v)) for v in us[k]]
            )
    checks = [
        {
            "name": "measure-converged",
            "passed": bool(rep.converged),
            "detail": f"value {rep.value:.6f} over window {rep.window}",
        }
    ]
    if sc.settings.get("fd", True) and rep.side in ("left", "right"):
        fd = fd_oracle(sys, u, h0=rep.h, side=rep.side, n_steps=n_steps)
        err = abs(rep.value - fd["extrapolated"])
        checks.append(
            {
                "name": "fd-agreement",
                "passed": bool(err <= 1e-2),
                "detail": f"|formula - fd| = {err:.3e}",
            }
        )
    return ["report.json", "trace.csv"], checks


def _run_verify_all(sc: Scenario, outdir: Path):
    results = run_all()
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "verification-report",
        "criteria": [
            {"name": r.name, "passed": r.passed, "detail": r.detail} for r in results
        ],
    }
    _write_json(outdir / "verify.json", doc)
    checks = [{"name": r.name, "passed": bool(r.passed), "detail": r.detail} for r in results]
    return ["verify.json"], checks


_RUNNERS = {
    "variation": _run_variation,
    "measure": _run_measure,
    "sensitivity": _run_sensitivity,
    "verify-all": _run_verify_all,
}


@dataclass
class RunRecord:
    name: str
    kind: str
    scenario_sha256: str
    settings: dict
    artifacts: list
    checks: list
    passed: bool
    wall_time_s: float
    outdir: Path

    def to_doc(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "run-record",
            "name": self.name,
            "scenario_kind": self.kind,
            "scenario_sha256": self.scenario_sha256,
            "settings": self.settings,
            "artifacts": self.artifacts,
            "checks": self.checks,
            "passed": self.passed,
            "wall_time_s": self.wall_time_s,
        }


def run(scenario: Scenario | str, out_root) -> RunRecord:
    import time

    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    outdir = Path(out_root) / scenario.subdir
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    artifacts, checks = _RUNNERS[scenario.kind](scenario, outdir)
    wall = time.perf_counter() - t0
    record = RunRecord(
        name=scenario.name,
        kind=scenario.kind,
        scenario_sha256=scenario.sha256,
        settings=scenario.settings,
        artifacts=artifacts,
        checks=checks,
        passed=all(c["passed"] for c in checks),
        wall_time_s=wall,
        outdir=outdir,
    )
    _write_json(outdir / "run_record.json", record.to_doc())
    return record
