"""Scenario loading, artifact runs, CLI exit codes and reproducibility."""

import json

import pytest

from tubevar.cli import main
from tubevar.errors import DomainError
from tubevar.scenario import load_scenario, run


def write_scenario(tmp_path, name="s", **doc):
    base = {
        "schema_version": 1,
        "name": name,
        "kind": "variation",
        "problem": {"catalog": "two-steps"},
        "settings": {},
        "outputs": {},
    }
    base.update(doc)
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(base))
    return p


# ----------------------------------------------------------------------
# loading and validation


def test_load_fills_defaults(tmp_path):
    sc = load_scenario(write_scenario(tmp_path, name="alpha"))
    assert sc.name == "alpha"
    assert sc.subdir == "alpha"
    assert sc.sha256


def test_unknown_scenario_key_rejected(tmp_path):
    p = write_scenario(tmp_path, extra="nope")
    with pytest.raises(DomainError, match="unknown scenario keys"):
        load_scenario(p)


def test_unknown_setting_rejected(tmp_path):
    p = write_scenario(tmp_path, settings={"levels": 3})  # a measure-only key
    with pytest.raises(DomainError, match="unknown settings keys"):
        load_scenario(p)


def test_schema_version_checked(tmp_path):
    p = write_scenario(tmp_path, schema_version=99)
    with pytest.raises(DomainError, match="schema_version"):
        load_scenario(p)


def test_problem_needs_exactly_one_source(tmp_path):
    p = write_scenario(
        tmp_path,
        problem={"catalog": "two-steps", "tabulated": {"times": [0, 1], "values": [0, 1]}},
    )
    with pytest.raises(DomainError, match="exactly one"):
        load_scenario(p)


def test_kind_mismatch_rejected(tmp_path):
    p = write_scenario(tmp_path, kind="measure", problem={"catalog": "two-steps"})
    with pytest.raises(DomainError, match="kind"):
        load_scenario(p)


def test_tabulated_must_increase(tmp_path):
    p = write_scenario(
        tmp_path, problem={"tabulated": {"times": [0.0, 0.5, 0.5], "values": [0, 1, 2]}}
    )
    with pytest.raises(DomainError, match="strictly increasing"):
        load_scenario(p)


def test_sensitivity_problem_checked(tmp_path):
    p = write_scenario(
        tmp_path, kind="sensitivity", problem={"system": "ramp", "control": "ramp"}
    )
    with pytest.raises(DomainError, match="not a catalog system"):
        load_scenario(p)


# ----------------------------------------------------------------------
# running


def test_variation_run_writes_artifacts(tmp_path):
    sc = load_scenario(write_scenario(tmp_path, name="var"))
    record = run(sc, tmp_path / "out")
    assert record.passed
    outdir = tmp_path / "out" / "var"
    assert (outdir / "profile.csv").exists()
    assert (outdir / "profile.json").exists()
    rec = json.loads((outdir / "run_record.json").read_text())
    assert rec["scenario_sha256"] == sc.sha256
    assert rec["kind"] == "run-record"
    names = [c["name"] for c in rec["checks"]]
    assert "total-variation" in names


def test_rerun_is_byte_identical(tmp_path):
    sc = load_scenario(write_scenario(tmp_path, name="det"))
    run(sc, tmp_path / "a")
    run(sc, tmp_path / "b")
    for art in ("profile.csv", "profile.json"):
        assert (tmp_path / "a" / "det" / art).read_bytes() == (
            tmp_path / "b" / "det" / art
        ).read_bytes()


def test_profile_csv_columns(tmp_path):
    sc = load_scenario(write_scenario(tmp_path, name="cols"))
    record = run(sc, tmp_path / "out")
    lines = (record.outdir / "profile.csv").read_text().strip().splitlines()
    assert lines[0] == "t,eta"
    assert float(lines[1].split(",")[0]) == 0.0


# ----------------------------------------------------------------------
# command line


def test_cli_run_and_exit_codes(tmp_path, capsys):
    p = write_scenario(tmp_path, name="cli-ok")
    code = main(["run", str(p), "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 0
    assert "cli-ok [variation] PASS" in out


def test_cli_failing_check_exits_one(tmp_path, capsys):
    p = write_scenario(
        tmp_path,
        name="cli-shallow",
        kind="measure",
        problem={"catalog": "step-half"},
        settings={"levels": 4},
    )
    code = main(["run", str(p), "--out", str(tmp_path / "out")])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out


def test_cli_invalid_scenario_exits_two(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["run", str(bad), "--out", str(tmp_path / "out")])
    err = capsys.readouterr().err
    assert code == 2
    assert "invalid scenario" in err


def test_cli_no_files(capsys):
    assert main(["run"]) == 0
    assert "nothing to do" in capsys.readouterr().out


def test_cli_catalog(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    assert "section2-example" in out
    assert "bangbang-half" in out


def test_out_root_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TUBEVAR_OUT", str(tmp_path / "envout"))
    p = write_scenario(tmp_path, name="env")
    assert main(["run", str(p)]) == 0
    capsys.readouterr()
    assert (tmp_path / "envout" / "env" / "profile.csv").exists()
