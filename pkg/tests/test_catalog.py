import numpy as np
import pytest

from tubevar import catalog
from tubevar.errors import DomainError
from tubevar.fields import Field, Multifunction
from tubevar.sensitivity import ControlSignal, ControlSystem
from tubevar.trajectory import Trajectory


REQUIRED_KEYS = ("section2-example", "bangbang-half")


def test_required_entries_present():
    table = catalog.list_catalog()
    for key in REQUIRED_KEYS:
        assert key in table
    keys = {e.key for e in catalog.entries()}
    assert set(REQUIRED_KEYS) <= keys


def test_unknown_key_is_loud():
    with pytest.raises(DomainError) as err:
        catalog.get("does-not-exist")
    # the message lists what is available
    assert "section2-example" in str(err.value)


def test_entry_kinds_are_wired():
    for e in catalog.entries():
        built = catalog.get(e.key)
        if e.kind in ("variation", "tv"):
            assert isinstance(built["F"], Multifunction)
            assert isinstance(built["xbar"], Trajectory)
        elif e.kind == "measure":
            assert isinstance(built["field"], Field)
        elif e.kind == "system":
            assert isinstance(built["system"], ControlSystem)
        elif e.kind == "control":
            assert isinstance(built["control"], ControlSignal)
        else:
            raise AssertionError(f"unexpected kind {e.kind}")


def test_entries_filter_by_kind():
    tv_keys = [e.key for e in catalog.entries(kind="tv")]
    assert len(tv_keys) == 5
    assert all(k.startswith("tv-") for k in tv_keys)


def test_model_problem_expectations_are_callable():
    e = catalog.get("section2-example")
    exp = e["expected"]
    assert exp["eta"](0.8) == pytest.approx(0.32)
    assert exp["eta_simple"](0.8) == pytest.approx(0.8)
    F = e["F"]
    # field spot check: F(t, x) = {t x}
    s = F.eval(0.5, np.array([0.4]), F.A_points[0])
    assert s.points()[0, 0] == pytest.approx(0.2)


def test_catalog_table_layout():
    table = catalog.list_catalog()
    lines = table.splitlines()
    assert lines[0].split()[:2] == ["key", "kind"]
    # one row per entry plus header and rule
    assert len(lines) == len(catalog.entries()) + 2
