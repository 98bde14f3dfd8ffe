"""Acceptance gate: every numbered verification criterion must hold.

The criteria run once for the whole module; each test node owns one
criterion, so the -v listing reads as one pass/fail line per criterion and
the recorded detail string is printed alongside for the log.
"""

import pytest

from tubevar.verification import ALL_CRITERIA, run_all


@pytest.fixture(scope="module")
def results():
    return run_all()


_IDS = [c.__name__.split("criterion_", 1)[1] for c in ALL_CRITERIA]


@pytest.mark.parametrize("index", range(len(ALL_CRITERIA)), ids=_IDS)
def test_criterion(index, results):
    res = results[index]
    print(res.line)
    assert res.passed, res.line
