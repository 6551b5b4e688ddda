from pathlib import Path

import pytest

from gresilience.measurement import ActionKind, AttributeVector, CandidateAction
from gresilience.simulator import load_config

ROOT = Path(__file__).resolve().parents[1]
REFERENCE_SCENARIO = ROOT / "scenarios" / "reference.json"
REFERENCE_ATTRS = ROOT / "scenarios" / "reference_attrs.json"


@pytest.fixture
def a1():
    return CandidateAction("a1", ActionKind.LEARNING, AttributeVector(e_t=20.0, e_co2=2.0, h=4))


@pytest.fixture
def a2():
    return CandidateAction("a2", ActionKind.OPERATING, AttributeVector(e_t=15.0, e_co2=8.0, h=1))


@pytest.fixture
def pair(a1, a2):
    return [a1, a2]


@pytest.fixture
def reference_cfg():
    return load_config(REFERENCE_SCENARIO)


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
