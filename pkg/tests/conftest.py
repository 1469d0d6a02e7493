import os

import pytest
from hypothesis import HealthCheck, settings

from vqtsp.tsp import TspInstance, random_instance

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def square():
    return TspInstance(((0, 0), (0, 1), (1, 1), (1, 0)), name="square")


@pytest.fixture
def inst8():
    return random_instance(8, seed=7)


@pytest.fixture
def write_csv(tmp_path):
    def _write(text, name="inst.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


# one PASS/FAIL line per acceptance criterion, printed after the run
VERDICTS = {}


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(VERDICTS):
        ok, detail = VERDICTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
