from pathlib import Path

import pytest

from sxsine.sine_builder import SineParams

GOLDEN = Path(__file__).parent / "golden"

# the two worked examples: (A, omega, mu, phi)
SMALL = SineParams(0.5, 1.0, 2.0, 0.0)
SIMULINK = SineParams(10.0, 0.5, 20.0, 0.0)


@pytest.fixture
def golden_dir():
    return GOLDEN


# (criterion number, title, passed, detail), filled by test_acceptance.py
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} -- {detail}")
