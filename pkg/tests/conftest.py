import numpy as np
import pytest
from hypothesis import settings

np.seterr(all="warn", under="ignore")

settings.register_profile("fast", max_examples=10)
settings.register_profile("thorough", max_examples=500)

GRID_CONFIGS = [(w, h) for w in range(12, 21) for h in range(1, 7) if w >= 2 * h]

_criteria: list[tuple[str, str, str]] = []


@pytest.fixture(scope="session")
def grid_configs():
    return list(GRID_CONFIGS)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion_"):
        _criteria.append((name, report.outcome.upper(), f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, dur in _criteria:
        label = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{label}  {name}  ({dur})")
