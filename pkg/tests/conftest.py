import numpy as np
import pytest

from cogmiso.closed_form import SystemConfig

ACCEPTANCE_MODULE = "test_acceptance.py"

# filled by the acceptance tests, printed at the end of the run
acceptance_lines = []
# outcomes of every other test in this session: nodeid -> passed
unit_outcomes = {}


def record_criterion(label, ok, detail=""):
    acceptance_lines.append((label, bool(ok), detail))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def cfg():
    return SystemConfig()


def pytest_collection_modifyitems(config, items):
    # acceptance last, so the property criterion can reuse this session's results
    items.sort(key=lambda item: item.nodeid.split("::")[0].endswith(ACCEPTANCE_MODULE))


def pytest_runtest_logreport(report):
    if ACCEPTANCE_MODULE in report.nodeid:
        return
    if report.when == "call" or report.failed:
        ok = report.passed or hasattr(report, "wasxfail")
        unit_outcomes[report.nodeid] = unit_outcomes.get(report.nodeid, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in acceptance_lines:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
