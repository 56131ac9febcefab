import numpy as np
import pytest

from ssanova.grid import GridDomain
from ssanova.processes import ProcessSpec, ShiftSpec, generate_grouped
from ssanova.sample import GroupedSample

STUDY = GridDomain(0.25, 0.75, 100)


@pytest.fixture
def study_domain():
    return STUDY


@pytest.fixture
def sbm_null():
    return generate_grouped(ProcessSpec.sbm(), ShiftSpec(0.0, 0.0, STUDY), (20, 20, 20), 11)


@pytest.fixture
def small_sample():
    rng = np.random.default_rng(3)
    d = GridDomain(0.0, 1.0, 6)
    return GroupedSample(d, rng.normal(size=(9, 6)), (3, 3, 3))



# --- one summary line per acceptance criterion ---------------------------------

_CRITERIA: dict[str, dict] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if "test_acceptance.py" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    entry = _CRITERIA.setdefault(name, {"outcome": "passed", "detail": ""})
    if report.failed:
        entry["outcome"] = "failed"
    elif report.skipped and entry["outcome"] == "passed":
        entry["outcome"] = "skipped"
    for key, value in report.user_properties:
        if key == "detail":
            entry["detail"] = value


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        entry = _CRITERIA[name]
        number, title = name[len("test_criterion_"):].split("_", 1)
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[entry["outcome"]]
        terminalreporter.write_line(f"criterion {int(number):2d} {status}  {title.replace('_', ' ')}: "
                                    f"{entry['detail']}")
