import json
import re

import pytest

from grant_maturity.data import parse_dataset
from grant_maturity.templates import dataset_template

_acceptance: dict[str, str] = {}


@pytest.fixture
def template_dataset():
    return parse_dataset(json.dumps(dataset_template()))


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.failed:
        outcome = "PASS" if report.passed else "FAIL"
        if _acceptance.get(report.nodeid) != "FAIL":
            _acceptance[report.nodeid] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in sorted(_acceptance.items()):
        name = nodeid.split("::")[-1]
        m = re.match(r"test_criterion_(\d+)_(.*)", name)
        label = f"criterion {int(m.group(1)):>2}: {m.group(2).replace('_', ' ')}" if m else name
        terminalreporter.write_line(f"{outcome}  {label}")
