import sys
from pathlib import Path

import pytest

# make the oracle helpers importable as a plain module
sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if item.module.__name__.endswith("test_acceptance") and item.name.startswith("test_criterion_"):
        number = int(item.name.split("_")[2])
        title = (item.function.__doc__ or item.name).strip()
        failed = report.failed or _criteria.get(number, (None, False))[1]
        _criteria[number] = (title, failed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, failed = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {'FAIL' if failed else 'PASS'}  {title}")
