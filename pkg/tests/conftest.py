import pytest

_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        title = _acceptance_titles.get(report.nodeid)
        if title is not None:
            number, text = title
            previous = _acceptance.get(number, (text, "PASS"))[1]
            outcome = "PASS" if report.outcome == "passed" and previous == "PASS" else "FAIL"
            _acceptance[number] = (text, outcome)


_acceptance_titles = {}


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _acceptance_titles[item.nodeid] = marker.args


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        text, outcome = _acceptance[number]
        terminalreporter.write_line(f"[{outcome}] criterion {number}: {text}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
