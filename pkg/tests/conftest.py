import pytest

_criteria: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): test that decides one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call" or report.failed:
        _criteria[name] = _criteria.get(name, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok in _criteria.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
