import pytest

from thermal_backdoor import kernels

_CRITERIA = {}


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Each kernel implementation in turn."""
    return kernels.get_backend(request.param)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = (marker.args[0], marker.args[1])
    failed = rep.failed or (rep.when == "call" and rep.outcome != "passed" and not rep.skipped)
    prev = _CRITERIA.get(key, "PASS")
    if rep.when == "call" or rep.failed:
        _CRITERIA[key] = "FAIL" if failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
