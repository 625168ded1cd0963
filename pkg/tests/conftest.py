"""Collects one pass/fail line per acceptance criterion for the terminal summary."""
import pytest

_LINES = {}


@pytest.fixture
def detail(request):
    """Call ``detail("...")`` to attach measured values to the criterion line."""
    def note(text):
        request.node.user_properties.append(("detail", str(text)))
    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    notes = "; ".join(v for k, v in item.user_properties if k == "detail")
    status = "PASS" if rep.passed else "FAIL"
    if rep.failed and not notes:
        notes = str(rep.longrepr.reprcrash.message if hasattr(rep.longrepr, "reprcrash") else rep.longrepr)
    _LINES[(number, item.name)] = f"criterion {number} {status}: {title}" + (f" ({notes})" if notes else "")


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_LINES):
        terminalreporter.write_line(_LINES[key])
