"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""
import pytest

VERDICTS = {}


@pytest.fixture
def verdict(request):
    """Call with (number, summary) once the criterion's checks are about to run."""
    state = {}

    def record(number, summary):
        state["key"] = (number, summary)

    yield record
    if "key" in state:
        rep = getattr(request.node, "rep_call", None)
        VERDICTS[state["key"]] = rep is not None and rep.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for (number, summary), ok in sorted(VERDICTS.items()):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {summary}")
