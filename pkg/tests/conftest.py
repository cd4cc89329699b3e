from __future__ import annotations

from pathlib import Path

import pytest

GOLDEN = Path(__file__).parent / "golden"

_DETAILS = pytest.StashKey[dict]()
_LINES = pytest.StashKey[dict]()


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


def pytest_configure(config):
    config.stash[_DETAILS] = {}
    config.stash[_LINES] = {}


@pytest.fixture
def detail(request):
    """Attach a one-line summary to the running acceptance criterion."""
    marker = request.node.get_closest_marker("criterion")

    def note(text: str) -> None:
        request.config.stash[_DETAILS][marker.args[0]] = text

    return note


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    num = marker.args[0]
    text = item.config.stash[_DETAILS].get(num, "")
    if rep.failed and call.excinfo is not None and not text:
        text = call.excinfo.exconly().splitlines()[0][:200]
    status = "PASS" if rep.passed else "FAIL"
    item.config.stash[_LINES][num] = f"criterion {num:>2}: {status}  {text}"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
