import time

import pytest

from tlsn_desk.algebra import get_field
from tlsn_desk.prg import Prg

_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


@pytest.fixture
def prg(request):
    """A PRG seeded by the test's node id, so every test draws its own stream."""
    return Prg(request.node.nodeid.encode(), "test")


@pytest.fixture(params=["toy", "p256", "gf2_16", "gf2_128"])
def field(request):
    return get_field(request.param)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    n, title = mark.args
    _ACCEPTANCE[n] = ("PASS" if rep.passed else "FAIL", title, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, title, secs = _ACCEPTANCE[n]
        terminalreporter.write_line(f"ACCEPTANCE {n} {status} {title} ({secs:.1f} s)")


class Stopwatch:
    def __init__(self):
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start


@pytest.fixture
def stopwatch():
    return Stopwatch()
