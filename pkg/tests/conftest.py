import sys
from pathlib import Path

import pytest

from matchstick import numerics as nm
from matchstick.board import Board
from matchstick.config import Config
from matchstick.constructions import Construction, line_from_stick
from matchstick.verifier import verify_trace

sys.path.insert(0, str(Path(__file__).parent))

EPS_EQ = nm.mpfr(2) ** -128
EPS_CMP = nm.mpfr(2) ** -64


def fresh(config: Config | None = None, grid: str = "direct") -> Construction:
    return Construction(Board(config or Config()), grid=grid)


def seed_line(cx: Construction, x, y, angle="0"):
    """A one-stick line from a given point (x, y) at ``angle`` degrees."""
    a = cx.board.given(x, y)
    stick, _ = cx.board.lay_free(a, angle)
    return line_from_stick(cx, stick), a


def accepted(board_or_trace) -> bool:
    trace = getattr(board_or_trace, "trace", board_or_trace)
    report = verify_trace(trace)
    assert report.accepted, report.text()
    return True


def close(a, b, eps=EPS_CMP) -> bool:
    return abs(nm.mpfr(a) - nm.mpfr(b)) <= eps


def point_close(p, x, y, eps=EPS_CMP) -> bool:
    return close(p.x, x, eps) and close(p.y, y, eps)


@pytest.fixture
def cx():
    return fresh()


@pytest.fixture(autouse=True)
def working_precision():
    # test-side arithmetic runs at the library's default precision
    with nm.working(nm.DEFAULT_PRECISION):
        yield


# (number, passed, detail) for each acceptance criterion, filled by test_acceptance
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}")
