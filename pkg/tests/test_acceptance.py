"""The acceptance suite: one test per criterion, each reported as a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py``; the verdicts appear in the
"acceptance criteria" section at the end of the pytest output.
"""

import contextlib
import subprocess
import sys
import time
from fractions import Fraction

import gmpy2
from click.testing import CliRunner

import test_constructions as tc
from conftest import ACCEPTANCE, EPS_CMP, accepted, fresh, point_close, seed_line
from generators import random_program
from matchstick import cli
from matchstick import numerics as nm
from matchstick.constructions import (
    circle_circle_intersect,
    circle_line_intersect,
    extend_line,
    line_through,
    perpendicular_at,
)
from matchstick.numerics import Cmp
from matchstick.verifier import verify_trace
from mutations import mutations

PROGRAMS = 500
MUTATIONS = 10_000


@contextlib.contextmanager
def criterion(number, detail):
    """Record a verdict for ``number``; the body may append notes to the yielded list."""
    notes = []
    try:
        yield notes
    except BaseException:
        ACCEPTANCE.append((number, False, "; ".join([detail, *notes])))
        raise
    ACCEPTANCE.append((number, True, "; ".join([detail, *notes])))


def test_end_to_end_programs_check(tmp_path):
    with criterion(1, f"{PROGRAMS} random programs pass check") as notes:
        runner = CliRunner()
        failures = []
        start = time.perf_counter()
        for seed in range(PROGRAMS):
            kind, source = random_program(seed)
            path = tmp_path / f"p{seed}.euclid"
            path.write_text(source)
            result = runner.invoke(cli.main, ["check", str(path)])
            if result.exit_code != 0:
                failures.append((seed, kind, result.exit_code))
        elapsed = time.perf_counter() - start
        notes.append(f"{PROGRAMS - len(failures)}/{PROGRAMS} passed in {elapsed:.0f} s (target < 300 s)")
        assert failures == []
        assert elapsed < 300


def test_extension_to_length_100():
    with criterion(2, "unit stick extended to length 100") as notes:
        cx = fresh()
        a = cx.board.given(0, 0)
        stick, _ = cx.board.lay_free(a, "0")
        far = extend_line(cx, stick, length=100).lattice_point(100)
        notes.append(f"{cx.board.primitive_count} instructions (limit 300)")
        assert cx.board.primitive_count <= 300
        assert point_close(cx.board.point(far), 100, 0, EPS_CMP)
        assert accepted(cx.board)


def test_right_angle_trial_boundary():
    with criterion(3, "29 degree trial legal, 31 degree trial rejected, |d.n| <= 2^-64") as notes:
        cx, a, s = tc._trial_length("29")
        assert cx.board.cmp_unit(a, s) is Cmp.LESS
        cx.board.lay_from_through(a, s)
        assert accepted(cx.board)

        cx, a, s = tc._trial_length("31")
        report = verify_trace(tc._forged_lay(cx, a, s))
        assert not report.accepted and report.findings[0].code == "UnitLengthViolation"

        cx = fresh()
        d, a = seed_line(cx, "0.3", "-1.2", "17.5")
        n = perpendicular_at(cx, d, a)
        dot = abs(nm.dot(n.direction, d.direction))
        notes.append(f"|d.n| = {float(dot):.2e}")
        assert dot <= EPS_CMP
        assert accepted(cx.board)


def test_grid_covering_at_distance_10_3():
    with criterion(4, "grid covering for B at distance 10.3") as notes:
        cx, grid, target = tc._grid(("10.3", "0"))
        notes.append(f"{grid.instructions} instructions (pinned at {tc.SPIRAL_PIN_10_3})")
        tc._assert_in_cell(cx, grid, target)
        assert grid.instructions <= tc.SPIRAL_PIN_10_3
        assert accepted(cx.board)


def test_bisector_fixture():
    with criterion(5, "bisector of (0,0)-(7,0) at height 0.6: P=(3.5,0.375), C=(3.5,0), |PQ|<=1"):
        cx, a, b, bisector, c = tc._bisect()
        p, q = cx.notes["bisector.P"], cx.notes["bisector.Q"]
        assert point_close(cx.board.point(p), "3.5", "0.375", EPS_CMP)
        assert point_close(cx.board.point(c), "3.5", "0", EPS_CMP)
        assert nm.cmp_unit_distance(cx.board.point(p), cx.board.point(q)) is not Cmp.GREATER
        assert accepted(cx.board)


def test_line_through_distant_points():
    with criterion(6, "line through (0,0) and (6.4,2.5)") as notes:
        cx = fresh()
        a, b = cx.board.given(0, 0), cx.board.given("6.4", "2.5")
        line = line_through(cx, a, b)
        halvings = cx.notes["line_through.halvings"]
        worst = max(tc.residual(line, cx.board.point(p)) for p in (a, b))
        notes.append(f"{halvings} halvings, worst residual {float(worst):.2e}")
        assert halvings == 3
        assert worst <= EPS_CMP
        assert accepted(cx.board)


def test_circle_line_fixtures():
    with criterion(7, "circle through (1,2) about (0,1) meets y=0 at (-1,0),(1,0); tangent 1, empty 0"):
        cx = fresh()
        axis = tc._x_axis(cx)
        hits = circle_line_intersect(cx, tc._circle(cx, (0, 1), (1, 2)), axis)
        assert len(hits) == 2
        assert point_close(cx.board.point(hits[0]), -1, 0, EPS_CMP)
        assert point_close(cx.board.point(hits[1]), 1, 0, EPS_CMP)
        assert len(circle_line_intersect(cx, tc._circle(cx, (0, 2), (2, 2)), axis)) == 1
        assert len(circle_line_intersect(cx, tc._circle(cx, (0, 3), (1, 4)), axis)) == 0
        assert accepted(cx.board)


def test_circle_circle_fixture():
    with criterion(8, "circles (0,0,r=2) and (3,0,r=3) meet at (2/3, +-4*sqrt2/3); equal powers at P") as notes:
        cx = fresh()
        g1, g2 = tc._circle(cx, (0, 0), (2, 0)), tc._circle(cx, (3, 0), (6, 0))
        hits = circle_circle_intersect(cx, g1, g2)
        h = 4 * gmpy2.sqrt(nm.mpfr(2)) / 3
        assert len(hits) == 2
        assert point_close(cx.board.point(hits[0]), Fraction(2, 3), -h, EPS_CMP)
        assert point_close(cx.board.point(hits[1]), Fraction(2, 3), h, EPS_CMP)
        p = cx.board.point(cx.notes["circle_circle.P"])
        gap = abs(nm.power_of_point(p, g1.circle2(cx.board)) - nm.power_of_point(p, g2.circle2(cx.board)))
        notes.append(f"power gap {float(gap):.2e}")
        assert gap <= EPS_CMP
        assert accepted(cx.board)


def test_mutations_are_rejected_with_their_code():
    with criterion(9, f"{MUTATIONS} single-record mutations rejected with the right code") as notes:
        wrong = []
        total = 0
        for kind, name, trace, seq, code in mutations(MUTATIONS, seed=2026):
            total += 1
            report = verify_trace(trace)
            at = [f.code for f in report.findings if f.seq == seq]
            if report.accepted or not at or at[0] != code:
                wrong.append((kind, name, seq, code, at[:1]))
        notes.append(f"{total - len(wrong)}/{total} correct")
        assert total == MUTATIONS
        assert wrong == []


def _run_once(tmp_path, tag):
    source = tmp_path / "d.euclid"
    if not source.exists():
        source.write_text(random_program(3)[1])
    trace, svg = tmp_path / f"{tag}.trace", tmp_path / f"{tag}.svg"
    base = [sys.executable, "-m", "matchstick.cli"]
    subprocess.run([*base, "compile", str(source), "-o", str(trace)], check=True, capture_output=True)
    subprocess.run([*base, "render", str(trace), "-o", str(svg)], check=True, capture_output=True)
    return trace.read_bytes(), svg.read_bytes()


def test_determinism_across_runs(tmp_path):
    with criterion(10, "two separate runs give byte-identical trace and SVG"):
        first = _run_once(tmp_path, "first")
        second = _run_once(tmp_path, "second")
        assert first[0] == second[0]
        assert first[1] == second[1]
