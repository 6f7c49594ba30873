"""Lowering, the analytic oracle and SVG rendering."""

import ast
from pathlib import Path

import pytest

import matchstick.oracle as oracle_module
from matchstick import numerics as nm
from matchstick import trace as tr
from matchstick.board import Board
from matchstick.lang import CompileError
from matchstick.lower import execute, lower
from matchstick.oracle import compare, evaluate_analytic
from matchstick.render import collect, render_svg
from matchstick.verifier import verify_trace

from conftest import EPS_CMP, point_close

CIRCLE_LINE = """\
point O = (0, 1);
point S = (1, 2);
point A = (-3, 0);
point B = (3, 0);
let g = circle(O, S);
let l = line(A, B);
let X = intersect(g, l)[0];
let Y = intersect(g, l)[1];
assert_on(X, l);
output X;
output Y;
"""


@pytest.fixture(scope="module")
def run():
    return execute(CIRCLE_LINE)


def test_lowered_trace_is_accepted_and_matches_the_oracle(run):
    assert verify_trace(run.trace).accepted
    report = compare(CIRCLE_LINE, run.trace)
    assert report.passed and [c.name for c in report.checks] == ["X", "Y"]
    assert point_close(run.board.point(run.values["X"]), -1, 0, EPS_CMP)
    assert run.counts == {"X": 2, "Y": 2}


def test_repeated_intersections_are_constructed_once(run):
    compasses = [r for r in run.trace.records if r["op"] == "compass"]
    again = execute(CIRCLE_LINE.replace("let Y = intersect(g, l)[1];\n", "").replace("output Y;\n", ""))
    assert len(compasses) == len([r for r in again.trace.records if r["op"] == "compass"])


def test_lowering_is_deterministic():
    assert lower(CIRCLE_LINE).dumps() == lower(CIRCLE_LINE).dumps()


def test_no_lowered_record_intersects_two_circles():
    source = "point A = (0, 0);\npoint B = (2, 0);\npoint C = (3, 0);\nlet g = circle(A, B);\nlet h = circle(C, A);\nlet X = intersect(g, h)[0];\noutput X;\n"
    ops = {r["op"] for r in lower(source).records}
    assert ops <= set(tr.PRIMITIVE_OPS) | {"given", "bind", "output"}
    assert not any("circle" in op for op in ops)


def test_lowering_errors_point_at_the_statement():
    source = "point A = (0, 0);\npoint B = (1, 0);\npoint C = (0, 5);\npoint D = (1, 5);\nlet l = line(A, B);\nlet m = line(C, D);\nlet X = intersect(l, m)[0];\n"
    with pytest.raises(CompileError) as info:
        execute(source)
    assert info.value.kind == "lowering" and info.value.span.line == 7


def test_assert_on_failure_is_reported():
    source = "point A = (0, 0);\npoint B = (1, 0);\npoint C = (0, 5);\nlet l = line(A, B);\nassert_on(C, l);\n"
    with pytest.raises(CompileError, match="AssertionFailed"):
        execute(source)


def test_large_circle_nearly_tangent_to_an_inner_line():
    # the circle-circle construction meets a line passing within 0.16 of a radius-24 circle,
    # so every reference point near the foot of the centre lies close to the circle
    source = (
        "point O = (15.12, -6.04);\npoint S = (11.63, 18.06);\npoint P = (-7.51, 10.73);\npoint Q = (-6.61, -13.45);\n"
        "let g = circle(O, S);\nlet h = circle(P, Q);\nlet X = intersect(g, h)[1];\noutput X;\n"
    )
    run = execute(source)
    assert verify_trace(run.trace).accepted
    assert compare(source, run.trace).passed


# -- oracle -----------------------------------------------------------------------


def test_oracle_values():
    result = evaluate_analytic(CIRCLE_LINE)
    assert point_close(result.values["X"], -1, 0, EPS_CMP)
    assert point_close(result.values["Y"], 1, 0, EPS_CMP)
    assert result.counts["X"] == 2


def test_perturbed_output_fails(run):
    exact = {"X": run.board.point(run.values["X"]), "Y": run.board.point(run.values["Y"])}
    assert compare(CIRCLE_LINE, exact).passed
    with nm.working(256):
        moved = dict(exact, Y=nm.Point2(exact["Y"].x + nm.mpfr("1e-10"), exact["Y"].y))
    report = compare(CIRCLE_LINE, moved)
    assert not report.passed
    assert [c.passed for c in report.checks] == [True, False]


def test_program_without_outputs_passes_trivially():
    source = "point A = (0, 0);\npoint B = (1, 1);\nlet l = line(A, B);\n"
    report = compare(source, lower(source))
    assert report.passed and report.checks == []


def test_count_mismatch_fails(run):
    records = [dict(r, count=1) if r.get("op") == "bind" and r.get("name") == "X" else r for r in run.trace.records]
    report = compare(CIRCLE_LINE, tr.Trace(run.trace.header, records))
    assert not report.passed and report.count_mismatches == [("X", 1, 2)]


def test_empty_intersection_is_an_oracle_error():
    source = "point O = (0, 3);\npoint S = (0, 4);\npoint A = (0, 0);\npoint B = (1, 0);\nlet g = circle(O, S);\nlet l = line(A, B);\nlet X = intersect(g, l)[0];\noutput X;\n"
    with pytest.raises(CompileError, match="NoIntersection"):
        evaluate_analytic(source)


def test_oracle_never_touches_a_board():
    tree = ast.parse(Path(oracle_module.__file__).read_text())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
            imported.update(a.name for a in node.names)
    assert not imported & {"board", "constructions", "lower", "Board", "execute"}


# -- rendering --------------------------------------------------------------------


def _three_sticks():
    b = Board()
    a = b.given(0, 0)
    s0, _ = b.lay_free(a, "0")
    s1, _ = b.lay_free(a, "90")
    b.crossing(s0, s1)
    b.lay_free(b.given(2, 2), "45")
    return b.trace


def test_render_collects_every_point_and_stick():
    points, sticks = collect(_three_sticks())
    assert len(sticks) == 3
    assert len(points) == 5
    svg = render_svg(_three_sticks())
    assert svg.count("<line ") == 3 and svg.count("<circle ") == 5


def test_render_is_deterministic(run):
    assert render_svg(run.trace) == render_svg(lower(CIRCLE_LINE))


def test_empty_trace_renders():
    svg = render_svg(Board().trace)
    assert svg.startswith("<?xml") and "<line" not in svg

