"""Lowering of checked programs to primitive traces by running the macros."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import numerics as nm
from . import trace as tr
from .board import Board
from .config import Config
from .constructions import (
    CircleSpec,
    Construction,
    LineHandle,
    circle_circle_intersect,
    circle_line_intersect,
    cross,
    line_through,
    parallel_through,
    perpendicular_bisector,
    perpendicular_through,
    translate_segment,
)
from .errors import AssertionFailed, DegenerateConfiguration, IndexOutOfRange, MatchstickError, NoIntersection
from .lang import CIRCLE, LINE, POINT, SIGNATURES, Assert, CompileError, Let, Output, PointDecl, Program, parse


@dataclass
class Execution:
    """The board after lowering, with every bound name's constructed value."""

    board: Board
    construction: Construction
    values: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)

    @property
    def trace(self) -> tr.Trace:
        return self.board.trace

    def defining_points(self, name: str) -> list[int]:
        value, kind = self.values[name], self.kinds[name]
        if kind == POINT:
            return [value]
        if kind == CIRCLE:
            return [value.center, value.on_point]
        stick = self.board.stick(value.seed)
        return [stick.a, stick.b]


class _Lowerer:
    def __init__(self, config: Config, grid: str):
        self.board = Board(config)
        self.cx = Construction(self.board, grid=grid)
        self.run = Execution(self.board, self.cx)
        self._meets: dict[tuple, list[int]] = {}

    def segment_line(self, a: int, b: int) -> LineHandle:
        return line_through(self.cx, a, b)

    def meet(self, first: str, second: str) -> list[int]:
        run = self.run
        k1, k2 = run.kinds[first], run.kinds[second]
        v1, v2 = run.values[first], run.values[second]
        key = (first, second) if first <= second else (second, first)
        if key in self._meets:
            return self._meets[key]
        if k1 == LINE and k2 == LINE:
            hits = [cross(self.cx, v1, v2)]
        elif k1 == CIRCLE and k2 == CIRCLE:
            hits = circle_circle_intersect(self.cx, v1, v2)
        else:
            circle, line = (v1, v2) if k1 == CIRCLE else (v2, v1)
            hits = circle_line_intersect(self.cx, circle, line)
        self._meets[key] = hits
        return hits

    def evaluate(self, name: str, call) -> object:
        cx, values = self.cx, self.run.values
        args = [values[a] for a in call.args]
        if call.fn == "line":
            return self.segment_line(*args)
        if call.fn == "circle":
            if args[0] == args[1]:
                raise DegenerateConfiguration("circle centre and on-point coincide")
            return CircleSpec(*args)
        if call.fn in ("midpoint", "perp_bisector"):
            bisector, middle = perpendicular_bisector(cx, args[0], args[1], self.segment_line(*args))
            return middle if call.fn == "midpoint" else bisector
        if call.fn == "perp":
            return perpendicular_through(cx, args[0], args[1])
        if call.fn == "parallel":
            return parallel_through(cx, args[0], args[1])
        if call.fn == "translate":
            return translate_segment(cx, *args)
        hits = self.meet(*call.args)
        self.run.counts[name] = len(hits)
        if not hits:
            raise NoIntersection(f"{call.args[0]} and {call.args[1]} do not meet")
        if call.index >= len(hits):
            raise IndexOutOfRange(f"index {call.index} but the intersection has {len(hits)} point(s)")
        return hits[call.index]

    def annotate(self, name: str, op: str) -> None:
        run = self.run
        points = run.defining_points(name)
        fields = {"name": name, "kind": run.kinds[name], "points": [tr.pid(p) for p in points]}
        if op == "bind" and name in run.counts:
            fields["count"] = run.counts[name]
        if op == "output":
            fields["coords"] = [list(self.board._coords(p)) for p in points]
        self.board.annotate(op, **fields)

    def check_on(self, stmt: Assert) -> None:
        p_name, target = stmt.args
        p = self.board.point(self.run.values[p_name])
        value, kind = self.run.values[target], self.run.kinds[target]
        tol = self.board.config.comparison_tolerance
        if kind == LINE:
            ok = nm.on_line(value.carrier, p, tol)
        else:
            circle = value.circle2(self.board)
            with nm.working(self.board.bits):
                ok = nm.compare_scalar(lambda: nm.dist(p, circle.center) - circle.radius, tol) == 0
        if not ok:
            raise AssertionFailed(f"{p_name} does not lie on {target}")

    def statement(self, stmt) -> None:
        run = self.run
        if isinstance(stmt, PointDecl):
            run.values[stmt.name] = self.board.given(stmt.x, stmt.y, stmt.name)
            run.kinds[stmt.name] = POINT
            self.annotate(stmt.name, "bind")
        elif isinstance(stmt, Let):
            run.kinds[stmt.name] = SIGNATURES[stmt.expr.fn][1]
            run.values[stmt.name] = self.evaluate(stmt.name, stmt.expr)
            self.annotate(stmt.name, "bind")
        elif isinstance(stmt, Output):
            self.annotate(stmt.name, "output")
        elif isinstance(stmt, Assert):
            self.check_on(stmt)


def execute(program: Program | str, config: Config | None = None, *, grid: str = "direct") -> Execution:
    """Run ``program`` on a fresh board; errors become :class:`CompileError` with the statement's span."""
    if isinstance(program, str):
        program = parse(program)
    lowerer = _Lowerer(config or Config(), grid)
    for stmt in program.statements:
        try:
            lowerer.statement(stmt)
        except CompileError:
            raise
        except MatchstickError as exc:
            raise CompileError("lowering", f"{exc.code}: {exc}", stmt.span, cause=exc) from exc
    return lowerer.run


def lower(program: Program | str, config: Config | None = None, *, grid: str = "direct") -> tr.Trace:
    """Lower a program to its primitive trace."""
    return execute(program, config, grid=grid).trace
