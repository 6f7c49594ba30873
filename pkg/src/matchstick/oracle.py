"""Classical compass-and-ruler semantics for programs, and the agreement check.

The analytic evaluator works directly on coordinates with the ``numerics``
formulas; it never looks at a board.  :func:`compare` then holds a lowered
trace's outputs against those values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpfr

from . import numerics as nm
from . import trace as tr
from .config import Config
from .errors import IndexOutOfRange, MatchstickError, MissingOutput, NoIntersection
from .lang import CIRCLE, LINE, POINT, SIGNATURES, CompileError, Let, PointDecl, Program, parse
from .numerics import Circle2, Line2, Point2, working


@dataclass
class AnalyticResult:
    values: dict = field(default_factory=dict)
    kinds: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)


def _intersect(kinds, a, b, tol):
    if kinds[0] == LINE and kinds[1] == LINE:
        hit = nm.line_line_intersection(a, b, tol)
        return [] if hit is None else [hit]
    if kinds[0] == CIRCLE and kinds[1] == CIRCLE:
        return nm.circle_circle_intersection_analytic(a, b, tol)
    circle, line = (a, b) if kinds[0] == CIRCLE else (b, a)
    return nm.circle_line_intersection_analytic(circle, line, tol)


def _evaluate(call, args, kinds, tol):
    fn = call.fn
    if fn == "line":
        return nm.line_through_points(args[0], args[1], tol)
    if fn == "circle":
        return Circle2(args[0], nm.dist(args[0], args[1]))
    if fn == "midpoint":
        return nm.midpoint(args[0], args[1])
    if fn == "perp_bisector":
        return Line2(nm.midpoint(args[0], args[1]), nm.rot90(nm.unit(nm.sub(args[1], args[0]))))
    if fn == "perp":
        return Line2(args[1], nm.rot90(args[0].direction))
    if fn == "parallel":
        return Line2(args[1], args[0].direction)
    if fn == "translate":
        return nm.add(args[2], nm.sub(args[1], args[0]))
    raise ValueError(fn)


def evaluate_analytic(program: Program | str, config: Config | None = None) -> AnalyticResult:
    """Evaluate every binding with closed-form geometry."""
    if isinstance(program, str):
        program = parse(program)
    config = config or Config()
    tol = config.tolerance
    out = AnalyticResult()
    with working(config.precision_bits):
        for stmt in program.statements:
            try:
                if isinstance(stmt, PointDecl):
                    out.values[stmt.name] = nm.point(stmt.x, stmt.y, config.precision_bits)
                    out.kinds[stmt.name] = POINT
                elif isinstance(stmt, Let):
                    call = stmt.expr
                    args = [out.values[a] for a in call.args]
                    kinds = [out.kinds[a] for a in call.args]
                    if call.fn == "intersect":
                        hits = _intersect(kinds, args[0], args[1], tol)
                        out.counts[stmt.name] = len(hits)
                        if not hits:
                            raise NoIntersection(f"{call.args[0]} and {call.args[1]} do not meet")
                        if call.index >= len(hits):
                            raise IndexOutOfRange(f"index {call.index} but the intersection has {len(hits)} point(s)")
                        value = hits[call.index]
                    else:
                        value = _evaluate(call, args, kinds, tol)
                    out.values[stmt.name] = value
                    out.kinds[stmt.name] = SIGNATURES[call.fn][1]
            except MatchstickError as exc:
                raise CompileError("oracle", f"{exc.code}: {exc}", stmt.span, cause=exc) from exc
    return out


@dataclass
class OutputCheck:
    name: str
    kind: str
    constructive: list
    analytic: object
    deltas: list
    passed: bool

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "constructive": [[format(p.x, ".25g"), format(p.y, ".25g")] for p in self.constructive],
            "max_delta": format(float(max(self.deltas)), ".6e") if self.deltas else "0",
            "pass": self.passed,
        }


@dataclass
class OracleReport:
    checks: list = field(default_factory=list)
    count_mismatches: list = field(default_factory=list)
    epsilon: Fraction = Fraction(1, 2**64)

    @property
    def passed(self) -> bool:
        return not self.count_mismatches and all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "pass": self.passed,
            "epsilon_cmp": str(self.epsilon),
            "outputs": [c.as_dict() for c in self.checks],
            "count_mismatches": [
                {"name": n, "constructive": a, "analytic": b} for n, a, b in self.count_mismatches
            ],
        }

    def text(self) -> str:
        lines = [f"oracle: {'pass' if self.passed else 'FAIL'} ({len(self.checks)} output(s) compared)"]
        for c in self.checks:
            worst = format(float(max(c.deltas)), ".3e") if c.deltas else "0"
            lines.append(f"  {c.name} ({c.kind}): max delta {worst} {'ok' if c.passed else 'FAIL'}")
        for name, got, want in self.count_mismatches:
            lines.append(f"  {name}: intersection count {got}, analytic {want}")
        return "\n".join(lines)


def _constructive_outputs(source) -> tuple[dict, dict]:
    """name -> list of Point2, and name -> recorded intersection count."""
    if isinstance(source, tr.Trace):
        points = {}
        for name, rec in source.outputs().items():
            points[name] = [nm.point(x, y) for x, y in rec.get("coords", [])]
        counts = {n: r["count"] for n, r in source.bindings().items() if "count" in r}
        return points, counts
    return {k: v if isinstance(v, list) else [v] for k, v in source.items()}, {}


def compare(program: Program | str, constructive, config: Config | None = None) -> OracleReport:
    """Check constructed outputs against the analytic evaluation.

    ``constructive`` is a lowered :class:`Trace` (outputs and intersection
    counts are read from its metadata) or a mapping from output name to a
    point or list of points.
    """
    if isinstance(program, str):
        program = parse(program)
    config = config or Config()
    analytic = evaluate_analytic(program, config)
    points, counts = _constructive_outputs(constructive)
    eps = config.epsilon_cmp
    report = OracleReport(epsilon=eps)
    with working(config.precision_bits):
        limit = mpfr(eps.numerator) / eps.denominator
        for name in program.outputs:
            if name not in points:
                raise MissingOutput(f"output {name!r} missing from the constructive side")
            got = points[name]
            want = analytic.values[name]
            kind = analytic.kinds[name]
            deltas = _deltas(kind, got, want)
            report.checks.append(OutputCheck(name, kind, got, want, deltas, all(d <= limit for d in deltas)))
    for name, count in counts.items():
        if analytic.counts.get(name) != count:
            report.count_mismatches.append((name, count, analytic.counts.get(name)))
    return report


def _deltas(kind: str, got: list, want) -> list:
    if kind == POINT:
        if len(got) != 1:
            return [mpfr("inf")]
        p = got[0]
        return [abs(p.x - want.x), abs(p.y - want.y)]
    if kind == LINE:
        if len(got) != 2 or nm.points_equal(got[0], got[1]):
            return [mpfr("inf")]
        return [abs(nm.signed_distance(want, p)) for p in got]
    if len(got) != 2:
        return [mpfr("inf")]
    centre, on = got
    return [abs(centre.x - want.center.x), abs(centre.y - want.center.y), abs(nm.dist(centre, on) - want.radius)]


def analytic_points(value) -> list[Point2]:
    """Representative points of an analytic value, for display."""
    if isinstance(value, Point2):
        return [value]
    if isinstance(value, Line2):
        return [value.anchor, nm.add(value.anchor, value.direction)]
    return [value.center]
