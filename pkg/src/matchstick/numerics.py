"""Adaptive-precision plane geometry on gmpy2 ``mpfr`` values.

Every predicate compares a computed quantity against the equality tolerance
``eps``.  The quantity is evaluated together with a bound on its rounding
error; when the bound straddles a decision boundary the evaluation is redone
at twice the precision, up to ``max_bits``, after which
:class:`AmbiguousPredicate` is raised.

Functions that build new values (intersection points, unit points) compute
them at the tolerance's working precision.  Values are plain ``mpfr``; a
``Point2`` doubles as a vector.
"""

from __future__ import annotations

import contextlib
import contextvars
import enum
import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, NamedTuple, Sequence

import gmpy2
from gmpy2 import mpfr

from .errors import AmbiguousPredicate, CoincidentCircles, CollinearOverlap, DegenerateDirection

__all__ = [
    "AmbiguousPredicate",
    "Circle2",
    "Cmp",
    "CoincidentCircles",
    "CollinearOverlap",
    "DegenerateDirection",
    "LineRelation",
    "Line2",
    "Point2",
    "Segment2",
    "Side",
    "Tolerance",
    "DEFAULT_TOLERANCE",
]

Scalar = mpfr

DEFAULT_PRECISION = 256
DEFAULT_MAX_PRECISION = 4096
DEFAULT_EPS = Fraction(1, 2**128)


def working(bits: int):
    """Context manager running gmpy2 arithmetic at ``bits`` of precision."""
    return gmpy2.context(gmpy2.get_context(), precision=bits)


@dataclass(frozen=True)
class Tolerance:
    bits: int = DEFAULT_PRECISION
    max_bits: int = DEFAULT_MAX_PRECISION
    eps: Fraction = DEFAULT_EPS

    def __post_init__(self):
        if not 64 <= self.bits <= self.max_bits:
            raise ValueError(f"precision must satisfy 64 <= {self.bits} <= {self.max_bits}")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        object.__setattr__(self, "eps", Fraction(self.eps))

    def with_bits(self, bits: int) -> "Tolerance":
        return Tolerance(bits=bits, max_bits=max(bits, self.max_bits), eps=self.eps)


DEFAULT_TOLERANCE = Tolerance()


class Point2(NamedTuple):
    x: mpfr
    y: mpfr

    def __repr__(self) -> str:
        return f"Point2({float(self.x):.12g}, {float(self.y):.12g})"


class Segment2(NamedTuple):
    a: Point2
    b: Point2


class Line2(NamedTuple):
    anchor: Point2
    direction: Point2  # unit norm


class Circle2(NamedTuple):
    center: Point2
    radius: mpfr


class Cmp(enum.Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Side(enum.Enum):
    RIGHT = -1
    ON = 0
    LEFT = 1


class LineRelation(enum.Enum):
    CROSSING = "crossing"
    PARALLEL = "parallel"
    COINCIDENT = "coincident"


# ---------------------------------------------------------------------------
# precision bookkeeping


class PrecisionLog:
    """Highest precision any predicate needed while the log was active."""

    def __init__(self):
        self.peak = 0
        self.escalations = 0


_log: contextvars.ContextVar[PrecisionLog | None] = contextvars.ContextVar("precision_log", default=None)


@contextlib.contextmanager
def track_precision() -> Iterator[PrecisionLog]:
    log = PrecisionLog()
    token = _log.set(log)
    try:
        yield log
    finally:
        _log.reset(token)


@functools.lru_cache(maxsize=None)
def _ulp(bits: int) -> mpfr:
    # unit roundoff bound for one operation at ``bits``
    return mpfr(2) ** (1 - bits)


@functools.lru_cache(maxsize=256)
def _eps_at(eps: Fraction, bits: int) -> mpfr:
    with working(bits):
        return mpfr(eps.numerator) / eps.denominator


def _decide(compute: Callable[[mpfr], tuple[mpfr, mpfr]], tol: Tolerance) -> int:
    """Three-way compare of a quantity against ``[-eps, eps]``.

    ``compute(u)`` evaluates the quantity in the current context and returns
    ``(value, error_bound)``; ``u`` is the unit roundoff of that context.
    Returns -1 (below), 0 (inside) or 1 (above).
    """
    bits = tol.bits
    while True:
        eps = _eps_at(tol.eps, bits)
        if gmpy2.get_context().precision == bits:
            value, err = compute(_ulp(bits))
        else:
            with working(bits):
                value, err = compute(_ulp(bits))
        if value - err > eps:
            out = 1
        elif value + err < -eps:
            out = -1
        elif abs(value) + err <= eps:
            out = 0
        else:
            out = None
        if out is not None:
            log = _log.get()
            if log is not None:
                if bits > log.peak:
                    log.peak = bits
                if bits > tol.bits:
                    log.escalations += 1
            return out
        if bits >= tol.max_bits:
            raise AmbiguousPredicate(f"undecidable at {bits} bits")
        bits = min(2 * bits, tol.max_bits)


# ---------------------------------------------------------------------------
# constructors and vector helpers (callers supply the working context)


def scalar(value, bits: int = DEFAULT_PRECISION) -> mpfr:
    """Convert an int, str, Fraction, float or mpfr to ``mpfr`` at ``bits``."""
    with working(bits):
        if isinstance(value, Fraction):
            return mpfr(value.numerator) / value.denominator
        if isinstance(value, str):
            text = value.strip()
            if "/" in text:
                return scalar(Fraction(text), bits)
            return mpfr(text)
        return mpfr(value)


def point(x, y, bits: int = DEFAULT_PRECISION) -> Point2:
    return Point2(scalar(x, bits), scalar(y, bits))


def add(p: Point2, q: Point2) -> Point2:
    return Point2(p.x + q.x, p.y + q.y)


def sub(p: Point2, q: Point2) -> Point2:
    return Point2(p.x - q.x, p.y - q.y)


def scale(p: Point2, k) -> Point2:
    return Point2(p.x * k, p.y * k)


def dot(p: Point2, q: Point2) -> mpfr:
    return p.x * q.x + p.y * q.y


def cross(p: Point2, q: Point2) -> mpfr:
    return p.x * q.y - p.y * q.x


def norm(p: Point2) -> mpfr:
    return gmpy2.sqrt(p.x * p.x + p.y * p.y)


def dist(p: Point2, q: Point2) -> mpfr:
    return norm(sub(p, q))


def rot90(p: Point2) -> Point2:
    return Point2(-p.y, p.x)


def unit(p: Point2) -> Point2:
    n = norm(p)
    return Point2(p.x / n, p.y / n)


def midpoint(p: Point2, q: Point2) -> Point2:
    return Point2((p.x + q.x) / 2, (p.y + q.y) / 2)


def line_through_points(a: Point2, b: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> Line2:
    if points_equal(a, b, tol):
        raise DegenerateDirection("line through coincident points")
    with working(tol.bits):
        return Line2(a, unit(sub(b, a)))


def line_point(line: Line2, t) -> Point2:
    return add(line.anchor, scale(line.direction, t))


def line_param(line: Line2, p: Point2) -> mpfr:
    return dot(sub(p, line.anchor), line.direction)


def signed_distance(line: Line2, p: Point2) -> mpfr:
    """Positive on the left of the line's direction."""
    return cross(line.direction, sub(p, line.anchor))


# ---------------------------------------------------------------------------
# predicates


def _coord_diff(a: mpfr, b: mpfr, tol: Tolerance) -> int:
    return _decide(lambda u: (a - b, u * (abs(a) + abs(b))), tol)


def points_equal(p: Point2, q: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    return _coord_diff(p.x, q.x, tol) == 0 and _coord_diff(p.y, q.y, tol) == 0


def lex_compare(p: Point2, q: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> int:
    return _coord_diff(p.x, q.x, tol) or _coord_diff(p.y, q.y, tol)


def sort_lex(points: Sequence[Point2], tol: Tolerance = DEFAULT_TOLERANCE) -> list[Point2]:
    return sorted(points, key=functools.cmp_to_key(lambda p, q: lex_compare(p, q, tol)))


def compare_scalar(value_fn: Callable[[], mpfr], tol: Tolerance = DEFAULT_TOLERANCE, *, scale_hint=1) -> int:
    """Classify a recomputable quantity against ``[-eps, eps]``.

    ``value_fn`` is re-evaluated under each escalated precision; the error
    bound is ``64 u (|value| + scale_hint)``.
    """
    def compute(u):
        v = value_fn()
        return v, 64 * u * (abs(v) + scale_hint)

    return _decide(compute, tol)


def cmp_unit_distance(p: Point2, q: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> Cmp:
    """Compare ``|p - q|`` with 1; Equal when within ``eps``."""

    def compute(u):
        dx = p.x - q.x
        dy = p.y - q.y
        d = gmpy2.sqrt(dx * dx + dy * dy)
        return d - 1, 8 * u * (d + 1)

    return Cmp(_decide(compute, tol))


def orientation(p: Point2, q: Point2, r: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> Side:
    """Side of ``r`` relative to the directed line ``p -> q``.

    The decided quantity is the signed distance of ``r`` from the line, so
    ``On`` means within ``eps`` of it.
    """
    if points_equal(p, q, tol):
        raise DegenerateDirection("orientation of a degenerate direction")

    def compute(u):
        ax = q.x - p.x
        ay = q.y - p.y
        bx = r.x - p.x
        by = r.y - p.y
        length = gmpy2.sqrt(ax * ax + ay * ay)
        c1 = ax * by
        c2 = ay * bx
        value = (c1 - c2) / length
        return value, 8 * u * ((abs(c1) + abs(c2)) / length + abs(value))

    return Side(_decide(compute, tol))


def side_of_line(line: Line2, p: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> Side:
    def compute(u):
        d = line.direction
        wx = p.x - line.anchor.x
        wy = p.y - line.anchor.y
        c1 = d.x * wy
        c2 = d.y * wx
        return c1 - c2, 8 * u * (abs(c1) + abs(c2) + 1)

    return Side(_decide(compute, tol))


def on_line(line: Line2, p: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> bool:
    return side_of_line(line, p, tol) is Side.ON


def line_relation(l1: Line2, l2: Line2, tol: Tolerance = DEFAULT_TOLERANCE) -> LineRelation:
    def sine(u):
        c1 = l1.direction.x * l2.direction.y
        c2 = l1.direction.y * l2.direction.x
        return c1 - c2, 8 * u * (abs(c1) + abs(c2) + 1)

    if _decide(sine, tol) != 0:
        return LineRelation.CROSSING
    if on_line(l1, l2.anchor, tol):
        return LineRelation.COINCIDENT
    return LineRelation.PARALLEL


# ---------------------------------------------------------------------------
# constructions


def unit_point_on_ray(origin: Point2, through: Point2, tol: Tolerance = DEFAULT_TOLERANCE) -> Point2:
    if points_equal(origin, through, tol):
        raise DegenerateDirection("ray through its own origin")
    with working(tol.bits):
        return add(origin, unit(sub(through, origin)))


def line_line_intersection(l1: Line2, l2: Line2, tol: Tolerance = DEFAULT_TOLERANCE) -> Point2 | None:
    """Unique crossing point, or None for parallel or coincident lines.

    Use :func:`line_relation` to tell the two empty cases apart.
    """
    if line_relation(l1, l2, tol) is not LineRelation.CROSSING:
        return None
    with working(tol.bits):
        t = cross(sub(l2.anchor, l1.anchor), l2.direction) / cross(l1.direction, l2.direction)
        return line_point(l1, t)


def _within(t_fn: Callable[[], mpfr], lo_fn: Callable[[], mpfr], hi_fn: Callable[[], mpfr], tol: Tolerance) -> bool:
    """``lo - eps <= t <= hi + eps`` decided with escalation."""
    below = compare_scalar(lambda: t_fn() - lo_fn(), tol, scale_hint=abs(lo_fn()) + 1)
    if below < 0:
        return False
    above = compare_scalar(lambda: t_fn() - hi_fn(), tol, scale_hint=abs(hi_fn()) + 1)
    return above <= 0


def _line_circle_params(anchor: Point2, direction: Point2, center: Point2, radius_fn, tol: Tolerance):
    """Parameters along a unit-direction line where it meets a circle.

    Returns the (possibly empty) list of parameters, one at tangency.
    """

    def geometry():
        d = unit(direction)
        w = sub(center, anchor)
        t0 = dot(w, d)
        h = abs(cross(d, w))
        return d, w, t0, h

    def gap(u):
        _, w, _, h = geometry()
        r = radius_fn()
        return h - r, 16 * u * (norm(w) + r + 1)

    branch = _decide(gap, tol)
    if branch > 0:
        return geometry, []
    with working(tol.bits):
        _, _, t0, h = geometry()
        if branch == 0:
            return geometry, [t0]
        r = radius_fn()
        half = gmpy2.sqrt(r * r - h * h)
        return geometry, [t0 - half, t0 + half]


def unit_circle_segment_intersection(center: Point2, seg: Segment2, tol: Tolerance = DEFAULT_TOLERANCE) -> list[Point2]:
    """Points at unit distance from ``center`` lying on the closed segment, sorted (x, y)."""
    a, b = seg
    if points_equal(a, b, tol):
        raise DegenerateDirection("segment endpoints coincide")
    one = lambda: mpfr(1)  # noqa: E731
    with working(tol.bits):
        direction = sub(b, a)
        length = norm(direction)
    geometry, params = _line_circle_params(a, direction, center, one, tol)
    out = []
    for i, t in enumerate(params):
        def t_fn(i=i):
            d, w, t0, h = geometry()
            if len(params) == 1:
                return t0
            half = gmpy2.sqrt(abs(1 - h * h))
            return t0 - half if i == 0 else t0 + half

        if _within(t_fn, lambda: mpfr(0), lambda: norm(sub(b, a)), tol):
            with working(tol.bits):
                out.append(add(a, scale(direction, t / length)))
    return sort_lex(out, tol)


def circle_line_intersection_analytic(c: Circle2, l: Line2, tol: Tolerance = DEFAULT_TOLERANCE) -> list[Point2]:
    """Quadratic solve; a tangency yields a single point.  Sorted (x, y)."""
    _, params = _line_circle_params(l.anchor, l.direction, c.center, lambda: c.radius, tol)
    with working(tol.bits):
        d = unit(l.direction)
        pts = [add(l.anchor, scale(d, t)) for t in params]
    return sort_lex(pts, tol)


def circle_circle_intersection_analytic(c1: Circle2, c2: Circle2, tol: Tolerance = DEFAULT_TOLERANCE) -> list[Point2]:
    """Two-circle solve in the frame with ``c1`` at the origin and ``c2`` on +x."""
    if points_equal(c1.center, c2.center, tol):
        same = compare_scalar(lambda: c1.radius - c2.radius, tol, scale_hint=abs(c1.radius) + abs(c2.radius))
        if same == 0:
            raise CoincidentCircles("identical circles intersect everywhere")
        return []

    def frame():
        v = sub(c2.center, c1.center)
        d = norm(v)
        a = (d * d + c1.radius * c1.radius - c2.radius * c2.radius) / (2 * d)
        return v, d, a

    def gap(u):
        _, d, a = frame()
        scale_ = d + c1.radius + c2.radius
        return abs(a) - c1.radius, 32 * u * (scale_ * scale_ / d + scale_)

    branch = _decide(gap, tol)
    if branch > 0:
        return []
    with working(tol.bits):
        v, d, a = frame()
        e = scale(v, 1 / d)
        base = add(c1.center, scale(e, a))
        if branch == 0:
            return [base]
        h = gmpy2.sqrt(c1.radius * c1.radius - a * a)
        n = rot90(e)
        pts = [add(base, scale(n, h)), sub(base, scale(n, h))]
    return sort_lex(pts, tol)


def segment_intersection(s1: Segment2, s2: Segment2, tol: Tolerance = DEFAULT_TOLERANCE) -> Point2 | None:
    """Single common point of two closed segments, or None.

    Raises :class:`CollinearOverlap` when collinear segments share more than
    a point.
    """
    l1 = line_through_points(s1.a, s1.b, tol)
    l2 = line_through_points(s2.a, s2.b, tol)
    with working(tol.bits):
        len1 = dist(s1.a, s1.b)
        len2 = dist(s2.a, s2.b)
    rel = line_relation(l1, l2, tol)
    if rel is LineRelation.PARALLEL:
        return None
    if rel is LineRelation.COINCIDENT:
        with working(tol.bits):
            ta, tb = line_param(l1, s2.a), line_param(l1, s2.b)
            lo, hi = min(ta, tb), max(ta, tb)
            overlap_lo, overlap_hi = max(lo, mpfr(0)), min(hi, len1)
        overlap = compare_scalar(lambda: overlap_hi - overlap_lo, tol, scale_hint=len1 + len2)
        if overlap > 0:
            raise CollinearOverlap("collinear segments overlap")
        if overlap < 0:
            return None
        with working(tol.bits):
            return line_point(l1, overlap_lo)
    x = line_line_intersection(l1, l2, tol)
    if not _within(lambda: line_param(l1, x), lambda: mpfr(0), lambda: len1, tol):
        return None
    if not _within(lambda: line_param(l2, x), lambda: mpfr(0), lambda: len2, tol):
        return None
    return x


def power_of_point(p: Point2, c: Circle2) -> mpfr:
    d = sub(p, c.center)
    return dot(d, d) - c.radius * c.radius
