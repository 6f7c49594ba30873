"""Perpendicular bisectors and lines through a point within a unit of a line."""

from __future__ import annotations

import math
from fractions import Fraction

from .. import numerics as nm
from ..errors import ConstructionError, DegenerateConfiguration, DegenerateSegment, NoIntersection
from ..numerics import Cmp, Point2
from .basic import perpendicular_at
from .chain import (
    Construction,
    LineHandle,
    compass_all,
    compass_toward,
    cross,
    line_from_stick,
    macro,
    require_on,
    seed_through,
)


LONG = 12  # segments longer than this take the one-chain bisector


def _height(cx: Construction, height) -> Fraction:
    if height is not None:
        h = Fraction(height)
        if not 0 < h < 1:
            raise ValueError("height must lie strictly between 0 and 1")
        return h
    if cx.board.config.choice_strategy == "half":
        return Fraction(3, 5)
    return Fraction(cx.board.rng.randint(200, 800), 1000)


def _unit_stick_up(cx: Construction, perp: LineHandle, a: int, normal: Point2) -> tuple[int, bool]:
    """A unit stick of ``perp`` with one end at ``a`` pointing along ``normal``.

    Returns the stick and whether ``a`` is its first endpoint.
    """
    board = cx.board
    k = perp.lattice_index(a)
    if k is not None:
        sign = 1 if nm.dot(perp.direction, normal) > 0 else -1
        other = perp.lattice_point(k + sign)
        for ident in perp.sticks:
            s = board.stick(ident)
            if {s.a, s.b} == {a, other}:
                return ident, s.a == a
    top = compass_toward(cx, perp, a, normal)
    return board.lay_both_ends(a, top), True


def _zigzag_meet(cx: Construction, a0: int, b0: int, base: LineHandle, rail: LineHandle, u: Point2, limit: int) -> int:
    """Run mirror chains from ``a0`` (forward along ``u``) and ``b0`` (backward).

    Each step is a unit stick alternating between ``base`` and ``rail``; the
    first pair of mirror-index sticks that cross meets on the symmetry axis.
    """
    board = cx.board
    back = nm.scale(u, -1)
    a_cur, b_cur = a0, b0
    for i in range(1, limit + 1):
        target = base if i % 2 else rail
        a_next = compass_toward(cx, target, a_cur, u)
        sa = board.lay_both_ends(a_cur, a_next)
        b_next = compass_toward(cx, target, b_cur, back)
        sb = board.lay_both_ends(b_cur, b_next)
        if nm.segment_intersection(board.segment(sa), board.segment(sb), cx.tol) is not None:
            return board.crossing(sa, sb)
        a_cur, b_cur = a_next, b_next
    raise ConstructionError("zig-zag chains did not meet")


@macro
def perpendicular_bisector(cx: Construction, a: int, b: int, line_ab: LineHandle, height=None) -> tuple[LineHandle, int]:
    """Perpendicular bisector of [a, b] and the midpoint where it meets ``line_ab``.

    Two zig-zag chains of unit sticks run between ``line_ab`` and a parallel
    at ``height`` above it, one from each end; mirror sticks cross on the
    bisector at P.  The same below (at ``height - 1``) gives Q, and the
    stick through P and Q seeds the bisector.  Segments longer than
    ``LONG`` skip Q and take the perpendicular to the line through P.
    """
    board = cx.board
    pa, pb = cx.pt(a), cx.pt(b)
    if a == b or nm.points_equal(pa, pb, cx.tol):
        raise DegenerateSegment("bisector of a degenerate segment")
    require_on(line_ab, a)
    require_on(line_ab, b)
    h = _height(cx, height)
    u = nm.unit(nm.sub(pb, pa))
    n = nm.rot90(u)
    perp_a = perpendicular_at(cx, line_ab, a)
    perp_b = perpendicular_at(cx, line_ab, b)
    stick, forward = _unit_stick_up(cx, perp_a, a, n)
    r0 = board.choose_point(stick, h if forward else 1 - h)
    upper = perpendicular_at(cx, perp_a, r0)
    t0 = cross(cx, upper, perp_b)
    limit = 2 * math.ceil(float(nm.dist(pa, pb)) / 0.25) + 4
    p = _zigzag_meet(cx, r0, t0, line_ab, upper, u, limit)
    q = None
    if float(nm.dist(pa, pb)) > LONG:
        # a second chain costs about five instructions per unit; P is within
        # a unit of the line, so its perpendicular there is cheaper
        bisector = perpendicular_near(cx, line_ab, p)
    else:
        s0 = compass_toward(cx, perp_a, r0, nm.scale(n, -1))
        lower = perpendicular_at(cx, perp_a, s0)
        u0 = cross(cx, lower, perp_b)
        q = _zigzag_meet(cx, s0, u0, line_ab, lower, u, limit)
        if p == q:
            raise DegenerateConfiguration("upper and lower crossings coincide")
        measured = board.cmp_unit(p, q)
        if measured is Cmp.GREATER:
            raise ConstructionError("bisector crossings are more than a unit apart")
        seed = board.lay_both_ends(p, q) if measured is Cmp.EQUAL else board.lay_from_through(p, q)[0]
        bisector = line_from_stick(cx, seed)
    c = cross(cx, bisector, line_ab)
    cx.perpendiculars.setdefault((line_ab.key, c), bisector)
    cx.perpendiculars.setdefault((bisector.key, c), line_ab)
    cx.notes["bisector.P"] = p
    cx.notes["bisector.Q"] = q
    return bisector, c


@macro
def perpendicular_near(cx: Construction, d: LineHandle, a: int) -> LineHandle:
    """Perpendicular to ``d`` through ``a``, for ``a`` less than a unit from ``d``.

    The unit circle about ``a`` cuts ``d`` in P and Q; triangle aPQ is
    isosceles, so the bisector of [P, Q] passes through ``a``.
    """
    if d.contains(a):
        return perpendicular_at(cx, d, a)
    key = (d.key, a)
    if key in cx.perpendiculars:
        return cx.perpendiculars[key]
    hits = compass_all(cx, d, a)
    if len(hits) == 2:
        line, _ = perpendicular_bisector(cx, hits[0], hits[1], d)
    elif len(hits) == 1:
        line = seed_through(cx, a, hits[0])
    else:
        raise NoIntersection("point is more than a unit from the line")
    cx.perpendiculars[key] = line
    return line


@macro
def parallel_near(cx: Construction, d: LineHandle, a: int) -> LineHandle:
    """Parallel to ``d`` through ``a``, for ``a`` within a unit of ``d``."""
    if d.contains(a):
        return d
    return perpendicular_at(cx, perpendicular_near(cx, d, a), a)


def parallel_and_perpendicular_near(cx: Construction, d: LineHandle, a: int) -> tuple[LineHandle, LineHandle]:
    perpendicular = perpendicular_near(cx, d, a)
    return parallel_near(cx, d, a), perpendicular
