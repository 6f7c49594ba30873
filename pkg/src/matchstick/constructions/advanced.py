"""Lines through distant points, circle intersections and segment translation."""

from __future__ import annotations

import math

from .. import numerics as nm
from ..errors import (
    CoincidentCircles,
    DegenerateConfiguration,
    DegenerateSegment,
    NoIntersection,
)
from ..numerics import Circle2, Cmp, Side
from .basic import coordinate_grid, perpendicular_at, step_along
from .chain import (
    CircleSpec,
    Construction,
    LineHandle,
    compass_all,
    compass_toward,
    cross,
    line_from_stick,
    macro,
    seed_through,
)
from .combined import parallel_near, perpendicular_bisector, perpendicular_near

# below this distance from a line, Prop-5 style constructions are used directly
NEAR = 0.75


def _distance(cx: Construction, line: LineHandle, p: int) -> float:
    return abs(float(nm.signed_distance(line.carrier, cx.pt(p))))


def _grid_lines_near(cx: Construction, m: LineHandle, b: int) -> tuple[LineHandle, LineHandle]:
    """A line parallel to ``m`` and one perpendicular to it, each within half a unit of ``b``."""
    if cx.grid == "spiral":
        origin = m.lattice_point(0)
        n = perpendicular_at(cx, m, origin)
        grid = coordinate_grid(cx, origin, (m, n), b)
        c0, c1 = grid.coordinates(cx.board, b)
        return grid.nearest("along0", c1), grid.nearest("along1", c0)
    k = round(float(m.param(b)))
    foot = m.lattice_point(k)
    n = perpendicular_at(cx, m, foot)
    offset = round(float(n.param(b) - n.param(foot)))
    if offset == 0:
        return m, n
    corner = step_along(cx, n, foot, n.direction, abs(offset)) if offset > 0 else step_along(
        cx, n, foot, nm.scale(n.direction, -1), -offset
    )
    return perpendicular_at(cx, n, corner), n


@macro
def parallel_through(cx: Construction, line: LineHandle, b: int) -> LineHandle:
    """Parallel to ``line`` through ``b``, at any distance."""
    if line.contains(b):
        return line
    if _distance(cx, line, b) < NEAR:
        return parallel_near(cx, line, b)
    near, _ = _grid_lines_near(cx, line, b)
    return parallel_near(cx, near, b)


@macro
def perpendicular_through(cx: Construction, line: LineHandle, b: int) -> LineHandle:
    """Perpendicular to ``line`` through ``b``, at any distance."""
    if line.contains(b):
        return perpendicular_at(cx, line, b)
    key = (line.key, b)
    if key in cx.perpendiculars:
        return cx.perpendiculars[key]
    if _distance(cx, line, b) < NEAR:
        result = perpendicular_near(cx, line, b)
    else:
        _, near = _grid_lines_near(cx, line, b)
        result = near if near.contains(b) else parallel_near(cx, near, b)
    cx.perpendiculars[key] = result
    return result


@macro
def line_through(cx: Construction, a: int, b: int) -> LineHandle:
    """The line through two points at any distance.

    Far apart, both points are projected towards a common point C on the
    perpendicular axis at ``a``; repeated midpoints towards C halve the
    segment (intercept theorem) until it fits one stick, whose parallel
    through ``b`` is the answer.
    """
    board = cx.board
    if a == b or nm.points_equal(cx.pt(a), cx.pt(b), cx.tol):
        raise DegenerateSegment("line through a single point")
    key = frozenset((a, b))
    if key in cx.lines:
        return cx.lines[key]
    measured = board.cmp_unit(a, b)
    if measured is not Cmp.GREATER:
        seed = board.lay_both_ends(a, b) if measured is Cmp.EQUAL else board.lay_from_through(a, b)[0]
        line = line_from_stick(cx, seed)
        cx.remember_line(line, a, b)
        return line
    axis_l = line_from_stick(cx, board.lay_free(a, "0")[0])
    if axis_l.contains(b):
        cx.remember_line(axis_l, a, b)
        return axis_l
    axis_p = perpendicular_at(cx, axis_l, a)
    if axis_p.contains(b):
        cx.remember_line(axis_p, a, b)
        return axis_p
    if cx.grid == "spiral":
        grid = coordinate_grid(cx, a, (axis_l, axis_p), b)
        c0, _ = grid.coordinates(board, b)
        column = grid.nearest("along1", c0)
    else:
        _, column = _grid_lines_near(cx, axis_l, b)
    d = perpendicular_at(cx, column, b) if column.contains(b) else perpendicular_near(cx, column, b)
    c = cross(cx, d, axis_p)
    cx.perpendiculars.setdefault((axis_p.key, c), d)
    cx.perpendiculars.setdefault((d.key, c), axis_p)
    ak, bk = a, b
    halvings = 0
    while True:
        measured = board.cmp_unit(ak, bk)
        if measured is not Cmp.GREATER:
            break
        ak = ak if ak == c else perpendicular_bisector(cx, ak, c, axis_p)[1]
        bk = bk if bk == c else perpendicular_bisector(cx, bk, c, d)[1]
        halvings += 1
    cx.notes["line_through.halvings"] = halvings
    cx.notes["line_through.C"] = c
    seed = board.lay_both_ends(ak, bk) if measured is Cmp.EQUAL else board.lay_from_through(ak, bk)[0]
    short = line_from_stick(cx, seed)
    line = parallel_through(cx, short, b)
    cx.remember_line(line, a, b)
    return line


def are_parallel(cx: Construction, l1: LineHandle, l2: LineHandle) -> bool:
    """Whether the parallel to ``l1`` through a point of ``l2`` coincides with ``l2``."""
    witness = cx.board.stick(l2.seed).a
    candidate = parallel_through(cx, l1, witness)
    return nm.line_relation(candidate.carrier, l2.carrier, cx.tol) is nm.LineRelation.COINCIDENT


def _reference_on(cx: Construction, circle: CircleSpec, line: LineHandle) -> int:
    """A lattice point of ``line`` usable as homothety centre, or raise."""
    o, s = cx.pt(circle.center), cx.pt(circle.on_point)
    r = nm.dist(o, s)
    k0 = round(float(line.param(o)))
    # nearest first; a large circle nearly tangent to the line can hug it for about r units
    reach = 4 + math.ceil(float(r))
    offsets = [0] + [sign * step for step in range(1, reach + 1) for sign in (1, -1)]
    for attempt, offset in enumerate(offsets):
        k = k0 + offset
        pa = nm.line_point(line.carrier, k)
        to_o, to_s = nm.sub(o, pa), nm.sub(s, pa)
        if float(nm.norm(to_o)) < 0.25 or float(nm.norm(to_s)) < 0.25:
            continue
        if abs(float(nm.dist(pa, o) - r)) < 0.25:
            continue
        at_a = abs(float(nm.cross(nm.unit(to_o), nm.unit(to_s))))
        at_o = abs(float(nm.cross(nm.unit(to_o), nm.unit(nm.sub(s, o)))))
        if at_a < 0.05 or at_o < 0.05:
            continue
        cx.notes["circle_line.reference_attempts"] = attempt + 1
        return line.lattice_point(k)
    raise DegenerateConfiguration(f"no usable reference point after {len(offsets)} choices")


def _sorted_ids(cx: Construction, ids: list[int]) -> list[int]:
    unique = list(dict.fromkeys(ids))
    order = nm.sort_lex([cx.pt(i) for i in unique], cx.tol)
    by_point = {cx.pt(i): i for i in unique}
    return [by_point[p] for p in order]


def _diameter_ends(cx: Construction, circle: CircleSpec, line: LineHandle) -> list[int]:
    """Both ends of the diameter lying on ``line`` (centre and on-point on it)."""
    o, s = circle.center, circle.on_point
    n = perpendicular_at(cx, line, o)
    k = n.lattice_index(o)
    if k is not None:
        up, down = n.lattice_point(k + 1), n.lattice_point(k - 1)
    else:
        up, down = compass_all(cx, n, o)
    chord = line_through(cx, s, up)
    mirror = parallel_through(cx, chord, down)
    return _sorted_ids(cx, [s, cross(cx, mirror, line)])


@macro
def circle_line_intersect(cx: Construction, circle: CircleSpec, line: LineHandle) -> list[int]:
    """Points where a circle (centre, on-point) meets a line; 0, 1 or 2, sorted.

    A homothety about a reference point A of the line maps the circle to a
    unit circle about O'; the compass finds its hits R' on the line, and
    parallels map each back to the original circle.
    """
    board = cx.board
    o, s = circle.center, circle.on_point
    if board.cmp_unit(o, s) is Cmp.EQUAL:
        return _sorted_ids(cx, compass_all(cx, line, o))
    o_on, s_on = line.contains(o), line.contains(s)
    if o_on and s_on:
        return _diameter_ends(cx, circle, line)
    a = _reference_on(cx, circle, line)
    line_os = line_through(cx, o, s)
    s1 = compass_toward(cx, line_os, o, nm.sub(cx.pt(s), cx.pt(o)))
    line_ao = line if o_on else line_through(cx, a, o)
    d = parallel_through(cx, line_ao, s1)
    s2 = cross(cx, d, line_through(cx, a, s))
    o1 = cross(cx, parallel_through(cx, line_os, s2), line_ao)
    cx.notes["circle_line.A"] = a
    cx.notes["circle_line.O1"] = o1
    hits = []
    for r1 in compass_all(cx, line, o1):
        if o_on:
            back = parallel_through(cx, line_through(cx, s2, r1), s)
        else:
            back = parallel_through(cx, line_from_stick(cx, board.lay_both_ends(o1, r1)), o)
        hits.append(cross(cx, back, line))
    return _sorted_ids(cx, hits)


@macro
def antipodal_on_circle(cx: Construction, circle: CircleSpec) -> int:
    hits = circle_line_intersect(cx, circle, line_through(cx, circle.center, circle.on_point))
    others = [h for h in hits if h != circle.on_point]
    if len(others) != 1:
        raise DegenerateConfiguration("diameter did not yield a single antipode")
    return others[0]


@macro
def rotate90_on_circle(cx: Construction, circle: CircleSpec) -> int:
    """The on-point turned a quarter turn counter-clockwise about the centre."""
    o, s = circle.center, circle.on_point
    normal = perpendicular_at(cx, line_through(cx, o, s), o)
    for h in circle_line_intersect(cx, circle, normal):
        if nm.orientation(cx.pt(o), cx.pt(s), cx.pt(h), cx.tol) is Side.LEFT:
            return h
    raise DegenerateConfiguration("quarter turn not found")


@macro
def translate_segment(cx: Construction, p: int, q: int, t: int) -> int:
    """U with PQUT a parallelogram, i.e. T + (Q - P)."""
    if p == q:
        raise DegenerateSegment("translation by a null segment")
    if t == p:
        return q
    line_pq = line_through(cx, p, q)
    if line_pq.contains(t):
        n = perpendicular_at(cx, line_pq, p)
        k = n.lattice_index(p)
        aside = n.lattice_point(k + 1) if k is not None else compass_all(cx, n, p)[0]
        moved = translate_segment(cx, p, q, aside)
        return translate_segment(cx, aside, moved, t)
    g = parallel_through(cx, line_pq, t)
    h = parallel_through(cx, line_through(cx, p, t), q)
    return cross(cx, g, h)


def _radius(cx: Construction, circle: CircleSpec):
    return nm.dist(cx.pt(circle.center), cx.pt(circle.on_point))


@macro
def circle_circle_intersect(cx: Construction, c1: CircleSpec, c2: CircleSpec) -> list[int]:
    """Points common to two circles, found on their radical axis.

    A third circle about O3 with the first circle's radius, through two
    points X, Y of the second, supplies radical axes (XY) and the bisector
    of [O1, O3]; their crossing P lies on the wanted axis, which is the
    perpendicular to (O1 O2) through P.
    """
    tol = cx.tol
    p1, p2 = cx.pt(c1.center), cx.pt(c2.center)
    r1, r2 = _radius(cx, c1), _radius(cx, c2)
    if c1.center == c2.center or nm.points_equal(p1, p2, tol):
        if nm.compare_scalar(lambda: r1 - r2, tol, scale_hint=r1 + r2) == 0:
            raise CoincidentCircles("identical circles")
        return []
    if r1 < r2:
        c1, c2, p1, p2, r1, r2 = c2, c1, p2, p1, r2, r1
    x = c2.on_point
    centres = line_through(cx, c1.center, c2.center)
    radial = nm.unit(nm.sub(cx.pt(x), p2))
    slant = abs(float(nm.dot(radial, nm.unit(nm.sub(p1, p2)))))
    if slant >= 0.2:
        y = antipodal_on_circle(cx, c2)
        chord = line_through(cx, c2.center, x)
    else:
        y = rotate90_on_circle(cx, c2)
        chord = line_through(cx, x, y)
    bisector, _ = perpendicular_bisector(cx, x, y, chord)
    x1 = translate_segment(cx, c1.center, c1.on_point, x)
    found = circle_line_intersect(cx, CircleSpec(x, x1), bisector)
    if not found:
        raise DegenerateConfiguration("third circle misses the bisector")
    o3 = max(found, key=lambda i: nm.dist(cx.pt(i), p1))
    if o3 == c1.center:
        raise DegenerateConfiguration("third circle centre coincides with the first")
    a2, _ = perpendicular_bisector(cx, c1.center, o3, line_through(cx, c1.center, o3))
    power_point = cross(cx, chord, a2)
    cx.notes["circle_circle.P"] = power_point
    cx.notes["circle_circle.O3"] = o3
    axis = perpendicular_through(cx, centres, power_point)
    return circle_line_intersect(cx, c1, axis)


def circle2(cx: Construction, circle: CircleSpec) -> Circle2:
    return circle.circle2(cx.board)


__all__ = [
    "antipodal_on_circle",
    "are_parallel",
    "circle_circle_intersect",
    "circle_line_intersect",
    "line_through",
    "parallel_through",
    "perpendicular_through",
    "rotate90_on_circle",
    "translate_segment",
]
