"""Segment extension, perpendiculars at a point, and the spiral unit grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .. import numerics as nm
from ..errors import TrialExhaustion
from ..numerics import Cmp, Point2, Side
from .chain import (
    Construction,
    LineHandle,
    compass_at,
    compass_toward,
    line_from_stick,
    macro,
    require_on,
    unit_targets,
)

MAX_TRIALS = 16


@macro
def extend_line(cx: Construction, seed, toward: str = "b", length=1) -> LineHandle:
    """Grow the chain from ``seed`` until its far end is ``length`` units from the kept end.

    ``seed`` is a stick id or an existing :class:`LineHandle`; ``toward``
    names the endpoint ("a" or "b") of the seed stick that moves outward.
    """
    if length < 1:
        raise ValueError("extension length must be at least 1")
    line = seed if isinstance(seed, LineHandle) else line_from_stick(cx, seed)
    sign = 1 if toward == "b" else -1
    for _ in range(math.ceil(length) - 1):
        line.extend(sign)
    return line


def thales_trial(cx: Construction, d: LineHandle, a: int, angle: str, side: int) -> int:
    """One right-angle trial at ``a`` on ``d``; returns the far point S.

    A stick from ``a`` at ``angle`` degrees to ``d`` ends at Q; the compass
    from Q finds R on ``d``; extending R-Q by one unit gives S = 2Q - R, and
    angle S-a-R is right.  |aS| = 2 sin(angle).
    """
    board = cx.board
    signed = angle if side > 0 else f"-{angle}"
    _, q = board.lay_free(a, signed, ref=d.seed)
    origin = cx.pt(a)
    targets = unit_targets(cx, d, q)
    far = max(targets, key=lambda p: nm.dist(p, origin))
    r = compass_at(cx, d, q, far)
    leg = board.lay_both_ends(r, q)
    mid = board.choose_point(leg)
    _, beyond = board.lay_from_through(mid, q)
    _, s = board.lay_from_through(q, beyond)
    return s


def _seed_stick(board, p: int, q: int, measured: Cmp) -> int:
    if measured is Cmp.EQUAL:
        return board.lay_both_ends(p, q)
    return board.lay_from_through(p, q)[0]


def _normalise_trials(angles):
    out = []
    for i, item in enumerate(angles):
        if isinstance(item, tuple):
            angle, side = item
        else:
            angle, side = item, 1 if i % 2 == 0 else -1
        out.append((str(angle), side))
    return out


@macro
def perpendicular_at(cx: Construction, d: LineHandle, a: int, angles=None) -> LineHandle:
    """Line perpendicular to ``d`` through its point ``a``.

    Trials run until one S lands within a unit of ``a``, or until two S on
    the same side of ``d`` lie within a unit of each other (checked once
    three trials exist).  ``angles`` forces the trial angles (degrees, or
    ``(degrees, side)`` pairs); by default they come from the seeded stream.
    """
    key = (d.key, a)
    if angles is None and key in cx.perpendiculars:
        return cx.perpendiculars[key]
    require_on(d, a)
    board = cx.board
    forced = _normalise_trials(angles) if angles is not None else None
    tries = len(forced) if forced is not None else MAX_TRIALS
    found: list[int] = []
    seed = None
    for trial in range(tries):
        angle, side = forced[trial] if forced is not None else cx.next_trial()
        s = thales_trial(cx, d, a, angle, side)
        measured = board.cmp_unit(a, s)
        if measured is not Cmp.GREATER:
            seed = _seed_stick(board, a, s, measured)
            break
        found.append(s)
        if len(found) >= 3:
            seed = _same_side_pair(cx, d, found)
            if seed is not None:
                break
    if seed is None:
        raise TrialExhaustion(f"no usable right-angle trial after {tries} attempts")
    line = line_from_stick(cx, seed)
    if angles is None:
        cx.perpendiculars[key] = line
        cx.perpendiculars.setdefault((line.key, a), d)
    return line


def _same_side_pair(cx: Construction, d: LineHandle, found: list[int]) -> int | None:
    board = cx.board
    sides = {s: nm.side_of_line(d.carrier, cx.pt(s), cx.tol) for s in found}
    for i, s1 in enumerate(found):
        for s2 in found[i + 1 :]:
            if s1 == s2 or sides[s1] is Side.ON or sides[s1] is not sides[s2]:
                continue
            measured = board.cmp_unit(s1, s2)
            if measured is not Cmp.GREATER:
                return _seed_stick(board, s1, s2, measured)
    return None


def step_along(cx: Construction, line: LineHandle, start: int, direction: Point2, count: int) -> int:
    """Point ``count`` units from ``start`` along ``line`` in ``direction``."""
    if count == 0:
        return start
    k = line.lattice_index(start)
    sign = 1 if nm.dot(line.direction, direction) > 0 else -1
    if k is not None:
        return line.lattice_point(k + sign * count)
    current = start
    for _ in range(count):
        current = compass_toward(cx, line, current, direction)
    return current


@dataclass
class GridHandle:
    """Unit grid lines built so far in the frame (origin; axes[0], axes[1]).

    ``along0[k]`` is parallel to ``axes[0]`` at offset ``k`` along
    ``axes[1]``'s direction; ``along1[k]`` is parallel to ``axes[1]`` at
    offset ``k`` along ``axes[0]``'s direction.
    """

    origin: int
    axes: tuple[LineHandle, LineHandle]
    along0: dict[int, LineHandle] = field(default_factory=dict)
    along1: dict[int, LineHandle] = field(default_factory=dict)
    cell: dict[str, LineHandle] = field(default_factory=dict)
    spiral_points: list[int] = field(default_factory=list)
    instructions: int = 0

    def coordinates(self, board, p) -> tuple:
        o = board.point(self.origin)
        q = board.point(p) if isinstance(p, int) else p
        with nm.working(board.bits):
            w = nm.sub(q, o)
            return nm.dot(w, self.axes[0].direction), nm.dot(w, self.axes[1].direction)

    def nearest(self, family: str, coordinate) -> LineHandle:
        lines = self.along0 if family == "along0" else self.along1
        k = min(lines, key=lambda j: abs(coordinate - j))
        return lines[k]


def _bounds(c, tol) -> tuple[int, ...]:
    k = round(float(c))
    if nm.compare_scalar(lambda: c - k, tol, scale_hint=abs(k) + 1) == 0:
        return (k,)
    f = math.floor(float(c))
    return (f, f + 1)


def _covered(family: dict, needed: tuple[int, ...]) -> bool:
    return all(k in family for k in needed)


@macro
def coordinate_grid(cx: Construction, a: int, axes: tuple[LineHandle, LineHandle], b: int, max_lines: int = 400) -> GridHandle:
    """Spiral covering of the plane by unit-spaced perpendiculars until ``b`` is in a cell.

    Line l_i is perpendicular to l_(i-1) at A_(i-1); A_i lies on l_i at
    distance ceil(i/2) from A_(i-1), turning the same way each time so each
    [A_(i-1), A_i] crosses l_(i-3).
    """
    l0, l1 = axes
    require_on(l0, a)
    require_on(l1, a)
    start = cx.board.primitive_count
    grid = GridHandle(a, (l0, l1))
    grid.along0[0] = l0
    grid.along1[0] = l1
    c0, c1 = grid.coordinates(cx.board, b)
    need1 = _bounds(c0, cx.tol)  # lines parallel to l1, indexed along l0
    need0 = _bounds(c1, cx.tol)
    e0, e1 = l0.direction, l1.direction
    headings = {1: e1, 2: e0, 3: nm.scale(e1, -1), 0: nm.scale(e0, -1)}
    prev_line, prev_point = l1, a
    current = step_along(cx, l1, a, e1, 1)
    grid.spiral_points.append(current)
    i = 1
    while not (_covered(grid.along0, need0) and _covered(grid.along1, need1)):
        i += 1
        if i > max_lines:
            raise TrialExhaustion("spiral grid did not cover the target")
        line = perpendicular_at(cx, prev_line, current)
        o0, o1 = grid.coordinates(cx.board, current)
        if i % 2 == 0:
            grid.along0.setdefault(round(float(o1)), line)
        else:
            grid.along1.setdefault(round(float(o0)), line)
        nxt = step_along(cx, line, current, headings[i % 4], math.ceil(i / 2))
        grid.spiral_points.append(nxt)
        prev_line, prev_point, current = line, current, nxt
    for k in need0:
        grid.cell[f"along0[{k}]"] = grid.along0[k]
    for k in need1:
        grid.cell[f"along1[{k}]"] = grid.along1[k]
    grid.instructions = cx.board.primitive_count - start
    return grid
