"""Lines as chains of overlapping unit sticks, and the shared macro context."""

from __future__ import annotations

import functools
import itertools
import random
from dataclasses import dataclass, field

from gmpy2 import mpfr

from .. import numerics as nm
from ..board import Board
from ..errors import NoIntersection, NotOnLine
from ..numerics import Circle2, Line2, Point2, working

_serial = itertools.count()


class Construction:
    """A board plus the caches and choice streams the macros share.

    ``grid`` selects how distant points are brought within a unit of a grid
    line: ``"direct"`` builds only the lines bounding the target cell,
    ``"spiral"`` runs the full spiral covering.
    """

    def __init__(self, board: Board, *, grid: str = "direct"):
        if grid not in ("direct", "spiral"):
            raise ValueError("grid must be 'direct' or 'spiral'")
        self.board = board
        self.grid = grid
        self.tol = board.tol
        self.bits = board.bits
        self.seed = board.config.seed
        self._angles = random.Random(self.seed * 7919 + 17)
        self.trials = 0
        self.perpendiculars: dict[tuple[int, int], LineHandle] = {}
        self.lines: dict[frozenset, LineHandle] = {}
        self.notes: dict[str, object] = {}

    def next_trial(self) -> tuple[str, int]:
        """Next angle in degrees from (10, 29] and the side of the line to use."""
        angle = self._angles.randint(10001, 29000)
        side = 1 if (self.seed + self.trials) % 2 == 0 else -1
        self.trials += 1
        return f"{angle // 1000}.{angle % 1000:03d}", side

    def pt(self, ident: int) -> Point2:
        return self.board.point(ident)

    def remember_line(self, line: "LineHandle", *points: int) -> None:
        for a, b in itertools.combinations(sorted(set(points)), 2):
            self.lines.setdefault(frozenset((a, b)), line)


def macro(fn):
    """Run a macro with the board's working precision active."""

    @functools.wraps(fn)
    def wrapper(cx, *args, **kwargs):
        with working(cx.bits):
            return fn(cx, *args, **kwargs)

    return wrapper


@dataclass(frozen=True)
class CircleSpec:
    center: int
    on_point: int

    def __post_init__(self):
        if self.center == self.on_point:
            raise ValueError("circle centre and on-point coincide")

    def circle2(self, board: Board) -> Circle2:
        c = board.point(self.center)
        with working(board.bits):
            return Circle2(c, nm.dist(c, board.point(self.on_point)))


class LineHandle:
    """An unbounded line held as a chain of collinear unit sticks.

    The chain's far ends sit at integer offsets from the seed stick's first
    endpoint; ``lattice[k]`` is the point at offset ``k`` along the carrier.
    """

    def __init__(self, cx: Construction, seed: int):
        self.cx = cx
        self.board = cx.board
        self.key = next(_serial)
        s = self.board.stick(seed)
        a, b = self.board.point(s.a), self.board.point(s.b)
        with working(cx.bits):
            self.carrier = Line2(a, nm.unit(nm.sub(b, a)))
        self.seed = seed
        self.sticks: list[int] = [seed]
        self.spans: dict[int, tuple[mpfr, mpfr]] = {seed: (mpfr(0), mpfr(1))}
        self.lattice: dict[int, int] = {0: s.a, 1: s.b}
        self._hi = (seed, s.a, s.b, 1)
        self._lo = (seed, s.b, s.a, 0)

    def __repr__(self) -> str:
        return f"LineHandle(#{self.key}, sticks={len(self.sticks)}, span=[{self._lo[3]}, {self._hi[3]}])"

    @property
    def direction(self) -> Point2:
        return self.carrier.direction

    @property
    def extent(self) -> tuple[int, int]:
        return self._lo[3], self._hi[3]

    def param(self, p) -> mpfr:
        if isinstance(p, int):
            p = self.board.point(p)
        with working(self.cx.bits):
            return nm.line_param(self.carrier, p)

    def contains(self, p) -> bool:
        if isinstance(p, int):
            p = self.board.point(p)
        return nm.on_line(self.carrier, p, self.cx.tol)

    def _add_stick(self, ident: int) -> None:
        s = self.board.stick(ident)
        t1, t2 = self.param(s.a), self.param(s.b)
        self.sticks.append(ident)
        self.spans[ident] = (min(t1, t2), max(t1, t2))

    def extend(self, sign: int) -> int:
        """Gain one unit at one end (segment extension step); returns the new end."""
        board = self.board
        stick, inner, outer, k = self._hi if sign > 0 else self._lo
        chosen = board.choose_point(stick)
        s1, q = board.lay_from_through(chosen, outer)
        s2, far = board.lay_from_through(outer, q)
        self._add_stick(s1)
        self._add_stick(s2)
        k += sign
        self.lattice[k] = far
        if sign > 0:
            self._hi = (s2, outer, far, k)
        else:
            self._lo = (s2, outer, far, k)
        return far

    def ensure(self, param, margin=0.5) -> None:
        while self._hi[3] < param + margin:
            self.extend(1)
        while self._lo[3] > param - margin:
            self.extend(-1)

    def lattice_point(self, k: int) -> int:
        while self._hi[3] < k:
            self.extend(1)
        while self._lo[3] > k:
            self.extend(-1)
        return self.lattice[k]

    def lattice_index(self, ident: int) -> int | None:
        for k, p in self.lattice.items():
            if p == ident:
                return k
        return None

    def stick_at(self, param) -> int:
        """Stick of the chain holding ``param`` farthest from its ends."""
        best, score = None, None
        for ident in self.sticks:
            lo, hi = self.spans[ident]
            room = min(param - lo, hi - param)
            if score is None or room > score:
                best, score = ident, room
        return best


def line_from_stick(cx: Construction, stick: int) -> LineHandle:
    line = LineHandle(cx, stick)
    s = cx.board.stick(stick)
    cx.remember_line(line, s.a, s.b)
    return line


def compass_at(cx: Construction, line: LineHandle, center: int, target: Point2) -> int:
    """Compass from ``center`` onto the stick of ``line`` around ``target``."""
    board = cx.board
    t = line.param(target)
    line.ensure(t)
    stick = line.stick_at(t)
    candidates = board.compass_candidates(center, stick)
    if not candidates:
        raise NoIntersection("compass misses the chosen stick")
    with working(cx.bits):
        pick = min(range(len(candidates)), key=lambda i: nm.dist(candidates[i], target))
    return board.compass(center, stick, pick)


def unit_targets(cx: Construction, line: LineHandle, center: int) -> list[Point2]:
    """Where the unit circle about ``center`` meets the line, ordered along it."""
    c = cx.pt(center)
    with working(cx.bits):
        hits = nm.circle_line_intersection_analytic(Circle2(c, mpfr(1)), line.carrier, cx.tol)
        return sorted(hits, key=line.param)


def compass_all(cx: Construction, line: LineHandle, center: int) -> list[int]:
    return [compass_at(cx, line, center, p) for p in unit_targets(cx, line, center)]


def compass_toward(cx: Construction, line: LineHandle, center: int, direction: Point2) -> int:
    """The unit-distance point on ``line`` lying farthest along ``direction``."""
    targets = unit_targets(cx, line, center)
    if not targets:
        raise NoIntersection("line is beyond unit reach")
    with working(cx.bits):
        target = max(targets, key=lambda p: nm.dot(p, direction))
    return compass_at(cx, line, center, target)


def cross(cx: Construction, l1: LineHandle, l2: LineHandle) -> int:
    """Extend both chains until sticks cross and mark the crossing."""
    x = nm.line_line_intersection(l1.carrier, l2.carrier, cx.tol)
    if x is None:
        raise NoIntersection("lines are parallel or coincident")
    t1, t2 = l1.param(x), l2.param(x)
    l1.ensure(t1)
    l2.ensure(t2)
    return cx.board.crossing(l1.stick_at(t1), l2.stick_at(t2))


def require_on(line: LineHandle, ident: int) -> None:
    if not line.contains(ident):
        raise NotOnLine(f"point P{ident} is not on the line")


def seed_through(cx: Construction, p: int, q: int) -> LineHandle:
    """Chain whose seed stick starts at ``p`` and covers ``q`` (|pq| <= 1)."""
    board = cx.board
    c = board.cmp_unit(p, q)
    if c is nm.Cmp.EQUAL:
        line = line_from_stick(cx, board.lay_both_ends(p, q))
    elif c is nm.Cmp.LESS:
        line = line_from_stick(cx, board.lay_from_through(p, q)[0])
    else:
        raise ValueError("points farther apart than one unit")
    cx.remember_line(line, p, q)
    return line
