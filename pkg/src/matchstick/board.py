"""Construction state and the primitive instruction set.

A :class:`Board` holds every point and stick laid so far and appends one
trace record per executed instruction.  The instructions are:

``lay_free``          a stick with one extremity at a point, in a chosen direction
``lay_both_ends``     a stick between two points at unit distance
``lay_from_through``  a stick from a point through a second point at most one unit away
``lay_through_both``  a stick passing through two points closer than one unit
``choose_point``      an arbitrary (seeded) point on a stick
``compass``           a point at unit distance from a centre, on one stick
``crossing``          the common point of two crossing sticks
``cmp_unit``          measure a distance against the unit

``given`` records declare input points; ``bind`` and ``output`` records carry
program metadata and create nothing.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from . import numerics as nm
from . import trace as tr
from .config import Config, format_epsilon
from .errors import (
    DegenerateDirection,
    NoCrossing,
    NoIntersection,
    OffsetOutOfRange,
    PickOutOfRange,
    UnitLengthViolation,
    UnknownId,
)
from .numerics import Cmp, Point2, Segment2, working


@dataclass(frozen=True)
class Stick:
    id: int
    a: int  # point id
    b: int  # point id
    seq: int  # record that laid it


def format_scalar(value: mpfr, digits: int) -> str:
    text = format(value, f".{digits}g")
    return "0" if text in ("-0", "-0.0", "0.0") else text


def canonical_number(value) -> str:
    """Exact textual form for offsets and angles stored in the trace."""
    if isinstance(value, str):
        return value.strip()
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else str(value)
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def to_fraction(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


class PointIndex:
    """Spatial hash answering "is there a point within eps of p?"."""

    CELL = 2.0**-20

    def __init__(self, tol: nm.Tolerance):
        self.tol = tol
        self._cells: dict[tuple[int, int], list[tuple[int, Point2]]] = {}

    def _key(self, p: Point2) -> tuple[int, int]:
        return math.floor(float(p.x) / self.CELL), math.floor(float(p.y) / self.CELL)

    def find(self, p: Point2) -> int | None:
        kx, ky = self._key(p)
        best = None
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for ident, q in self._cells.get((kx + dx, ky + dy), ()):
                    if (best is None or ident < best) and nm.points_equal(p, q, self.tol):
                        best = ident
        return best

    def add(self, ident: int, p: Point2) -> None:
        self._cells.setdefault(self._key(p), []).append((ident, p))


class Board:
    def __init__(self, config: Config | None = None):
        self.config = config or Config()
        self.tol = self.config.tolerance
        self.bits = self.config.precision_bits
        self.digits = self.config.output_digits
        self.points: dict[int, Point2] = {}
        self.sticks: dict[int, Stick] = {}
        self.names: dict[int, str] = {}
        self.records: list[dict] = []
        self.rng = random.Random(self.config.seed)
        self._index = PointIndex(self.tol)

    # -- bookkeeping -----------------------------------------------------

    def header(self) -> dict:
        c = self.config
        return {
            "version": tr.VERSION,
            "precision_bits": c.precision_bits,
            "max_precision_bits": c.max_precision_bits,
            "epsilon_eq": format_epsilon(c.epsilon_eq),
            "seed": c.seed,
            "choice_strategy": c.choice_strategy,
            "output_digits": c.output_digits,
        }

    @property
    def trace(self) -> tr.Trace:
        return tr.Trace(self.header(), list(self.records))

    def _emit(self, op: str, **fields) -> dict:
        rec = {"seq": len(self.records), "op": op, **fields}
        self.records.append(rec)
        return rec

    def _fmt(self, v: mpfr) -> str:
        return format_scalar(v, self.digits)

    def _coords(self, ident: int) -> tuple[str, str]:
        p = self.points[ident]
        return self._fmt(p.x), self._fmt(p.y)

    def _register(self, p: Point2) -> int:
        found = self._index.find(p)
        if found is not None:
            return found
        ident = len(self.points)
        self.points[ident] = p
        self._index.add(ident, p)
        return ident

    def _new_stick(self, a: int, b: int) -> int:
        ident = len(self.sticks)
        self.sticks[ident] = Stick(ident, a, b, len(self.records))
        return ident

    def point(self, ident: int) -> Point2:
        try:
            return self.points[ident]
        except KeyError:
            raise UnknownId(f"unknown point {tr.pid(ident)}") from None

    def stick(self, ident: int) -> Stick:
        try:
            return self.sticks[ident]
        except KeyError:
            raise UnknownId(f"unknown stick {tr.sid(ident)}") from None

    def segment(self, ident: int) -> Segment2:
        s = self.stick(ident)
        return Segment2(self.points[s.a], self.points[s.b])

    def choose_t(self) -> Fraction:
        """Offset for an arbitrary interior point under the choice strategy."""
        if self.config.choice_strategy == "half":
            return Fraction(1, 2)
        return Fraction(self.rng.randint(125, 875), 1000)

    @property
    def primitive_count(self) -> int:
        return sum(1 for r in self.records if r["op"] in tr.PRIMITIVE_OPS)

    # -- inputs and metadata ----------------------------------------------

    def given(self, x, y, name: str | None = None) -> int:
        xs = x.strip() if isinstance(x, str) else format_scalar(nm.scalar(x, self.bits), self.digits)
        ys = y.strip() if isinstance(y, str) else format_scalar(nm.scalar(y, self.bits), self.digits)
        ident = self._register(nm.point(xs, ys, self.bits))
        if name is not None:
            self.names.setdefault(ident, name)
        fields = {"point": tr.pid(ident), "x": xs, "y": ys}
        if name is not None:
            fields["name"] = name
        self._emit("given", **fields)
        return ident

    def annotate(self, op: str, **fields) -> dict:
        if op not in ("bind", "output"):
            raise ValueError(f"not a metadata op: {op}")
        return self._emit(op, **fields)

    # -- Postulate i -------------------------------------------------------

    def lay_free(self, at: int, angle, ref: int | None = None) -> tuple[int, int]:
        """Lay a stick from ``at`` in the direction ``angle`` degrees.

        The angle is measured from the x-axis, or from the direction a->b of
        stick ``ref`` when given.
        """
        origin = self.point(at)
        base = self.segment(ref) if ref is not None else None
        text = canonical_number(angle)
        with working(self.bits):
            theta = nm.scalar(text, self.bits) * gmpy2.const_pi() / 180
            c, s = gmpy2.cos(theta), gmpy2.sin(theta)
            if base is None:
                direction = Point2(c, s)
            else:
                u = nm.unit(nm.sub(base.b, base.a))
                direction = Point2(c * u.x - s * u.y, s * u.x + c * u.y)
            far = self._register(nm.add(origin, direction))
        stick = self._new_stick(at, far)
        x, y = self._coords(far)
        self._emit(
            "lay_free",
            at=tr.pid(at),
            ref=None if ref is None else tr.sid(ref),
            angle=text,
            stick=tr.sid(stick),
            point=tr.pid(far),
            x=x,
            y=y,
        )
        return stick, far

    def lay_both_ends(self, p: int, q: int) -> int:
        c = nm.cmp_unit_distance(self.point(p), self.point(q), self.tol)
        if c is not Cmp.EQUAL:
            raise UnitLengthViolation(f"{tr.pid(p)}-{tr.pid(q)} is not at unit distance ({c.name.lower()})")
        stick = self._new_stick(p, q)
        self._emit("lay_both_ends", p=tr.pid(p), q=tr.pid(q), stick=tr.sid(stick))
        return stick

    def lay_from_through(self, p: int, q: int) -> tuple[int, int]:
        """Stick with extremity ``p`` passing through ``q``; returns (stick, far end)."""
        a, b = self.point(p), self.point(q)
        if nm.points_equal(a, b, self.tol):
            raise DegenerateDirection(f"{tr.pid(p)} and {tr.pid(q)} coincide")
        if nm.cmp_unit_distance(a, b, self.tol) is Cmp.GREATER:
            raise UnitLengthViolation(f"{tr.pid(p)}-{tr.pid(q)} is longer than the unit")
        far = self._register(nm.unit_point_on_ray(a, b, self.tol))
        stick = self._new_stick(p, far)
        x, y = self._coords(far)
        self._emit("lay_from_through", p=tr.pid(p), q=tr.pid(q), stick=tr.sid(stick), point=tr.pid(far), x=x, y=y)
        return stick, far

    def lay_through_both(self, p: int, q: int, t) -> tuple[int, int, int]:
        """Stick through two close points, ``t`` units of it behind ``p``."""
        a, b = self.point(p), self.point(q)
        if nm.points_equal(a, b, self.tol):
            raise DegenerateDirection(f"{tr.pid(p)} and {tr.pid(q)} coincide")
        if nm.cmp_unit_distance(a, b, self.tol) is not Cmp.LESS:
            raise UnitLengthViolation(f"{tr.pid(p)}-{tr.pid(q)} leaves no interior room")
        frac = to_fraction(t)
        with working(self.bits):
            tt = nm.scalar(frac, self.bits)
            room = lambda: 1 - nm.dist(a, b)  # noqa: E731
        if frac <= 0 or nm.compare_scalar(lambda: tt - room(), self.tol) >= 0:
            raise OffsetOutOfRange(f"offset {frac} outside (0, 1 - |pq|)")
        with working(self.bits):
            u = nm.unit(nm.sub(b, a))
            end_a = self._register(nm.sub(a, nm.scale(u, tt)))
            end_b = self._register(nm.add(a, nm.scale(u, 1 - tt)))
        stick = self._new_stick(end_a, end_b)
        ax, ay = self._coords(end_a)
        bx, by = self._coords(end_b)
        self._emit(
            "lay_through_both",
            p=tr.pid(p),
            q=tr.pid(q),
            t=canonical_number(frac),
            stick=tr.sid(stick),
            a=tr.pid(end_a),
            ax=ax,
            ay=ay,
            b=tr.pid(end_b),
            bx=bx,
            by=by,
        )
        return stick, end_a, end_b

    def cmp_unit(self, p: int, q: int) -> Cmp:
        c = nm.cmp_unit_distance(self.point(p), self.point(q), self.tol)
        self._emit("cmp_unit", p=tr.pid(p), q=tr.pid(q), result=c.name.lower())
        return c

    # -- Postulate ii -------------------------------------------------------

    def choose_point(self, stick: int, t=None, interior_only: bool = True) -> int:
        seg = self.segment(stick)
        frac = self.choose_t() if t is None else to_fraction(t)
        if interior_only and not 0 < frac < 1:
            raise OffsetOutOfRange(f"offset {frac} is not interior")
        if not 0 <= frac <= 1:
            raise OffsetOutOfRange(f"offset {frac} outside [0, 1]")
        with working(self.bits):
            tt = nm.scalar(frac, self.bits)
            ident = self._register(nm.add(seg.a, nm.scale(nm.sub(seg.b, seg.a), tt)))
        x, y = self._coords(ident)
        self._emit(
            "choose_point",
            stick=tr.sid(stick),
            t=canonical_number(frac),
            interior_only=interior_only,
            point=tr.pid(ident),
            x=x,
            y=y,
        )
        return ident

    # -- Postulate iii ------------------------------------------------------

    def compass_candidates(self, center: int, stick: int) -> list[Point2]:
        return nm.unit_circle_segment_intersection(self.point(center), self.segment(stick), self.tol)

    def compass(self, center: int, stick: int, pick: int = 0) -> int:
        """Unit-distance point from ``center`` on the single stick ``stick``."""
        candidates = self.compass_candidates(center, stick)
        if not candidates:
            raise NoIntersection(f"no point of {tr.sid(stick)} at unit distance from {tr.pid(center)}")
        if not 0 <= pick < len(candidates):
            raise PickOutOfRange(f"pick {pick} of {len(candidates)} candidates")
        ident = self._register(candidates[pick])
        x, y = self._coords(ident)
        self._emit(
            "compass",
            center=tr.pid(center),
            stick=tr.sid(stick),
            pick=pick,
            candidates=len(candidates),
            point=tr.pid(ident),
            x=x,
            y=y,
        )
        return ident

    # -- observation ----------------------------------------------------------

    def crossing(self, s1: int, s2: int) -> int:
        hit = nm.segment_intersection(self.segment(s1), self.segment(s2), self.tol)
        if hit is None:
            raise NoCrossing(f"{tr.sid(s1)} and {tr.sid(s2)} do not cross")
        ident = self._register(hit)
        x, y = self._coords(ident)
        self._emit("crossing", s1=tr.sid(s1), s2=tr.sid(s2), point=tr.pid(ident), x=x, y=y)
        return ident


def replay(trace: tr.Trace, config: Config | None = None) -> Board:
    """Re-execute a trace on a fresh board (executor-side replay)."""
    board = Board(config or Config())
    P = lambda s: tr.parse_id(s, "P")  # noqa: E731
    S = lambda s: tr.parse_id(s, "S")  # noqa: E731
    for rec in trace.records:
        op = rec["op"]
        if op == "given":
            board.given(rec["x"], rec["y"], rec.get("name"))
        elif op == "lay_free":
            board.lay_free(P(rec["at"]), rec["angle"], None if rec["ref"] is None else S(rec["ref"]))
        elif op == "lay_both_ends":
            board.lay_both_ends(P(rec["p"]), P(rec["q"]))
        elif op == "lay_from_through":
            board.lay_from_through(P(rec["p"]), P(rec["q"]))
        elif op == "lay_through_both":
            board.lay_through_both(P(rec["p"]), P(rec["q"]), rec["t"])
        elif op == "choose_point":
            board.choose_point(S(rec["stick"]), rec["t"], rec["interior_only"])
        elif op == "compass":
            board.compass(P(rec["center"]), S(rec["stick"]), rec["pick"])
        elif op == "crossing":
            board.crossing(S(rec["s1"]), S(rec["s2"]))
        elif op == "cmp_unit":
            board.cmp_unit(P(rec["p"]), P(rec["q"]))
        elif op in ("bind", "output"):
            board.annotate(op, **{k: v for k, v in rec.items() if k not in ("seq", "op")})
        else:
            raise ValueError(f"unknown op {op!r}")
    return board
