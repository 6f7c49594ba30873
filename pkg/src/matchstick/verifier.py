"""Independent legality check of a primitive trace.

The verifier replays every record with its own point registry and only the
``numerics`` kernel, re-deriving each claimed coordinate, unit length,
offset, candidate count and measurement.  It never imports the executor.
"""

from __future__ import annotations

import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from . import numerics as nm
from . import trace as tr
from .config import Config, parse_epsilon
from .errors import AmbiguousPredicate, CollinearOverlap, DegenerateDirection
from .numerics import Cmp, Point2, Segment2, Tolerance, working

ACCEPT = "Accept"
REJECT = "Reject"

ERROR_CODES = frozenset(
    {
        "UnknownId",
        "UnitLengthViolation",
        "OffsetOutOfRange",
        "CandidateCountMismatch",
        "CoordinateMismatch",
        "SimultaneityViolation",
        "PickOutOfRange",
        "NoIntersection",
        "NoCrossing",
        "CollinearOverlap",
        "DegenerateDirection",
        "MeasurementMismatch",
        "IdMismatch",
        "UnknownOp",
        "MalformedRecord",
        "AmbiguousPredicate",
    }
)

# keys that would let one compass step consult two circles or two sticks
_MULTI_KEYS = ("centers", "center2", "sticks", "stick2", "circles", "radius", "radii")


@dataclass(frozen=True)
class Finding:
    seq: int
    code: str
    message: str

    def as_dict(self) -> dict:
        return {"seq": self.seq, "code": self.code, "message": self.message}


@dataclass
class VerifyReport:
    verdict: str
    findings: list[Finding] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT

    def codes(self) -> list[str]:
        return [f.code for f in self.findings]

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "findings": [f.as_dict() for f in self.findings], "stats": self.stats}

    def text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for f in self.findings:
            lines.append(f"  seq {f.seq}: {f.code}: {f.message}")
        counts = ", ".join(f"{k}={v}" for k, v in self.stats.get("op_counts", {}).items())
        lines.append(f"instructions: {self.stats.get('primitive_count', 0)} ({counts})")
        lines.append(f"max precision: {self.stats.get('max_precision_bits', 0)} bits")
        return "\n".join(lines)


class _Reject(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _tolerance(header: dict, config: Config | None) -> tuple[Tolerance, int]:
    if config is not None:
        return config.tolerance, config.output_digits
    bits = int(header.get("precision_bits", 256))
    max_bits = int(header.get("max_precision_bits", max(bits, 4096)))
    eps = parse_epsilon(header.get("epsilon_eq", "2^-128"))
    return Tolerance(bits, max_bits, eps), int(header.get("output_digits", 40))


class _Replay:
    CELL = 2.0**-20

    def __init__(self, tol: Tolerance, digits: int):
        self.tol = tol
        self.bits = tol.bits
        self.digits = digits
        self.points: dict[int, Point2] = {}
        self.sticks: dict[int, tuple[int, int]] = {}
        self._cells: dict[tuple[int, int], list[int]] = {}

    # -- registry ---------------------------------------------------------

    def _key(self, p: Point2) -> tuple[int, int]:
        return math.floor(float(p.x) / self.CELL), math.floor(float(p.y) / self.CELL)

    def lookup(self, p: Point2) -> int | None:
        kx, ky = self._key(p)
        hits = [
            i
            for dx in (-1, 0, 1)
            for dy in (-1, 0, 1)
            for i in self._cells.get((kx + dx, ky + dy), ())
            if nm.points_equal(self.points[i], p, self.tol)
        ]
        return min(hits) if hits else None

    def register(self, p: Point2, claimed: str) -> int:
        """Add ``p`` (or reuse a coincident point) and check the claimed id."""
        found = self.lookup(p)
        ident = found if found is not None else len(self.points)
        want = _point_id(claimed)
        if want != ident:
            raise _Reject("IdMismatch", f"claimed {claimed}, replay gives {tr.pid(ident)}")
        if found is None:
            self.points[ident] = p
            self._cells.setdefault(self._key(p), []).append(ident)
        return ident

    def point(self, text) -> Point2:
        ident = _point_id(text)
        if ident not in self.points:
            raise _Reject("UnknownId", f"point {text} does not exist")
        return self.points[ident]

    def stick(self, text) -> Segment2:
        if isinstance(text, list):
            raise _Reject("SimultaneityViolation", "several sticks used at once")
        try:
            ident = tr.parse_id(text, "S")
        except ValueError:
            raise _Reject("MalformedRecord", f"bad stick id {text!r}") from None
        if ident not in self.sticks:
            raise _Reject("UnknownId", f"stick {text} does not exist")
        a, b = self.sticks[ident]
        return Segment2(self.points[a], self.points[b])

    def new_stick(self, claimed: str, a: int, b: int) -> None:
        try:
            ident = tr.parse_id(claimed, "S")
        except ValueError:
            raise _Reject("MalformedRecord", f"bad stick id {claimed!r}") from None
        if ident != len(self.sticks):
            raise _Reject("IdMismatch", f"claimed {claimed}, replay gives {tr.sid(len(self.sticks))}")
        self.sticks[ident] = (a, b)

    # -- claims -----------------------------------------------------------

    def _quantum(self, value: mpfr) -> mpfr:
        # half a unit in the last printed digit
        if value == 0:
            return mpfr(0)
        return _half_unit(math.floor(math.log10(abs(float(value)))) - self.digits, self.bits)

    def check_coords(self, computed: Point2, xs, ys, what: str = "point") -> None:
        try:
            claimed = nm.point(str(xs), str(ys), self.bits)
        except (ValueError, TypeError):
            raise _Reject("MalformedRecord", f"unreadable coordinates for {what}") from None
        for got, want, axis in ((computed.x, claimed.x, "x"), (computed.y, claimed.y, "y")):
            with working(self.bits):
                slack = self._quantum(max(abs(got), abs(want)))
            verdict = nm.compare_scalar(lambda: abs(got - want) - slack, self.tol, scale_hint=abs(got) + 1)
            if verdict > 0:
                raise _Reject(
                    "CoordinateMismatch",
                    f"{what} {axis} claimed {xs if axis == 'x' else ys}, replay gives {format(got, '.25g')}",
                )

    def check_claimed_unit(self, origin: Point2, xs, ys, origin_printed: bool = False) -> None:
        """The claimed far end of a stick must itself sit at unit distance.

        Only the rounding of printed coordinates is forgiven; ``origin`` is
        exact unless it too was read back from the trace.
        """
        try:
            far = nm.point(str(xs), str(ys), self.bits)
        except (ValueError, TypeError):
            raise _Reject("MalformedRecord", "unreadable coordinates") from None
        with working(self.bits):
            slack = self._quantum(far.x) + self._quantum(far.y)
            if origin_printed:
                slack += self._quantum(origin.x) + self._quantum(origin.y)

            def gap():
                return abs(nm.dist(origin, far) - 1) - slack

        if nm.compare_scalar(gap, self.tol, scale_hint=2) > 0:
            raise _Reject("UnitLengthViolation", "claimed stick is not of unit length")


@functools.lru_cache(maxsize=1024)
def _half_unit(exponent: int, bits: int) -> mpfr:
    with working(bits):
        return mpfr(5) * mpfr(10) ** exponent


def _point_id(text) -> int:
    if isinstance(text, list):
        raise _Reject("SimultaneityViolation", "several centres used at once")
    try:
        return tr.parse_id(text, "P")
    except ValueError:
        raise _Reject("MalformedRecord", f"bad point id {text!r}") from None


def _fraction(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise _Reject("MalformedRecord", f"unreadable offset {text!r}") from None


def _need(rec: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in rec]
    if missing:
        raise _Reject("MalformedRecord", f"missing field(s) {', '.join(missing)}")


def _step(rp: _Replay, rec: dict) -> None:
    op = rec["op"]
    bits = rp.bits
    if op == "given":
        _need(rec, "point", "x", "y")
        try:
            p = nm.point(str(rec["x"]), str(rec["y"]), bits)
        except (ValueError, TypeError):
            raise _Reject("MalformedRecord", "unreadable given coordinates") from None
        rp.register(p, rec["point"])
    elif op == "lay_free":
        _need(rec, "at", "angle", "stick", "point", "x", "y")
        origin = rp.point(rec["at"])
        base = rp.stick(rec["ref"]) if rec.get("ref") is not None else None
        with working(bits):
            theta = nm.scalar(_fraction(rec["angle"]), bits) * gmpy2.const_pi() / 180
            c, s = gmpy2.cos(theta), gmpy2.sin(theta)
            if base is None:
                direction = Point2(c, s)
            else:
                u = nm.unit(nm.sub(base.b, base.a))
                direction = Point2(c * u.x - s * u.y, s * u.x + c * u.y)
            far = nm.add(origin, direction)
        rp.check_claimed_unit(origin, rec["x"], rec["y"])
        rp.check_coords(far, rec["x"], rec["y"])
        far_id = rp.register(far, rec["point"])
        rp.new_stick(rec["stick"], _point_id(rec["at"]), far_id)
    elif op == "lay_both_ends":
        _need(rec, "p", "q", "stick")
        a, b = rp.point(rec["p"]), rp.point(rec["q"])
        c = nm.cmp_unit_distance(a, b, rp.tol)
        if c is not Cmp.EQUAL:
            raise _Reject("UnitLengthViolation", f"{rec['p']}-{rec['q']} is {c.name.lower()} than the unit")
        rp.new_stick(rec["stick"], _point_id(rec["p"]), _point_id(rec["q"]))
    elif op == "lay_from_through":
        _need(rec, "p", "q", "stick", "point", "x", "y")
        a, b = rp.point(rec["p"]), rp.point(rec["q"])
        if nm.points_equal(a, b, rp.tol):
            raise _Reject("DegenerateDirection", f"{rec['p']} and {rec['q']} coincide")
        if nm.cmp_unit_distance(a, b, rp.tol) is Cmp.GREATER:
            raise _Reject("UnitLengthViolation", f"{rec['p']}-{rec['q']} is longer than the unit")
        far = nm.unit_point_on_ray(a, b, rp.tol)
        rp.check_claimed_unit(a, rec["x"], rec["y"])
        rp.check_coords(far, rec["x"], rec["y"])
        far_id = rp.register(far, rec["point"])
        rp.new_stick(rec["stick"], _point_id(rec["p"]), far_id)
    elif op == "lay_through_both":
        _need(rec, "p", "q", "t", "stick", "a", "ax", "ay", "b", "bx", "by")
        a, b = rp.point(rec["p"]), rp.point(rec["q"])
        if nm.points_equal(a, b, rp.tol):
            raise _Reject("DegenerateDirection", f"{rec['p']} and {rec['q']} coincide")
        if nm.cmp_unit_distance(a, b, rp.tol) is not Cmp.LESS:
            raise _Reject("UnitLengthViolation", f"{rec['p']}-{rec['q']} leaves no interior room")
        t = _fraction(rec["t"])
        with working(bits):
            tt = nm.scalar(t, bits)
        if t <= 0 or nm.compare_scalar(lambda: tt - (1 - nm.dist(a, b)), rp.tol) >= 0:
            raise _Reject("OffsetOutOfRange", f"offset {t} outside (0, 1 - |pq|)")
        with working(bits):
            u = nm.unit(nm.sub(b, a))
            end_a = nm.sub(a, nm.scale(u, tt))
            end_b = nm.add(a, nm.scale(u, 1 - tt))
        claimed_a = nm.point(str(rec["ax"]), str(rec["ay"]), bits)
        rp.check_claimed_unit(claimed_a, rec["bx"], rec["by"], origin_printed=True)
        rp.check_coords(end_a, rec["ax"], rec["ay"], "end a")
        rp.check_coords(end_b, rec["bx"], rec["by"], "end b")
        ia = rp.register(end_a, rec["a"])
        ib = rp.register(end_b, rec["b"])
        rp.new_stick(rec["stick"], ia, ib)
    elif op == "choose_point":
        _need(rec, "stick", "t", "point", "x", "y")
        seg = rp.stick(rec["stick"])
        t = _fraction(rec["t"])
        interior = rec.get("interior_only", True)
        if (interior and not 0 < t < 1) or not 0 <= t <= 1:
            raise _Reject("OffsetOutOfRange", f"offset {t} not allowed")
        with working(bits):
            p = nm.add(seg.a, nm.scale(nm.sub(seg.b, seg.a), nm.scalar(t, bits)))
        rp.check_coords(p, rec["x"], rec["y"])
        rp.register(p, rec["point"])
    elif op == "compass":
        extra = [k for k in _MULTI_KEYS if k in rec]
        if extra:
            raise _Reject("SimultaneityViolation", f"compass record carries {', '.join(extra)}")
        _need(rec, "center", "stick", "pick", "candidates", "point", "x", "y")
        center = rp.point(rec["center"])
        seg = rp.stick(rec["stick"])
        candidates = nm.unit_circle_segment_intersection(center, seg, rp.tol)
        if rec["candidates"] != len(candidates):
            raise _Reject(
                "CandidateCountMismatch", f"claimed {rec['candidates']} candidates, replay finds {len(candidates)}"
            )
        if not candidates:
            raise _Reject("NoIntersection", "compass finds nothing on the stick")
        pick = rec["pick"]
        if not isinstance(pick, int) or not 0 <= pick < len(candidates):
            raise _Reject("PickOutOfRange", f"pick {pick} of {len(candidates)}")
        rp.check_coords(candidates[pick], rec["x"], rec["y"])
        rp.register(candidates[pick], rec["point"])
    elif op == "crossing":
        _need(rec, "s1", "s2", "point", "x", "y")
        s1, s2 = rp.stick(rec["s1"]), rp.stick(rec["s2"])
        try:
            hit = nm.segment_intersection(s1, s2, rp.tol)
        except CollinearOverlap:
            raise _Reject("CollinearOverlap", "sticks overlap along a line") from None
        if hit is None:
            raise _Reject("NoCrossing", f"{rec['s1']} and {rec['s2']} do not cross")
        rp.check_coords(hit, rec["x"], rec["y"])
        rp.register(hit, rec["point"])
    elif op == "cmp_unit":
        _need(rec, "p", "q", "result")
        c = nm.cmp_unit_distance(rp.point(rec["p"]), rp.point(rec["q"]), rp.tol)
        if c.name.lower() != str(rec["result"]).lower():
            raise _Reject("MeasurementMismatch", f"recorded {rec['result']}, replay measures {c.name.lower()}")
    elif op in ("bind", "output"):
        for ident in rec.get("points", []):
            rp.point(ident)
    elif "compass" in op or "circle" in op:
        raise _Reject("SimultaneityViolation", f"{op} is not a single-stick compass step")
    else:
        raise _Reject("UnknownOp", f"unknown instruction {op!r}")


def verify_trace(trace: tr.Trace | str, config: Config | None = None) -> VerifyReport:
    """Replay ``trace`` and report every legality finding.

    ``trace`` may be a parsed :class:`Trace` or its text (parse errors
    propagate as :class:`ParseError`).  Tolerances come from ``config`` when
    given, otherwise from the trace header.
    """
    if isinstance(trace, str):
        trace = tr.loads(trace)
    tol, digits = _tolerance(trace.header, config)
    rp = _Replay(tol, digits)
    findings: list[Finding] = []
    counts: Counter = Counter()
    with nm.track_precision() as log, working(tol.bits):
        for expected, rec in enumerate(trace.records):
            seq = rec.get("seq", expected)
            counts[rec.get("op")] += 1
            if seq != expected:
                findings.append(Finding(seq, "MalformedRecord", f"sequence number {seq}, expected {expected}"))
            try:
                _step(rp, rec)
            except _Reject as exc:
                findings.append(Finding(seq, exc.code, str(exc)))
            except AmbiguousPredicate as exc:
                findings.append(Finding(seq, "AmbiguousPredicate", str(exc)))
            except DegenerateDirection as exc:
                findings.append(Finding(seq, "DegenerateDirection", str(exc)))
    stats = {
        "op_counts": dict(sorted(counts.items(), key=lambda kv: str(kv[0]))),
        "primitive_count": sum(v for k, v in counts.items() if k in tr.PRIMITIVE_OPS),
        "points": len(rp.points),
        "sticks": len(rp.sticks),
        "max_precision_bits": max(log.peak, tol.bits),
        "escalations": log.escalations,
    }
    verdict = REJECT if any(f.code in ERROR_CODES for f in findings) else ACCEPT
    return VerifyReport(verdict, findings, stats)
