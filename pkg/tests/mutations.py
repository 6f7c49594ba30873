"""Single-record corruptions of legal traces, each paired with the code the verifier must report."""

from __future__ import annotations

import copy
import random
from decimal import Decimal, localcontext
from fractions import Fraction

from matchstick import numerics as nm
from matchstick import trace as tr
from matchstick.lower import execute

EPS_EQ = Fraction(1, 2**128)

GOLDEN_SOURCES = {
    "bisector": "point A = (0, 0);\npoint B = (7, 0);\nlet M = midpoint(A, B);\noutput M;\n",
    "unit_circle": (
        "point O = (0.25, 0.4);\npoint S = (0.85, 1.2);\npoint A = (-0.3, 0);\npoint B = (0.5, 0.1);\n"
        "let g = circle(O, S);\nlet l = line(A, B);\nlet X = intersect(g, l)[0];\noutput X;\n"
    ),
    "translate": "point P = (0, 0);\npoint Q = (0.6, 0.2);\npoint T = (0.3, 0.7);\nlet U = translate(P, Q, T);\noutput U;\n",
    "perp": "point A = (0, 0);\npoint B = (0.6, 0.3);\npoint C = (2.2, 1.7);\nlet l = line(A, B);\nlet p = perp(l, C);\noutput p;\n",
}

# coordinate fields and, for stick records, the field holding the far end's origin
_COORDS = {
    "lay_free": (("x", "y"),),
    "lay_from_through": (("x", "y"),),
    "lay_through_both": (("ax", "ay"), ("bx", "by")),
    "choose_point": (("x", "y"),),
    "compass": (("x", "y"),),
    "crossing": (("x", "y"),),
}
_REFS = {
    "lay_free": ("at",),
    "lay_both_ends": ("p", "q"),
    "lay_from_through": ("p", "q"),
    "lay_through_both": ("p", "q"),
    "choose_point": ("stick",),
    "compass": ("center", "stick"),
    "crossing": ("s1", "s2"),
    "cmp_unit": ("p", "q"),
}

KINDS = ("nudge", "length", "dangling", "two_circle")


def golden_runs() -> dict:
    return {name: execute(src) for name, src in GOLDEN_SOURCES.items()}


def golden_traces() -> dict[str, tr.Trace]:
    return {name: run.trace for name, run in golden_runs().items()}


def _decimal(value) -> Decimal:
    return Decimal(str(value))


def _point_table(run) -> dict:
    """Point id -> exact board point (what the verifier's replay holds)."""
    return {tr.pid(i): p for i, p in run.board.points.items()}


def _claimed_unit_breaks(origin, far, extra=0) -> bool:
    """Whether a far end printed as ``far`` no longer sits at unit distance from ``origin``."""
    with nm.working(512):
        f = nm.point(str(far[0]), str(far[1]), 512)
        gap = abs(nm.dist(origin, f) - 1)
        slack = sum(_half_unit(v, 40) for v in far) + extra
        return gap > slack + nm.scalar(EPS_EQ, 512)


def _half_unit(value, digits):
    v = abs(Decimal(str(value)))
    if v == 0:
        return nm.mpfr(0)
    return nm.mpfr(5) * nm.mpfr(10) ** (v.adjusted() - digits)


def _nudge(rng, trace, table):
    candidates = [i for i, r in enumerate(trace.records) if r["op"] in _COORDS]
    i = rng.choice(candidates)
    rec = copy.deepcopy(trace.records[i])
    pair = rng.choice(_COORDS[rec["op"]])
    axis = rng.randrange(2)
    field = pair[axis]
    size = Fraction(rng.randint(10, 1000)) * EPS_EQ * rng.choice((1, -1))
    with localcontext() as ctx:
        ctx.prec = 80
        moved = _decimal(rec[field]) + Decimal(size.numerator) / Decimal(size.denominator)
    rec[field] = format(moved, "f")
    code = "CoordinateMismatch"
    origin_key = {"lay_free": "at", "lay_from_through": "p"}.get(rec["op"])
    if origin_key is not None:
        far = (_decimal(rec["x"]), _decimal(rec["y"]))
        if _claimed_unit_breaks(table[rec[origin_key]], far):
            code = "UnitLengthViolation"
    elif rec["op"] == "lay_through_both":
        a = (_decimal(rec["ax"]), _decimal(rec["ay"]))
        b = (_decimal(rec["bx"]), _decimal(rec["by"]))
        with nm.working(512):
            printed_a = nm.point(str(a[0]), str(a[1]), 512)
        if _claimed_unit_breaks(printed_a, b, sum(_half_unit(v, 40) for v in a)):
            code = "UnitLengthViolation"
    return i, rec, code


def _length(rng, trace, table):
    """Stretch a stick to 1 + k eps, or pair a stick's ends at a non-unit distance."""
    stretchable = [i for i, r in enumerate(trace.records) if r["op"] in ("lay_free", "lay_from_through")]
    pairs = [i for i, r in enumerate(trace.records) if r["op"] == "lay_both_ends"]
    if pairs and rng.random() < 0.5:
        i = rng.choice(pairs)
        rec = copy.deepcopy(trace.records[i])
        known = [p for p in table if p != rec["p"] and tr.parse_id(p, "P") < _first_unseen(trace, i)]
        with nm.working(256):
            o = table[rec["p"]]
            off_unit = [p for p in known if abs(nm.dist(o, table[p]) - 1) > nm.mpfr(2) ** -60]
        rec["q"] = rng.choice(off_unit)
        return i, rec, "UnitLengthViolation"
    i = rng.choice(stretchable)
    rec = copy.deepcopy(trace.records[i])
    origin = table[rec["at"] if rec["op"] == "lay_free" else rec["p"]]
    k = rng.randint(10, 1000)
    with nm.working(512):
        f = nm.point(str(rec["x"]), str(rec["y"]), 512)
        stretched = nm.add(origin, nm.scale(nm.unit(nm.sub(f, origin)), 1 + k * nm.scalar(EPS_EQ, 512)))
        rec["x"], rec["y"] = format(stretched.x, ".70f"), format(stretched.y, ".70f")
    return i, rec, "UnitLengthViolation"


def _first_unseen(trace, upto) -> int:
    seen = -1
    for rec in trace.records[:upto]:
        for key in ("point", "a", "b"):
            if key in rec and isinstance(rec[key], str) and rec[key].startswith("P"):
                seen = max(seen, tr.parse_id(rec[key], "P"))
    return seen + 1


def _dangling(rng, trace, table):
    candidates = [i for i, r in enumerate(trace.records) if r["op"] in _REFS]
    i = rng.choice(candidates)
    rec = copy.deepcopy(trace.records[i])
    field = rng.choice(_REFS[rec["op"]])
    prefix = rec[field][0]
    rec[field] = f"{prefix}{rng.randint(10**5, 10**6)}"
    return i, rec, "UnknownId"


def _two_circle(rng, trace, table):
    compasses = [i for i, r in enumerate(trace.records) if r["op"] == "compass"]
    i = rng.choice(compasses)
    rec = copy.deepcopy(trace.records[i])
    other = rng.choice([p for p in table if p != rec["center"]])
    style = rng.randrange(4)
    if style == 0:
        rec["center2"] = other
    elif style == 1:
        rec["centers"] = [rec.pop("center"), other]
    elif style == 2:
        rec["op"] = "compass_circles"
        rec["circles"] = [[rec["center"], "1"], [other, "1"]]
    else:
        rec["op"] = "circle_circle"
        rec["centers"] = [rec.pop("center"), other]
        rec.pop("stick", None)
    return i, rec, "SimultaneityViolation"


_MAKERS = {"nudge": _nudge, "length": _length, "dangling": _dangling, "two_circle": _two_circle}


def mutations(count: int, seed: int = 0):
    """Yield ``(kind, name, prefix_trace, seq, expected_code)``.

    The trace is cut just after the corrupted record: replay is sequential,
    so the verdict on that record is the same as on the whole trace, and a
    rejected prefix means a rejected trace.
    """
    rng = random.Random(seed)
    runs = golden_runs()
    goldens = {name: run.trace for name, run in runs.items()}
    tables = {name: _point_table(run) for name, run in runs.items()}
    names = sorted(goldens)
    for n in range(count):
        kind = KINDS[n % len(KINDS)]
        name = names[(n // len(KINDS)) % len(names)]
        if kind == "two_circle" and not any(r["op"] == "compass" for r in goldens[name].records):
            name = "unit_circle"
        trace = goldens[name]
        i, rec, code = _MAKERS[kind](rng, trace, tables[name])
        records = trace.records[:i] + [rec]
        yield kind, name, tr.Trace(trace.header, records), rec["seq"], code
