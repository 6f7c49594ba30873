"""Deterministic SVG drawing of a trace: sticks as lines, points as labelled dots."""

from __future__ import annotations

from decimal import Context, Decimal
from xml.sax.saxutils import escape

from . import trace as tr

DOT_RADIUS = "0.02"
PAD = Decimal(1)


def _num(text) -> Decimal:
    return Decimal(str(text))


_SHORT = Context(prec=12)


def _fmt(value: Decimal) -> str:
    # twelve significant digits is finer than any viewer resolves
    out = format(_SHORT.plus(value).normalize(), "f")
    return "0" if out == "-0" else out


def collect(trace: tr.Trace) -> tuple[dict, list]:
    """Points (id -> (x, y)) and sticks (ordered (a, b) id pairs) laid by the trace."""
    points: dict[str, tuple[Decimal, Decimal]] = {}
    sticks: list[tuple[str, str, str]] = []

    def see(ident, x, y):
        points.setdefault(ident, (_num(x), _num(y)))

    for rec in trace.records:
        op = rec.get("op")
        if op == "given" or op in ("choose_point", "compass", "crossing"):
            see(rec["point"], rec["x"], rec["y"])
        elif op == "lay_free":
            see(rec["point"], rec["x"], rec["y"])
            sticks.append((rec["stick"], rec["at"], rec["point"]))
        elif op == "lay_from_through":
            see(rec["point"], rec["x"], rec["y"])
            sticks.append((rec["stick"], rec["p"], rec["point"]))
        elif op == "lay_both_ends":
            sticks.append((rec["stick"], rec["p"], rec["q"]))
        elif op == "lay_through_both":
            see(rec["a"], rec["ax"], rec["ay"])
            see(rec["b"], rec["bx"], rec["by"])
            sticks.append((rec["stick"], rec["a"], rec["b"]))
    return points, sticks


def render_svg(trace: tr.Trace) -> str:
    """SVG text; identical traces give byte-identical output.

    The y axis is flipped so the drawing has the usual mathematical
    orientation, and the view box is the bounding box padded by one unit.
    """
    points, sticks = collect(trace)
    if points:
        xs = [x for x, _ in points.values()]
        ys = [-y for _, y in points.values()]
        x0, y0 = min(xs) - PAD, min(ys) - PAD
        w, h = max(xs) - min(xs) + 2 * PAD, max(ys) - min(ys) + 2 * PAD
    else:
        x0, y0, w, h = Decimal(-1), Decimal(-1), Decimal(2), Decimal(2)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">',
        '<g stroke="black" stroke-width="0.01" stroke-linecap="round">',
    ]
    for ident, a, b in sticks:
        (ax, ay), (bx, by) = points[a], points[b]
        out.append(
            f'<line id="{escape(ident)}" x1="{_fmt(ax)}" y1="{_fmt(-ay)}" x2="{_fmt(bx)}" y2="{_fmt(-by)}"/>'
        )
    out.append("</g>")
    out.append('<g fill="crimson" font-size="0.08" font-family="monospace">')
    for ident in sorted(points, key=lambda s: tr.parse_id(s, "P")):
        x, y = points[ident]
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(-y)}" r="{DOT_RADIUS}"/>')
        out.append(f'<text x="{_fmt(x + Decimal("0.03"))}" y="{_fmt(-y - Decimal("0.03"))}">{escape(ident)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
