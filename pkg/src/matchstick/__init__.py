"""Geometry with unit match-sticks.

Euclidean construction programs are lowered to traces of unit-stick
instructions, executed on a :class:`~matchstick.board.Board`, replayed by an
independent verifier, drawn as SVG, and compared with an analytic oracle.
"""

from .board import Board
from .config import Config, load_config
from .lang import CompileError, parse, pretty
from .lower import execute, lower
from .oracle import compare, evaluate_analytic
from .render import render_svg
from .verifier import VerifyReport, verify_trace

__version__ = "0.1.0"

__all__ = [
    "Board",
    "CompileError",
    "Config",
    "VerifyReport",
    "compare",
    "evaluate_analytic",
    "execute",
    "load_config",
    "lower",
    "parse",
    "pretty",
    "render_svg",
    "verify_trace",
]
