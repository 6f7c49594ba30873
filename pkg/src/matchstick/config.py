"""Run configuration: precision, tolerances, seed and choice strategy."""

from __future__ import annotations

import json
import os
import re
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .numerics import Tolerance

ENV_VAR = "MATCHSTICK_CONFIG"
CHOICE_STRATEGIES = ("half", "random")

_POW2 = re.compile(r"^\s*2\s*(?:\^|\*\*)\s*\(?\s*(-?\d+)\s*\)?\s*$")


def parse_epsilon(text) -> Fraction:
    """Accept ``2^-128``, ``2**-64``, ``p/q`` or a decimal literal."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, float)):
        return Fraction(text)
    m = _POW2.match(str(text))
    if m:
        return Fraction(2) ** int(m.group(1))
    return Fraction(str(text).strip())


def format_epsilon(value: Fraction) -> str:
    if value.numerator == 1 and value.denominator & (value.denominator - 1) == 0:
        return f"2^-{value.denominator.bit_length() - 1}"
    return str(value)


@dataclass(frozen=True)
class Config:
    precision_bits: int = 256
    max_precision_bits: int = 4096
    epsilon_eq: Fraction = Fraction(1, 2**128)
    epsilon_cmp: Fraction = Fraction(1, 2**64)
    seed: int = 42
    choice_strategy: str = "half"
    output_digits: int = 40

    def __post_init__(self):
        object.__setattr__(self, "epsilon_eq", parse_epsilon(self.epsilon_eq))
        object.__setattr__(self, "epsilon_cmp", parse_epsilon(self.epsilon_cmp))
        if not 64 <= self.precision_bits <= self.max_precision_bits:
            raise ValueError("need 64 <= precision_bits <= max_precision_bits")
        if not 0 < self.epsilon_eq < self.epsilon_cmp < 1:
            raise ValueError("need 0 < epsilon_eq < epsilon_cmp < 1")
        if self.choice_strategy not in CHOICE_STRATEGIES:
            raise ValueError(f"choice_strategy must be one of {CHOICE_STRATEGIES}")
        if self.output_digits < 1:
            raise ValueError("output_digits must be positive")

    @property
    def tolerance(self) -> Tolerance:
        return Tolerance(self.precision_bits, self.max_precision_bits, self.epsilon_eq)

    @property
    def comparison_tolerance(self) -> Tolerance:
        return Tolerance(self.precision_bits, self.max_precision_bits, self.epsilon_cmp)

    def updated(self, **changes) -> "Config":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        out = asdict(self)
        out["epsilon_eq"] = format_epsilon(self.epsilon_eq)
        out["epsilon_cmp"] = format_epsilon(self.epsilon_cmp)
        return out


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Read a JSON config file; keys are the :class:`Config` field names.

    With no path, ``$MATCHSTICK_CONFIG`` is consulted; absent both, defaults.
    """
    if path is None:
        path = os.environ.get(ENV_VAR)
        if not path:
            return Config()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    known = {f.name for f in fields(Config)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return Config(**data)
