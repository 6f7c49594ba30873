"""Line-oriented JSON trace files.

The first line is a header object; every following line is one record with a
``seq`` number and an ``op`` name.  Point and stick ids are rendered as
``P<n>`` and ``S<n>``; coordinates are decimal strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError

VERSION = 1

# primitive stick moves; everything else is metadata
PRIMITIVE_OPS = (
    "lay_free",
    "lay_both_ends",
    "lay_from_through",
    "lay_through_both",
    "choose_point",
    "compass",
    "crossing",
    "cmp_unit",
)
METADATA_OPS = ("given", "bind", "output")


def pid(n: int) -> str:
    return f"P{n}"


def sid(n: int) -> str:
    return f"S{n}"


def parse_id(text, prefix: str) -> int:
    if not isinstance(text, str) or not text.startswith(prefix) or not text[1:].isdigit():
        raise ValueError(f"malformed {prefix}-id {text!r}")
    return int(text[1:])


def dump_record(record: dict) -> str:
    return json.dumps(record, separators=(", ", ": "), ensure_ascii=False)


@dataclass
class Trace:
    header: dict
    records: list[dict] = field(default_factory=list)

    def dumps(self) -> str:
        lines = [dump_record(self.header)]
        lines.extend(dump_record(r) for r in self.records)
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @property
    def primitive_count(self) -> int:
        return sum(1 for r in self.records if r.get("op") in PRIMITIVE_OPS)

    def op_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.records:
            counts[r.get("op")] = counts.get(r.get("op"), 0) + 1
        return dict(sorted(counts.items()))

    def outputs(self) -> dict[str, dict]:
        return {r["name"]: r for r in self.records if r.get("op") == "output"}

    def bindings(self) -> dict[str, dict]:
        return {r["name"]: r for r in self.records if r.get("op") == "bind"}


def loads(text: str) -> Trace:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty trace file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"line 1: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("version") != VERSION:
        raise ParseError("line 1: missing or unsupported header")
    for key in ("precision_bits", "epsilon_eq", "seed", "choice_strategy"):
        if key not in header:
            raise ParseError(f"line 1: header lacks {key!r}")
    records = []
    for n, line in enumerate(lines[1:], start=2):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {n}: {exc.msg}") from exc
        if not isinstance(rec, dict) or not isinstance(rec.get("seq"), int) or not isinstance(rec.get("op"), str):
            raise ParseError(f"line {n}: record needs integer 'seq' and string 'op'")
        records.append(rec)
    if not text.endswith("\n"):
        # a writer always terminates the final record; a missing newline means truncation
        raise ParseError(f"line {len(lines)}: truncated record")
    return Trace(header, records)


def read(path) -> Trace:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8: {exc}") from exc
    return loads(text)
