"""Lexer, parser, checker and pretty-printer for ``.euclid`` construction programs.

A program is a sequence of statements::

    point A = (0, 0);
    point B = (6.4, 2.5);
    let l = line(A, B);
    let g = circle(A, B);
    let X = intersect(g, l)[1];
    assert_on(X, l);
    output X;

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field

from .errors import MatchstickError

POINT, LINE, CIRCLE = "point", "line", "circle"

KEYWORDS = frozenset({"point", "let", "output", "assert_on"})

# name -> (argument kinds, result kind); None in a slot means line or circle
SIGNATURES: dict[str, tuple[tuple, str | None]] = {
    "line": ((POINT, POINT), LINE),
    "circle": ((POINT, POINT), CIRCLE),
    "midpoint": ((POINT, POINT), POINT),
    "perp_bisector": ((POINT, POINT), LINE),
    "perp": ((LINE, POINT), LINE),
    "parallel": ((LINE, POINT), LINE),
    "intersect": ((None, None), POINT),
    "translate": ((POINT, POINT, POINT), POINT),
}

RESERVED = KEYWORDS | frozenset(SIGNATURES)


@dataclass(frozen=True)
class SourceSpan:
    start: int  # byte offset, inclusive
    end: int  # byte offset, exclusive
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class CompileError(MatchstickError):
    """A lexical, syntactic, semantic or lowering error tied to a source span."""

    code = "CompileError"

    def __init__(self, kind: str, message: str, span: SourceSpan | None, cause: Exception | None = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span
        self.cause = cause

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.kind} error: {self.message}"

    def render(self, source: str, filename: str = "<source>") -> str:
        """Diagnostic with the offending line and a caret under the span."""
        if self.span is None:
            return f"{filename}: {self.kind} error: {self.message}"
        lines = source.splitlines() or [""]
        text = lines[self.span.line - 1] if self.span.line - 1 < len(lines) else ""
        width = max(1, min(self.span.end - self.span.start, len(text) - self.span.column + 1))
        caret = " " * (self.span.column - 1) + "^" * width
        return f"{filename}:{self.span.line}:{self.span.column}: {self.kind} error: {self.message}\n  {text}\n  {caret}"


# -- AST -------------------------------------------------------------------------


def _span():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    """An expression ``fn(args...)`` with an optional ``[index]``."""

    fn: str
    args: tuple[str, ...]
    index: int | None = None
    span: SourceSpan | None = _span()
    arg_spans: tuple = field(default=(), compare=False, repr=False)


@dataclass(frozen=True)
class PointDecl:
    name: str
    x: str
    y: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Let:
    name: str
    expr: Call
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Output:
    name: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Assert:
    kind: str
    args: tuple[str, ...]
    span: SourceSpan | None = _span()


Statement = PointDecl | Let | Output | Assert


@dataclass(frozen=True)
class Program:
    statements: tuple
    kinds: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def outputs(self) -> list[str]:
        return [s.name for s in self.statements if isinstance(s, Output)]


# -- lexer -----------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<num>[+-]?(?:\d+(?:\.\d*)?|\.\d+))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],;=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "punct", "eof"
    text: str
    span: SourceSpan


def _offsets(source: str):
    starts = [0]
    for m in re.finditer("\n", source):
        starts.append(m.end())
    return starts


def _byte_offsets(source: str):
    """Map a character offset to a UTF-8 byte offset."""
    wide = [(i, len(ch.encode("utf-8")) - 1) for i, ch in enumerate(source) if ord(ch) > 127]
    if not wide:
        return lambda i: i
    marks, extra, total = [], [], 0
    for i, n in wide:
        total += n
        marks.append(i)
        extra.append(total)
    return lambda i: i + (extra[bisect.bisect_left(marks, i) - 1] if bisect.bisect_left(marks, i) else 0)


def tokenize(source: str) -> list[Token]:
    line_starts = _offsets(source)
    to_byte = _byte_offsets(source)

    def span(start: int, end: int) -> SourceSpan:
        line = _line_of(line_starts, start)
        return SourceSpan(to_byte(start), to_byte(end), line, start - line_starts[line - 1] + 1)

    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise CompileError("lex", f"unexpected character {source[pos]!r}", span(pos, pos + 1))
        kind = m.lastgroup
        if kind in ("num", "ident", "punct"):
            tokens.append(Token(kind, m.group(), span(m.start(), m.end())))
        pos = m.end()
    tokens.append(Token("eof", "", span(len(source), len(source))))
    return tokens


def _line_of(starts: list[int], offset: int) -> int:
    lo, hi = 0, len(starts)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if starts[mid] <= offset:
            lo = mid
        else:
            hi = mid
    return lo + 1


# -- parser ----------------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise CompileError("syntax", f"{message}, found {found}", tok.span)

    def expect(self, text: str) -> Token:
        if self.tok.text != text or self.tok.kind not in ("punct", "ident"):
            self.fail(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "a name") -> Token:
        tok = self.tok
        if tok.kind != "ident":
            self.fail(f"expected {what}")
        if tok.text in RESERVED:
            self.fail(f"expected {what}, not the reserved word")
        return self.advance()

    def number(self) -> Token:
        if self.tok.kind != "num":
            self.fail("expected a number")
        return self.advance()

    def join(self, first: Token) -> SourceSpan:
        last = self.tokens[self.pos - 1]
        return SourceSpan(first.span.start, last.span.end, first.span.line, first.span.column)

    def program(self) -> list:
        out = []
        while self.tok.kind != "eof":
            out.append(self.statement())
        return out

    def statement(self):
        first = self.tok
        if first.kind != "ident" or first.text not in KEYWORDS:
            self.fail("expected 'point', 'let', 'output' or 'assert_on'")
        self.advance()
        if first.text == "point":
            name = self.ident("a point name").text
            self.expect("=")
            self.expect("(")
            x = self.number().text
            self.expect(",")
            y = self.number().text
            self.expect(")")
            self.expect(";")
            return PointDecl(name, x, y, self.join(first))
        if first.text == "let":
            name = self.ident().text
            self.expect("=")
            expr = self.expression()
            self.expect(";")
            return Let(name, expr, self.join(first))
        if first.text == "output":
            name = self.ident().text
            self.expect(";")
            return Output(name, self.join(first))
        self.expect("(")
        a = self.ident()
        self.expect(",")
        b = self.ident()
        self.expect(")")
        self.expect(";")
        return Assert("on", (a.text, b.text), self.join(first))

    def expression(self) -> Call:
        first = self.tok
        if first.kind != "ident" or first.text not in SIGNATURES:
            self.fail("expected one of " + ", ".join(sorted(SIGNATURES)))
        self.advance()
        arity = len(SIGNATURES[first.text][0])
        self.expect("(")
        args = [self.ident()]
        while self.tok.text == ",":
            self.advance()
            args.append(self.ident())
        if self.tok.text != ")":
            self.fail("expected ',' or ')'")
        close = self.advance()
        if len(args) != arity:
            raise CompileError(
                "syntax",
                f"{first.text} takes {arity} arguments, got {len(args)}",
                SourceSpan(first.span.start, close.span.end, first.span.line, first.span.column),
            )
        index = None
        if first.text == "intersect":
            self.expect("[")
            tok = self.tok
            if tok.kind != "num" or tok.text not in ("0", "1"):
                self.fail("intersection index must be 0 or 1")
            index = int(self.advance().text)
            self.expect("]")
        return Call(first.text, tuple(a.text for a in args), index, self.join(first), tuple(a.span for a in args))


def _check(statements: list) -> dict[str, str]:
    """Bind-before-use, single binding and kind checks; returns name -> kind."""
    kinds: dict[str, str] = {}

    def kind_of(name: str, span) -> str:
        if name not in kinds:
            raise CompileError("unbound", f"name {name!r} is not bound", span)
        return kinds[name]

    def bind(name: str, kind: str, span) -> None:
        if name in kinds:
            raise CompileError("duplicate", f"name {name!r} is already bound", span)
        kinds[name] = kind

    for stmt in statements:
        if isinstance(stmt, PointDecl):
            bind(stmt.name, POINT, stmt.span)
        elif isinstance(stmt, Let):
            call = stmt.expr
            wanted, result = SIGNATURES[call.fn]
            spans = call.arg_spans or (call.span,) * len(call.args)
            got = [kind_of(a, s) for a, s in zip(call.args, spans)]
            for arg, want, have, span in zip(call.args, wanted, got, spans):
                if want is None and have not in (LINE, CIRCLE):
                    raise CompileError("type", f"{call.fn} needs a line or circle, {arg!r} is a {have}", span)
                if want is not None and have != want:
                    raise CompileError("type", f"{call.fn} needs a {want}, {arg!r} is a {have}", span)
            bind(stmt.name, result, stmt.span)
        elif isinstance(stmt, Output):
            kind_of(stmt.name, stmt.span)
        else:
            p, target = stmt.args
            if kind_of(p, stmt.span) != POINT:
                raise CompileError("type", f"assert_on needs a point first, {p!r} is not one", stmt.span)
            if kind_of(target, stmt.span) not in (LINE, CIRCLE):
                raise CompileError("type", f"assert_on needs a line or circle, {target!r} is not one", stmt.span)
    return kinds


def parse(source: str) -> Program:
    """Parse and check a program; raises :class:`CompileError`."""
    statements = _Parser(source).program()
    kinds = _check(statements)
    return Program(tuple(statements), kinds)


# -- pretty-printer --------------------------------------------------------------


def format_expr(call: Call) -> str:
    text = f"{call.fn}({', '.join(call.args)})"
    return text if call.index is None else f"{text}[{call.index}]"


def format_statement(stmt) -> str:
    if isinstance(stmt, PointDecl):
        return f"point {stmt.name} = ({stmt.x}, {stmt.y});"
    if isinstance(stmt, Let):
        return f"let {stmt.name} = {format_expr(stmt.expr)};"
    if isinstance(stmt, Output):
        return f"output {stmt.name};"
    return f"assert_on({', '.join(stmt.args)});"


def pretty(program: Program) -> str:
    return "".join(format_statement(s) + "\n" for s in program.statements)
