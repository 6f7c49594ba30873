"""``matchstick`` command line: compile, verify, render, check, oracle."""

from __future__ import annotations

import functools
import json
import os
import sys
from pathlib import Path

import click

from . import trace as tr
from .config import ENV_VAR, Config, load_config
from .errors import MatchstickError, ParseError
from .lang import CompileError, parse
from .lower import execute
from .oracle import analytic_points, compare, evaluate_analytic
from .render import render_svg
from .verifier import verify_trace

EXIT_OK, EXIT_FAIL, EXIT_IO = 0, 1, 2


def config_options(fn):
    options = [
        click.option("--precision", "precision_bits", type=int, help="Working precision in bits (default 256)."),
        click.option("--max-precision", "max_precision_bits", type=int, help="Escalation ceiling in bits (default 4096)."),
        click.option("--epsilon", "epsilon_eq", help="Predicate tolerance, e.g. 2^-128."),
        click.option("--epsilon-cmp", "epsilon_cmp", help="Oracle tolerance, e.g. 2^-64."),
        click.option("--seed", type=int, help="Seed for trial angles and random choices (default 42)."),
        click.option("--choice-strategy", type=click.Choice(["half", "random"]), help="How arbitrary points are picked."),
        click.option("--output-digits", type=int, help="Significant digits of trace coordinates (default 40)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


_CONFIG_KEYS = (
    "precision_bits",
    "max_precision_bits",
    "epsilon_eq",
    "epsilon_cmp",
    "seed",
    "choice_strategy",
    "output_digits",
)


def _split_config(kwargs: dict) -> tuple[dict, dict]:
    flags = {k: kwargs.pop(k) for k in _CONFIG_KEYS}
    return flags, kwargs


def _config(flags: dict, base: Config | None = None) -> Config:
    try:
        return (base or load_config()).updated(**flags)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"bad configuration: {exc}") from exc


def with_config(fn):
    @config_options
    @functools.wraps(fn)
    def wrapper(**kwargs):
        flags, rest = _split_config(kwargs)
        return fn(flags=flags, **rest)

    return wrapper


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _echo_err(text: str) -> None:
    click.echo(text, err=True)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(package_name="artifact")
def main():
    """Unit match-stick constructions: compile, verify, render and check."""


@main.command("compile")
@click.argument("source", type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out", required=True, type=click.Path(dir_okay=False), help="Trace file to write.")
@click.option("--grid", type=click.Choice(["direct", "spiral"]), default="direct", show_default=True)
@with_config
def compile_cmd(source, out, grid, flags):
    """Lower SOURCE to a primitive instruction trace."""
    config = _config(flags)
    try:
        text = _read_text(source)
    except (OSError, UnicodeDecodeError) as exc:
        _echo_err(f"cannot read {source}: {exc}")
        sys.exit(EXIT_IO)
    try:
        run = execute(parse(text), config, grid=grid)
    except CompileError as exc:
        _echo_err(exc.render(text, source))
        sys.exit(EXIT_FAIL)
    try:
        run.trace.write(out)
    except OSError as exc:
        _echo_err(f"cannot write {out}: {exc}")
        sys.exit(EXIT_IO)
    click.echo(f"{out}: {run.board.primitive_count} instructions")


def _load_trace(path: str) -> tr.Trace:
    try:
        return tr.read(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


@main.command("verify")
@click.argument("trace_path", metavar="TRACE", type=click.Path(dir_okay=False))
@click.option("--strict", is_flag=True, help="Also fail when any predicate needed more precision.")
@click.option("--json", "as_json", is_flag=True, help="Print the report as JSON.")
@with_config
def verify_cmd(trace_path, strict, as_json, flags):
    """Replay TRACE and check every instruction's legality."""
    try:
        trace = _load_trace(trace_path)
    except ParseError as exc:
        _echo_err(f"{trace_path}: {exc}")
        sys.exit(EXIT_IO)
    overridden = any(v is not None for v in flags.values()) or bool(os.environ.get(ENV_VAR))
    report = verify_trace(trace, _config(flags) if overridden else None)
    click.echo(json.dumps(report.as_dict(), indent=2) if as_json else report.text())
    if not report.accepted:
        sys.exit(EXIT_FAIL)
    if strict and report.stats["escalations"]:
        _echo_err(f"strict: {report.stats['escalations']} predicate(s) escalated precision")
        sys.exit(EXIT_FAIL)


@main.command("render")
@click.argument("trace_path", metavar="TRACE", type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out", required=True, type=click.Path(dir_okay=False), help="SVG file to write.")
def render_cmd(trace_path, out):
    """Draw TRACE as SVG."""
    try:
        trace = _load_trace(trace_path)
        svg = render_svg(trace)
    except (ParseError, KeyError, ValueError) as exc:
        _echo_err(f"{trace_path}: {exc}")
        sys.exit(EXIT_IO)
    try:
        Path(out).write_text(svg, encoding="utf-8")
    except OSError as exc:
        _echo_err(f"cannot write {out}: {exc}")
        sys.exit(EXIT_IO)


@main.command("check")
@click.argument("source", type=click.Path(dir_okay=False))
@click.option("-o", "--output", "out", type=click.Path(dir_okay=False), help="Also keep the trace here.")
@click.option("--grid", type=click.Choice(["direct", "spiral"]), default="direct", show_default=True)
@with_config
def check_cmd(source, out, grid, flags):
    """Compile, verify and compare SOURCE against the analytic oracle.

    Exit status names the failing stage: 1 compile, 2 verify, 3 oracle.
    """
    config = _config(flags)
    try:
        text = _read_text(source)
        program = parse(text)
        run = execute(program, config, grid=grid)
        if out:
            run.trace.write(out)
    except CompileError as exc:
        _echo_err("compile: " + exc.render(text, source))
        sys.exit(1)
    except (OSError, UnicodeDecodeError) as exc:
        _echo_err(f"compile: {exc}")
        sys.exit(1)
    report = verify_trace(run.trace.dumps(), config)
    click.echo(report.text())
    if not report.accepted:
        _echo_err("verify: trace rejected")
        sys.exit(2)
    try:
        oracle = compare(program, run.trace, config)
    except (CompileError, MatchstickError) as exc:
        message = exc.render(text, source) if isinstance(exc, CompileError) else str(exc)
        _echo_err(f"oracle: {message}")
        sys.exit(3)
    click.echo(oracle.text())
    if not oracle.passed:
        _echo_err("oracle: constructed outputs disagree with the analytic evaluation")
        sys.exit(3)


@main.command("oracle")
@click.argument("source", type=click.Path(dir_okay=False))
@click.argument("trace_path", metavar="[TRACE]", required=False, type=click.Path(dir_okay=False))
@with_config
def oracle_cmd(source, trace_path, flags):
    """Evaluate SOURCE analytically; with TRACE, compare its outputs."""
    config = _config(flags)
    try:
        text = _read_text(source)
        program = parse(text)
    except OSError as exc:
        _echo_err(f"cannot read {source}: {exc}")
        sys.exit(EXIT_IO)
    except CompileError as exc:
        _echo_err(exc.render(text, source))
        sys.exit(EXIT_FAIL)
    try:
        if trace_path is None:
            result = evaluate_analytic(program, config)
            for name in program.outputs:
                pts = analytic_points(result.values[name])
                coords = ", ".join(f"({format(p.x, '.25g')}, {format(p.y, '.25g')})" for p in pts)
                click.echo(f"{name} ({result.kinds[name]}): {coords}")
            return
        report = compare(program, _load_trace(trace_path), config)
    except CompileError as exc:
        _echo_err(exc.render(text, source))
        sys.exit(EXIT_FAIL)
    except ParseError as exc:
        _echo_err(str(exc))
        sys.exit(EXIT_IO)
    except MatchstickError as exc:
        _echo_err(f"{exc.code}: {exc}")
        sys.exit(EXIT_FAIL)
    click.echo(report.text())
    if not report.passed:
        sys.exit(EXIT_FAIL)


if __name__ == "__main__":  # pragma: no cover
    main()
