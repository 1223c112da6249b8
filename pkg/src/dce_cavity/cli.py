"""Command-line front end: ``dce-cavity <task> --config file.json --out dir``."""

from __future__ import annotations

import json
import sys

import click
from pydantic import ValidationError

from . import __version__
from .config import load_config
from .runner import run_scenario, write_outputs

EXIT_ACCEPTANCE = 1
EXIT_INVALID = 2
EXIT_RUNTIME = 3


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {path}: {e['msg']}")
    return "\n".join(lines)


def _run(task: str, config_path: str, out: str):
    try:
        config = load_config(config_path)
    except ValidationError as err:
        click.echo(f"invalid config {config_path}:\n{_format_validation(err)}", err=True)
        sys.exit(EXIT_INVALID)
    except (OSError, json.JSONDecodeError) as err:
        click.echo(f"cannot read config {config_path}: {err}", err=True)
        sys.exit(EXIT_INVALID)
    if config.task != task:
        click.echo(f"config {config_path} is a {config.task!r} scenario, not {task!r}", err=True)
        sys.exit(EXIT_INVALID)
    try:
        result = run_scenario(config)
    except (ArithmeticError, RuntimeError, ValueError) as err:
        click.echo(f"scenario {config.name!r} failed: {type(err).__name__}: {err}", err=True)
        sys.exit(EXIT_RUNTIME)
    paths = write_outputs(result, out)
    for name, path in paths.items():
        click.echo(f"{name}: {path}")
    for key, value in result.summary.items():
        if not isinstance(value, (list, dict)):
            click.echo(f"  {key} = {value}")


@click.group(invoke_without_command=True)
@click.version_option(version=__version__, prog_name="dce-cavity")
@click.option("--verify", is_flag=True, help="Run the shipped acceptance scenarios and report pass/fail.")
@click.option("--criterion", "-c", type=int, multiple=True, help="Restrict --verify to these criteria.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="With --verify, also write each scenario's outputs under this directory.")
@click.pass_context
def main(ctx, verify, criterion, out):
    """Dynamical Casimir effect in a cavity with a modulated dielectric slab."""
    if ctx.invoked_subcommand is not None:
        if verify:
            raise click.UsageError("--verify does not combine with a subcommand")
        return
    if not verify:
        click.echo(ctx.get_help())
        return
    from .acceptance import verify as run_verify

    reports = run_verify(criterion or None, out)
    for report in reports:
        click.echo(report.line())
    failed = [r.number for r in reports if not r.passed]
    click.echo(f"{len(reports) - len(failed)}/{len(reports)} criteria passed")
    sys.exit(EXIT_ACCEPTANCE if failed else 0)


def _task_command(task: str, doc: str):
    @click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
    @click.option("--out", required=True, type=click.Path(file_okay=False))
    def command(config_path, out):
        _run(task, config_path, out)

    command.__doc__ = doc
    main.command(name=task)(command)


_task_command("spectrum", "Eigenfrequencies, and optionally Gram and coupling matrices.")
_task_command("sweep", "Exact against first-order results over a/L and ratio grids.")
_task_command("evolve", "Bogoliubov evolution of one driven mode.")
_task_command("estimate", "Laboratory-unit squeezing rate and production time.")
