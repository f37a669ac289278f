"""Operator CLI: run the runtime, seed fixtures, register modules, print
context, and run the benchmark."""
from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import fixtures
from .dynamic import DynamicModuleManifest
from .errors import ValidationError
from .harness import EvalHarness, TaskFileError, load_tasks
from .runtime import ENV_DATA_DIR, ENV_TZ, Runtime
from .timeutil import parse_ts

DEFAULT_DATA_DIR = "./psi_data"


def _data_dir(value: str | None) -> Path:
    return Path(value or os.environ.get(ENV_DATA_DIR, DEFAULT_DATA_DIR))


@click.group()
@click.option("--data-dir", "data_dir", default=None, help=f"State directory (env {ENV_DATA_DIR}).")
@click.option("--tz", default=None, help=f"IANA timezone for day boundaries (env {ENV_TZ}).")
@click.pass_context
def main(ctx: click.Context, data_dir: str | None, tz: str | None) -> None:
    ctx.ensure_object(dict)
    ctx.obj["data_dir"] = _data_dir(data_dir)
    ctx.obj["tz"] = tz or os.environ.get(ENV_TZ)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8777, show_default=True)
@click.option("--role", type=click.Choice(["all", "rest", "ws"]), default="all", show_default=True)
@click.option("--backend", type=click.Choice(["deterministic", "llm"]), default="deterministic", show_default=True)
@click.pass_context
def serve(ctx: click.Context, host: str, port: int, role: str, backend: str) -> None:
    """Run the gateway (REST + chat WebSocket)."""
    from .gateway import serve as run_server

    runtime = Runtime(ctx.obj["data_dir"], tz=ctx.obj["tz"])
    run_server(runtime, host=host, port=port, role=role, backend=backend)


@main.command()
@click.option("--fixture", required=True, type=click.Choice(sorted(fixtures.SEEDERS)))
@click.pass_context
def seed(ctx: click.Context, fixture: str) -> None:
    """Wipe the data directory and seed a named fixture."""
    fixtures.seed(ctx.obj["data_dir"], fixture, tz=ctx.obj["tz"])
    click.echo(f"seeded fixture {fixture!r} into {ctx.obj['data_dir']}")


@main.command()
@click.option("--as-of", "as_of", default=None, help="RFC 3339 timestamp; defaults to now.")
@click.pass_context
def context(ctx: click.Context, as_of: str | None) -> None:
    """Print the assembled personal context."""
    runtime = Runtime(ctx.obj["data_dir"], tz=ctx.obj["tz"])
    when = parse_ts(as_of) if as_of else runtime.now()
    click.echo(runtime.assemble(when).rendered, nl=False)
    click.echo()


@main.group()
def module() -> None:
    """Dynamic module management."""


@module.command("add")
@click.argument("manifest_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def module_add(ctx: click.Context, manifest_file: str) -> None:
    """Validate and register a dynamic-module manifest."""
    runtime = Runtime(ctx.obj["data_dir"], tz=ctx.obj["tz"])
    try:
        raw = json.loads(Path(manifest_file).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        click.echo(f"invalid JSON: {exc}", err=True)
        sys.exit(1)
    manifest = DynamicModuleManifest.from_dict(raw)
    violations = runtime.dynamic.validate(manifest)
    if violations:
        for v in violations:
            click.echo(f"violation: {v}", err=True)
        sys.exit(1)
    desc = runtime.dynamic.register(manifest)
    click.echo(f"registered {desc.toolkit_id} ({desc.display_name})")


@main.command("eval")
@click.option("--tasks", "tasks_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--conditions", default="shared,search,single", show_default=True)
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False))
@click.option("--search-budget", default=None, type=int)
@click.option("--live-data-dir", "live_dir", default=None, type=click.Path(file_okay=False),
              help="Clone this directory per task instead of seeding each task's fixture.")
@click.pass_context
def eval_cmd(ctx: click.Context, tasks_file: str, conditions: str,
             report_path: str | None, search_budget: int | None, live_dir: str | None) -> None:
    """Run the benchmark suite and print the summary table."""
    try:
        tasks = load_tasks(tasks_file)
    except TaskFileError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    harness = EvalHarness(source_data_dir=live_dir, tz=ctx.obj["tz"], search_budget=search_budget)
    names = [c.strip() for c in conditions.split(",") if c.strip()]
    try:
        report = harness.run_suite(tasks, names, report_path=report_path)
    except (KeyError, ValueError, ValidationError) as exc:
        click.echo(f"eval failed: {exc}", err=True)
        sys.exit(1)
    click.echo(report["summary_table"])


if __name__ == "__main__":
    main()
