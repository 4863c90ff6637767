"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 network exhaustion,
4 data invariant violation.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Optional

import click

from . import __version__
from .client import DataError, FetchExhaustedError
from .config import ConfigError, PipelineConfig
from .pipeline import STAGE_ORDER, PipelineStageError, run_pipeline, run_stage

EXIT_CONFIG = 2
EXIT_NETWORK = 3
EXIT_DATA = 4


def _load_config(path: Optional[str], cache: Optional[str], offline: bool) -> PipelineConfig:
    config = PipelineConfig.from_file(path) if path else PipelineConfig()
    if cache:
        config.cache_dir = cache
    if offline:
        config.offline = True
    return config


@click.group()
@click.version_option(version=__version__, prog_name="wikicomm")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON configuration file.")
@click.option("--cache", "cache_dir", type=click.Path(), default=None,
              help="Response cache directory (overrides config).")
@click.option("--offline", is_flag=True, help="Never touch the network; cache misses fail.")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], cache_dir: Optional[str],
        offline: bool, verbose: bool) -> None:
    """Reconstruct editor communication networks and relate them to quality."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = _load_config(config_path, cache_dir, offline)


def _make_stage_command(stage: str) -> None:
    @cli.command(name=stage, help=f"Run the {stage} stage.")
    @click.pass_obj
    def _command(config: PipelineConfig, _stage: str = stage) -> None:
        run_stage(_stage, config)
        click.echo(f"{_stage}: done (outputs in {config.output_dir})")


for _name in STAGE_ORDER:
    _make_stage_command(_name)


@cli.command(name="run", help="Run all stages in order.")
@click.pass_obj
def run_command(config: PipelineConfig) -> None:
    run_pipeline(config)
    click.echo(f"run: done (outputs in {config.output_dir})")
    for name in ("variables.csv", "report.txt", "report.json", "bundle_meta.json"):
        path = Path(config.output_dir) / name
        if path.exists():
            click.echo(f"  {path}")


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, PipelineStageError):
        return _exit_code(exc.cause)
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, FetchExhaustedError):
        return EXIT_NETWORK
    if isinstance(exc, (DataError, ValueError, KeyError, ArithmeticError, OSError)):
        return EXIT_DATA
    return 1


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point mapping domain errors to documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except (PipelineStageError, ConfigError, FetchExhaustedError, DataError,
            ValueError, KeyError, ArithmeticError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return _exit_code(exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
