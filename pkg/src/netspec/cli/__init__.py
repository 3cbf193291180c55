"""
CLI package for netspec.

Commands: ``run`` (full two-stage experiment), ``oracle`` (reference answers),
``sweep`` (perturbation magnitude study) and ``validate`` (graph and zero-pattern
checks).
"""

from __future__ import annotations

from importlib import metadata
from pathlib import Path
from typing import Optional

import typer

from ..presets import list_presets
from .oracle import oracle_command
from .run import run_command
from .sweep import sweep_command
from .validate import validate_command

try:
    __version__ = metadata.version("netspec")
except metadata.PackageNotFoundError:
    from .. import __version__

PRESETS_EPILOG = "Presets: " + "; ".join(
    f"{p.name} ({p.description})" for p in list_presets().values()
)

app = typer.Typer(no_args_is_help=True, epilog=PRESETS_EPILOG)

app.command("oracle", help="Reference coefficients and spectrum of W")(oracle_command)
app.command("run", help="Run the two-stage spectrum estimation experiment")(run_command)
app.command("sweep", help="Sweep perturbation magnitudes over W")(sweep_command)
app.command("validate", help="Check the graph and the zero pattern of W")(validate_command)


@app.callback(invoke_without_command=True)
def main_callback(
    ctx: typer.Context,
    version: bool = typer.Option(False, "--version", help="Show version and exit"),
    settings: Optional[Path] = typer.Option(
        None, "--settings", help="Settings YAML file (default: $NETSPEC_CONFIG, then XDG)"
    ),
    log_level: Optional[str] = typer.Option(
        None, "--log-level", help="Override logging level (DEBUG, INFO, WARNING, ERROR)"
    ),
):
    """netspec - distributed estimation of graph matrix spectra."""
    if version:
        typer.echo(f"netspec v{__version__}")
        raise typer.Exit()
    obj = ctx.ensure_object(dict)
    obj["settings_path"] = settings
    obj["log_level"] = log_level


def main():
    """Main entry point for CLI."""
    app()


__all__ = ["app", "main"]
