"""
Sweep command for netspec CLI.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Optional

import typer

from ..pipeline import run_sweep
from ..progress import NetspecProgress
from .common import CONFIG_HELP, fail, init_settings, load_config_ref
from .output import finite_or_none, format_float, get_output_manager


def sweep_command(
    ctx: typer.Context,
    config: str = typer.Option(..., "--config", "-c", help=CONFIG_HELP),
    magnitude: Optional[List[float]] = typer.Option(
        None, "--magnitude", "-a", help="Perturbation magnitude (repeatable)"
    ),
    trials: Optional[int] = typer.Option(None, "--trials", "-t", min=1, help="Trials per magnitude"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override every seed in the config"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Directory for sweep.csv"),
    json_output: bool = typer.Option(False, "--json", help="Output statistics as JSON"),
    no_progress: bool = typer.Option(False, "--no-progress", help="Hide the progress bar"),
) -> None:
    """Draw perturbed W at each magnitude and record rank, condition and spectrum error."""
    try:
        settings = init_settings(ctx)
        cfg = load_config_ref(config, seed)
        sweep, path = run_sweep(
            cfg,
            settings,
            magnitudes=magnitude or None,
            trials=trials,
            out_dir=out,
            progress=NetspecProgress(enabled=not no_progress),
        )
        stats = sweep.stats()

        data = {
            "name": cfg.name,
            "sweep_csv": str(path) if path else None,
            "levels": [
                {
                    "a": s.magnitude,
                    "trials": s.trials,
                    "nonsingular_fraction": s.nonsingular_fraction,
                    "median_condition": finite_or_none(s.median_condition),
                    "median_spectrum_error": finite_or_none(s.median_spectrum_error),
                }
                for s in stats
            ],
        }
        output = get_output_manager()
        content = output.table_markdown(
            f"Perturbation sweep {cfg.name}",
            ["a", "Trials", "Nonsingular", "Median cond(A)", "Median error"],
            [
                [
                    f"{s.magnitude:g}",
                    s.trials,
                    f"{s.nonsingular_fraction:.2f}",
                    format_float(s.median_condition),
                    format_float(s.median_spectrum_error),
                ]
                for s in stats
            ],
        )
        if path:
            content += f"Rows written to `{path}`\n"
        output.print_markdown(content, json_data=data, json_output=json_output)
    except typer.Exit:
        raise
    except Exception as e:
        fail(e)
