"""
Run command for netspec CLI.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

import typer

from ..pipeline import run_experiment
from ..progress import NetspecProgress
from .common import CONFIG_HELP, fail, init_settings, load_config_ref
from .output import format_complex, format_float, get_output_manager


def _summary_markdown(report: dict, artifacts: dict) -> str:
    summary = report["summary"]
    output = get_output_manager()
    refs = sorted(k for k in summary if k.startswith("max_spectrum_error_vs_"))

    rows = [
        ["Scenario", report["scenario"]],
        ["Nodes", report["n"]],
        ["Rank of A", report["stage1"]["rank"]],
        ["Condition of A", format_float(report["stage1"]["condition"])],
        ["Stop reason", summary["stop_reason"]],
        ["Final time", f"{summary['final_time']:g}"],
        ["Final V", format_float(summary["v"]["final"])],
        ["Decay slope", format_float(summary["decay_slope"])],
        ["Max coefficient error", format_float(summary["max_coefficient_error"])],
    ]
    rows += [
        [f"Max spectrum error vs {key.removeprefix('max_spectrum_error_vs_')}", format_float(summary[key])]
        for key in refs
    ]
    content = output.table_markdown(f"Run {report['name']}", ["Metric", "Value"], rows)

    content += output.table_markdown(
        "Oracle spectrum",
        ["#", "Eigenvalue"],
        [[k + 1, format_complex(z)] for k, z in enumerate(report["oracle"]["spectrum"])],
        level=2,
    )
    if artifacts:
        content += "## Artifacts\n\n" + "".join(
            f"- {name}: `{path}`\n" for name, path in sorted(artifacts.items())
        )
    return content


def run_command(
    ctx: typer.Context,
    config: str = typer.Option(..., "--config", "-c", help=CONFIG_HELP),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Directory for the run artifacts"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override every seed in the config"),
    json_output: bool = typer.Option(False, "--json", help="Print the run report as JSON"),
    no_progress: bool = typer.Option(False, "--no-progress", help="Hide the progress bar"),
) -> None:
    """Run the full pipeline: perturb (cyclic-unknown), Stage 1, Stage 2, root trace."""
    try:
        settings = init_settings(ctx)
        cfg = load_config_ref(config, seed)
        progress = NetspecProgress(enabled=not no_progress)
        result = run_experiment(cfg, settings, out_dir=out, progress=progress)
        get_output_manager().print_markdown(
            _summary_markdown(result.report, result.artifacts),
            json_data=result.report,
            json_output=json_output,
        )
    except typer.Exit:
        raise
    except Exception as e:
        fail(e)
