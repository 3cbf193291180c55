"""
Validate command for netspec CLI.

Checks connectivity, the node cap and that W is zero between non-neighbors.
Violations are listed and the command exits with VALIDATION_ERROR.
"""

from __future__ import annotations

from typing import Optional

import typer

from ..codes import ExitCode
from ..pipeline import validate_fixture, validate_inputs
from .common import CONFIG_HELP, fail, init_settings, load_config_ref, load_fixture_ref, require_one
from .output import get_output_manager


def _problems(report: dict) -> list[str]:
    problems = [
        f"w[{i},{j}] is nonzero but {{{i},{j}}} is not an edge"
        for i, j in report["assumption1_violations"]
    ]
    problems += [
        f"perturbed w[{i},{j}] is nonzero but {{{i},{j}}} is not an edge"
        for i, j in report.get("perturbed_assumption1_violations", [])
    ]
    if report.get("within_max_nodes") is False:
        problems.append(f"{report['n']} nodes exceeds numerics.max_nodes")
    return problems


def validate_command(
    ctx: typer.Context,
    fixture: Optional[str] = typer.Option(None, "--fixture", "-f", help="Fixture path or shipped name"),
    config: Optional[str] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    json_output: bool = typer.Option(False, "--json", help="Output in JSON format"),
) -> None:
    """Check the graph and the zero pattern of W."""
    try:
        settings = init_settings(ctx)
        source = require_one(fixture=fixture, config=config)
        if source == "fixture":
            report = validate_fixture(load_fixture_ref(fixture), settings)
        else:
            report = validate_inputs(load_config_ref(config), settings)
        problems = _problems(report)
        report["valid"] = not problems

        content = (
            "# Validation\n\n"
            f"- Nodes: {report['n']}\n"
            f"- Edges: {len(report['edges'])}\n"
            f"- Connected: {'yes' if report['connected'] else 'no'}\n"
            f"- Cyclic (empirical): {'yes' if report['cyclic'] else 'no'}\n\n"
        )
        if problems:
            content += "## Violations\n\n" + "".join(f"- {p}\n" for p in problems)
        else:
            content += "No violations found.\n"
        get_output_manager().print_markdown(content, json_data=report, json_output=json_output)
        if problems:
            raise typer.Exit(ExitCode.VALIDATION_ERROR)
    except typer.Exit:
        raise
    except Exception as e:
        fail(e)
