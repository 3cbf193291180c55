"""
Oracle command for netspec CLI.

Prints the characteristic polynomial coefficients and the spectrum of W from
dense linear algebra, without running the distributed stages.
"""

from __future__ import annotations

from typing import Optional

import typer

from ..graph import GraphKind, WAssignment, WKind, build_w, generate_graph
from ..pipeline import oracle_report, resolve_inputs, select_w
from ..utils import ConfigError
from .common import CONFIG_HELP, fail, init_settings, load_config_ref, load_fixture_ref, require_one
from .output import format_complex, format_float, get_output_manager


def _select_source(
    settings,
    fixture: Optional[str],
    config: Optional[str],
    graph: Optional[GraphKind],
    nodes: Optional[int],
    w_kind: WKind,
    edge_prob: Optional[float],
    perturbed: bool,
    seed: Optional[int],
) -> WAssignment:
    source = require_one(fixture=fixture, config=config, graph=graph)
    if source == "fixture":
        fx = load_fixture_ref(fixture)
        if not perturbed:
            return fx.w
        if fx.perturbed_w is None:
            raise ConfigError(
                f"Fixture {fx.name} has no perturbed W",
                suggestion="Drop --perturbed or use a cyclic-unknown fixture",
            )
        return fx.perturbed_w
    if source == "config":
        cfg = load_config_ref(config, seed)
        inputs = resolve_inputs(cfg, settings)
        return select_w(cfg, inputs) if perturbed else inputs.wbar

    if nodes is None:
        raise ConfigError("--graph needs --nodes")
    if nodes > settings.numerics.max_nodes:
        raise ConfigError(
            f"{nodes} nodes exceeds the desk-scale limit of {settings.numerics.max_nodes}",
            suggestion="Raise numerics.max_nodes in the settings file",
        )
    g = generate_graph(graph, nodes, edge_prob, seed)
    return build_w(g, w_kind, None if seed is None else seed + 1)


def oracle_command(
    ctx: typer.Context,
    fixture: Optional[str] = typer.Option(None, "--fixture", "-f", help="Fixture path or shipped name"),
    config: Optional[str] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    graph: Optional[GraphKind] = typer.Option(None, "--graph", "-g", help="Generate a graph of this kind"),
    nodes: Optional[int] = typer.Option(None, "--nodes", "-n", min=2, help="Node count for --graph"),
    w_kind: WKind = typer.Option(WKind.RANDOM_WEIGHTS, "--w-kind", help="W construction for --graph"),
    edge_prob: Optional[float] = typer.Option(None, "--edge-prob", help="Edge probability for erdos_renyi"),
    perturbed: bool = typer.Option(
        False, "--perturbed", help="Use the perturbed W of a fixture or cyclic-unknown config"
    ),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for generation and cyclic test"),
    json_output: bool = typer.Option(False, "--json", help="Output in JSON format"),
) -> None:
    """Print the oracle coefficients and spectrum of W."""
    try:
        settings = init_settings(ctx)
        wa = _select_source(
            settings, fixture, config, graph, nodes, w_kind, edge_prob, perturbed, seed
        )
        report = oracle_report(wa, settings, seed=seed)

        output = get_output_manager()
        content = output.table_markdown(
            "Characteristic polynomial",
            ["l", "x^(l)"],
            [[ell, f"{c:.6g}"] for ell, c in enumerate(report["coefficients"])],
            subtitle=f"det(lambda I - W) = lambda^{report['n']} + sum x^(l) lambda^l",
        )
        content += output.table_markdown(
            "Spectrum",
            ["#", "Eigenvalue"],
            [[k + 1, format_complex(z)] for k, z in enumerate(report["spectrum"])],
            level=2,
        )
        content += (
            f"- Cayley-Hamilton residual: {format_float(report['cayley_hamilton_residual'])}\n"
            f"- Root round-trip error: {format_float(report['roundtrip_error'])}\n"
            f"- Cyclic (empirical): {'yes' if report['cyclic'] else 'no'}\n"
        )
        output.print_markdown(content, json_data=report, json_output=json_output)
    except typer.Exit:
        raise
    except Exception as e:
        fail(e)
