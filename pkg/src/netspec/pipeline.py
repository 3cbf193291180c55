"""
End-to-end experiment runner.

``run_experiment`` executes: perturb W (cyclic-unknown only), pick y0, Stage 1,
Stage 2 with the root trace, then writes the CSV artifacts and a deterministic
``report.json``. ``oracle_report``, ``run_sweep`` and ``validate_inputs`` back
the other CLI commands.
"""

from __future__ import annotations

import json
import math
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .config import Settings, get_output_path
from .consensus import ConsensusParams, FlowTrace, decay_slope, integrate
from .fixtures import Fixture, load_fixture
from .graph import Graph, WAssignment, WKind, build_w, generate_graph, validate_assumption1
from .linalg import (
    CharPoly,
    cayley_hamilton_residual,
    charpoly_oracle,
    condition_estimate,
    is_cyclic,
    rank,
    solve_dense,
)
from .logging import get_logger
from .perturb import PerturbationSpec, SweepResult, perturb_w, perturbation_sweep
from .progress import NetspecProgress
from .runconfig import RunConfig
from .spectrum import SpectrumTrace, find_roots, match_spectra, spectrum_trace
from .stage1 import Stage1Result, init_y0, run_stage1
from .traces import write_flow_trace, write_spectrum_trace, write_stage1_trace, write_sweep
from .utils import ConfigError, SingularMatrixError, ValidationError

logger = get_logger(__name__)


def _complex_list(values) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in values]


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


@dataclass
class ResolvedInputs:
    graph: Graph
    wbar: WAssignment
    fixture: Optional[Fixture] = None


def resolve_inputs(cfg: RunConfig, settings: Settings, check: bool = True) -> ResolvedInputs:
    """Load or generate the graph and the unperturbed W for ``cfg``.

    With ``check`` the node cap and the zero pattern of W are enforced.
    """
    source = cfg.graph
    fixture = None
    if source.fixture is not None:
        fixture = load_fixture(source.fixture)
        graph = fixture.graph
        if cfg.w.kind is None:
            wbar = fixture.w
        else:
            wbar = build_w(graph, cfg.w.kind, cfg.w.seed)
    else:
        graph = generate_graph(source.kind, source.nodes, source.edge_prob, source.seed)
        wbar = build_w(graph, cfg.w.kind or WKind.RANDOM_WEIGHTS, cfg.w.seed)

    if check and graph.node_count > settings.numerics.max_nodes:
        raise ConfigError(
            f"{graph.node_count} nodes exceeds the desk-scale limit of {settings.numerics.max_nodes}",
            suggestion="Raise numerics.max_nodes in the settings file if you accept the conditioning risk",
        )
    violations = validate_assumption1(wbar)
    if check and violations:
        raise ValidationError(
            f"W has nonzero entries between non-neighbors: {violations}",
            suggestion="Zero every w_ij whose {i,j} is not an edge",
        )
    return ResolvedInputs(graph=graph, wbar=wbar, fixture=fixture)


def select_w(cfg: RunConfig, inputs: ResolvedInputs) -> WAssignment:
    """The matrix the nodes actually iterate with."""
    if cfg.scenario == "cyclic-known":
        return inputs.wbar
    spec = cfg.perturbation
    fixture = inputs.fixture
    if (
        spec.use_fixture
        and fixture is not None
        and fixture.perturbed_w is not None
        and cfg.w.kind is None
    ):
        wa = fixture.perturbed_w
        violations = validate_assumption1(wa)
        if violations:
            raise ValidationError(f"fixture perturbed W breaks the zero pattern: {violations}")
        drift = float(np.max(np.abs(wa.w - inputs.wbar.w)))
        if drift > spec.magnitude + np.spacing(spec.magnitude):
            logger.warning(
                f"Fixture perturbation {drift:.3g} exceeds a={spec.magnitude:g}",
                stage="perturb",
            )
        return wa
    return perturb_w(inputs.wbar, PerturbationSpec(spec.magnitude, spec.seed))


def select_y0(cfg: RunConfig, inputs: ResolvedInputs) -> np.ndarray:
    fixture = inputs.fixture
    if cfg.use_fixture_y0 and fixture is not None and fixture.y0 is not None:
        return fixture.y0
    return init_y0(inputs.graph.node_count, cfg.y0_seed)


@dataclass
class RunResult:
    config: RunConfig
    w: WAssignment
    wbar: WAssignment
    y0: np.ndarray
    stage1: Stage1Result
    oracle: CharPoly
    oracle_spectrum: np.ndarray
    flow: FlowTrace
    spectra: SpectrumTrace
    report: Dict[str, Any]
    artifacts: Dict[str, Path] = field(default_factory=dict)


def _node_reports(
    flow: FlowTrace,
    spectra: SpectrumTrace,
    x_star: np.ndarray,
    references: Dict[str, Optional[np.ndarray]],
) -> List[Dict[str, Any]]:
    final = flow.estimates[-1]
    nodes = []
    for i in range(final.shape[0]):
        node = i + 1
        entry: Dict[str, Any] = {
            "node": node,
            "coefficients": [float(v) for v in final[i]],
            "coefficient_error": float(np.max(np.abs(final[i] - x_star))),
        }
        est = spectra.final(node)
        if est is not None and est.time == flow.times[-1]:
            entry["spectrum"] = _complex_list(est.roots)
            for key, ref in references.items():
                if ref is not None:
                    entry[f"spectrum_error_vs_{key}"] = match_spectra(est.roots, ref).max_abs_error
        else:
            entry["spectrum"] = None
        nodes.append(entry)
    return nodes


def run_experiment(
    cfg: RunConfig,
    settings: Settings,
    out_dir: Optional[Path] = None,
    progress: Optional[NetspecProgress] = None,
    write: bool = True,
) -> RunResult:
    """Run one full experiment and write its artifacts to ``out_dir``."""
    numerics = settings.numerics
    started = time.perf_counter()
    logger.run_start(cfg.name, cfg.scenario)

    inputs = resolve_inputs(cfg, settings)
    graph = inputs.graph
    n = graph.node_count
    w = select_w(cfg, inputs)
    y0 = select_y0(cfg, inputs)

    stage1 = run_stage1(w, y0)
    a, b = stage1.matrix()
    a_rank = rank(a, numerics.rank_tol)
    condition = condition_estimate(a, numerics.rank_tol)
    logger.stage_complete(
        cfg.name, "stage1", rounds=n, messages=stage1.messages, rank=a_rank, condition=condition
    )
    if a_rank < n:
        raise SingularMatrixError(
            f"Stage-1 matrix A is singular (rank {a_rank} of {n})",
            rank=a_rank,
            size=n,
            suggestion=(
                "W may not be cyclic; use scenario 'cyclic-unknown' with a perturbation"
                if cfg.scenario == "cyclic-known"
                else "Try another y0 or perturbation seed"
            ),
        )

    oracle = charpoly_oracle(w.w)
    reference = find_roots(oracle, numerics.root_max_iter, numerics.root_pair_tol)
    x_solve = solve_dense(a, b, numerics.rank_tol)

    consensus = cfg.consensus.resolve(settings.consensus)
    params = ConsensusParams.uniform(
        graph,
        alpha=consensus.alpha,
        beta=consensus.beta,
        step=consensus.step,
        t_max=consensus.t_max,
        v_tol=consensus.v_tol,
        sample_every=consensus.sample_every,
        propagator=consensus.propagator,
    )
    flow_ctx = progress.flow_task(params.t_max) if progress else nullcontext(None)
    with flow_ctx as on_sample:
        flow, _ = integrate(stage1.equations, graph, params, on_sample=on_sample)
    logger.stage_complete(
        cfg.name, "stage2", samples=len(flow), stop_reason=flow.stop_reason, final_v=float(flow.v[-1])
    )

    spectra = spectrum_trace(flow, numerics.root_max_iter, numerics.root_pair_tol)
    logger.stage_complete(cfg.name, "spectrum", gaps=len(spectra.gaps))

    references: Dict[str, Optional[np.ndarray]] = {"oracle": reference}
    report: Dict[str, Any] = {
        "name": cfg.name,
        "scenario": cfg.scenario,
        "n": n,
        "edges": [list(e) for e in graph.sorted_edges()],
        "w": w.w.tolist(),
        "y0": [float(v) for v in y0],
        "stage1": {
            "rank": a_rank,
            "condition": _finite_or_none(condition),
            "messages": stage1.messages,
        },
        "oracle": {
            "coefficients": [float(v) for v in oracle.coeffs],
            "spectrum": _complex_list(reference),
            "solve_dense_gap": float(np.max(np.abs(x_solve - oracle.coeffs))),
        },
        "consensus": consensus.model_dump(),
    }

    fixture = inputs.fixture
    if cfg.scenario == "cyclic-unknown":
        wbar_poly = charpoly_oracle(inputs.wbar.w)
        wbar_spectrum = find_roots(wbar_poly, numerics.root_max_iter, numerics.root_pair_tol)
        references["unperturbed"] = wbar_spectrum
        report["unperturbed"] = {
            "w": inputs.wbar.w.tolist(),
            "coefficients": [float(v) for v in wbar_poly.coeffs],
            "spectrum": _complex_list(wbar_spectrum),
            "perturbation_magnitude": cfg.perturbation.magnitude,
        }
        if fixture is not None and fixture.expected_perturbed_spectrum is not None:
            references["expected"] = fixture.expected_perturbed_spectrum
    elif fixture is not None and fixture.expected_spectrum is not None:
        references["expected"] = fixture.expected_spectrum

    nodes = _node_reports(flow, spectra, oracle.coeffs, references)
    try:
        slope = decay_slope(flow, oracle.coeffs)
    except ValidationError:
        slope = None
    report["nodes"] = nodes
    report["summary"] = {
        "stop_reason": flow.stop_reason,
        "final_time": float(flow.times[-1]),
        "v": flow.v_summary(),
        "decay_slope": slope,
        "max_coefficient_error": max(e["coefficient_error"] for e in nodes),
        "spectrum_gaps": len(spectra.gaps),
    }
    for key in references:
        errors = [e.get(f"spectrum_error_vs_{key}") for e in nodes]
        report["summary"][f"max_spectrum_error_vs_{key}"] = (
            max(errors) if all(v is not None for v in errors) else None
        )

    result = RunResult(
        config=cfg,
        w=w,
        wbar=inputs.wbar,
        y0=y0,
        stage1=stage1,
        oracle=oracle,
        oracle_spectrum=reference,
        flow=flow,
        spectra=spectra,
        report=report,
    )
    if write:
        result.artifacts = write_artifacts(result, _run_dir(cfg, settings, out_dir))
    logger.run_complete(cfg.name, time.perf_counter() - started, stop_reason=flow.stop_reason)
    return result


def _run_dir(cfg: RunConfig, settings: Settings, out_dir: Optional[Path]) -> Path:
    if out_dir is not None:
        return Path(out_dir)
    if cfg.output_dir is not None:
        return Path(cfg.output_dir).expanduser()
    return get_output_path(settings) / cfg.name


def write_artifacts(result: RunResult, out_dir: Path) -> Dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    return {
        "stage1_trace": write_stage1_trace(out_dir / "stage1_trace.csv", result.stage1.trace),
        "flow_trace": write_flow_trace(out_dir / "flow_trace.csv", result.flow),
        "spectrum_trace": write_spectrum_trace(out_dir / "spectrum_trace.csv", result.spectra),
        "report": report_path,
    }


def oracle_report(
    wa: WAssignment, settings: Settings, seed: Optional[int] = None
) -> Dict[str, Any]:
    """Reference coefficients and spectrum without running the distributed stages."""
    numerics = settings.numerics
    poly = charpoly_oracle(wa.w)
    roots = find_roots(poly, numerics.root_max_iter, numerics.root_pair_tol)
    roundtrip = CharPoly.from_roots(roots)
    return {
        "n": wa.n,
        "coefficients": [float(v) for v in poly.coeffs],
        "spectrum": _complex_list(roots),
        "cayley_hamilton_residual": cayley_hamilton_residual(wa.w, poly),
        "roundtrip_error": float(np.max(np.abs(roundtrip.coeffs - poly.coeffs))),
        "cyclic": is_cyclic(wa.w, seed=seed, tol=numerics.rank_tol),
    }


def run_sweep(
    cfg: RunConfig,
    settings: Settings,
    magnitudes: Optional[Sequence[float]] = None,
    trials: Optional[int] = None,
    seed: Optional[int] = None,
    out_dir: Optional[Path] = None,
    progress: Optional[NetspecProgress] = None,
    write: bool = True,
) -> tuple[SweepResult, Optional[Path]]:
    """Perturbation sweep over the config's unperturbed W."""
    magnitudes = list(cfg.sweep.magnitudes if magnitudes is None else magnitudes)
    if not magnitudes:
        raise ConfigError("Sweep needs at least one magnitude", suggestion="Pass -a/--magnitude")
    if any(a <= 0 for a in magnitudes):
        raise ConfigError(f"Sweep magnitudes must be positive, got {magnitudes}")
    trials = cfg.sweep.trials if trials is None else trials
    seed = cfg.sweep.seed if seed is None else seed

    inputs = resolve_inputs(cfg, settings)
    levels = len(magnitudes) + (1 if cfg.sweep.control else 0)
    ctx = progress.sweep_task(levels * trials) if progress else nullcontext(None)
    with ctx as on_trial:
        sweep = perturbation_sweep(
            inputs.wbar,
            magnitudes,
            trials,
            seed=seed,
            control=cfg.sweep.control,
            tol=settings.numerics.rank_tol,
            on_trial=on_trial,
        )
    path = None
    if write:
        target = _run_dir(cfg, settings, out_dir)
        path = write_sweep(target / "sweep.csv", sweep)
    return sweep, path


def validate_inputs(cfg: RunConfig, settings: Settings) -> Dict[str, Any]:
    """Graph and zero-pattern checks for a run config.

    A disconnected or malformed graph raises; zero-pattern violations are data.
    """
    inputs = resolve_inputs(cfg, settings, check=False)
    graph = inputs.graph
    report: Dict[str, Any] = {
        "n": graph.node_count,
        "edges": [list(e) for e in graph.sorted_edges()],
        "connected": True,
        "within_max_nodes": graph.node_count <= settings.numerics.max_nodes,
        "assumption1_violations": [list(v) for v in validate_assumption1(inputs.wbar)],
        "cyclic": is_cyclic(inputs.wbar.w, seed=0, tol=settings.numerics.rank_tol),
    }
    if cfg.scenario == "cyclic-unknown":
        w = select_w(cfg, inputs)
        report["perturbed_assumption1_violations"] = [list(v) for v in validate_assumption1(w)]
    return report


def validate_fixture(fixture: Fixture, settings: Settings) -> Dict[str, Any]:
    """Zero-pattern checks for a fixture; violations are returned, not raised."""
    report: Dict[str, Any] = {
        "n": fixture.graph.node_count,
        "edges": [list(e) for e in fixture.graph.sorted_edges()],
        "connected": True,
        "assumption1_violations": [list(v) for v in validate_assumption1(fixture.w)],
        "cyclic": is_cyclic(fixture.w.w, seed=0, tol=settings.numerics.rank_tol),
    }
    if fixture.perturbed_w is not None:
        report["perturbed_assumption1_violations"] = [
            list(v) for v in validate_assumption1(fixture.perturbed_w)
        ]
    return report
