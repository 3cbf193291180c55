"""
CSV artifacts and their readers.

Schemas (one header row, floats written with ``repr`` so they re-parse exactly):

- stage-1 trace:  node_id, t, y_value
- flow trace:     t, node_id, coeff_index, estimate, V
- spectrum trace: t, node_id, root_index, re, im
- sweep report:   a, trial, rank, condition, spectrum_error
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from .consensus import FlowTrace
from .perturb import SweepResult, SweepRow
from .spectrum import SpectrumEstimate, SpectrumTrace
from .utils import ValidationError

STAGE1_HEADER = ["node_id", "t", "y_value"]
FLOW_HEADER = ["t", "node_id", "coeff_index", "estimate", "V"]
SPECTRUM_HEADER = ["t", "node_id", "root_index", "re", "im"]
SWEEP_HEADER = ["a", "trial", "rank", "condition", "spectrum_error"]


def _open_writer(path: Path, header: List[str]):
    path.parent.mkdir(parents=True, exist_ok=True)
    f = open(path, "w", newline="")
    writer = csv.writer(f)
    writer.writerow(header)
    return f, writer


def _rows(path: Path, header: List[str]) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != header:
            raise ValidationError(
                f"{path.name}: unexpected columns {reader.fieldnames}",
                expected_format=",".join(header),
            )
        return list(reader)


def write_stage1_trace(path: Path, trace: np.ndarray) -> Path:
    """``trace[t, i-1]`` is y_i(t)."""
    f, writer = _open_writer(path, STAGE1_HEADER)
    with f:
        rounds, n = trace.shape
        for i in range(n):
            for t in range(rounds):
                writer.writerow([i + 1, t, repr(float(trace[t, i]))])
    return path


def read_stage1_trace(path: Path) -> np.ndarray:
    rows = _rows(path, STAGE1_HEADER)
    n = max(int(r["node_id"]) for r in rows)
    rounds = max(int(r["t"]) for r in rows) + 1
    trace = np.full((rounds, n), np.nan)
    for r in rows:
        trace[int(r["t"]), int(r["node_id"]) - 1] = float(r["y_value"])
    return trace


def write_flow_trace(path: Path, flow: FlowTrace) -> Path:
    f, writer = _open_writer(path, FLOW_HEADER)
    with f:
        for k, t in enumerate(flow.times):
            v = repr(float(flow.v[k]))
            x = flow.estimates[k]
            for i in range(x.shape[0]):
                for ell in range(x.shape[1]):
                    writer.writerow([repr(float(t)), i + 1, ell, repr(float(x[i, ell])), v])
    return path


def read_flow_trace(path: Path) -> FlowTrace:
    rows = _rows(path, FLOW_HEADER)
    n = max(int(r["node_id"]) for r in rows)
    times: List[float] = []
    values: List[float] = []
    index: Dict[float, int] = {}
    for r in rows:
        t = float(r["t"])
        if t not in index:
            index[t] = len(times)
            times.append(t)
            values.append(float(r["V"]))
    estimates = np.full((len(times), n, n), np.nan)
    for r in rows:
        estimates[index[float(r["t"])], int(r["node_id"]) - 1, int(r["coeff_index"])] = float(
            r["estimate"]
        )
    return FlowTrace(times=np.array(times), estimates=estimates, v=np.array(values))


def write_spectrum_trace(path: Path, spectra: SpectrumTrace) -> Path:
    f, writer = _open_writer(path, SPECTRUM_HEADER)
    with f:
        for est in spectra.estimates:
            for k, z in enumerate(est.roots):
                writer.writerow(
                    [repr(float(est.time)), est.node, k, repr(float(z.real)), repr(float(z.imag))]
                )
    return path


def read_spectrum_trace(path: Path) -> SpectrumTrace:
    rows = _rows(path, SPECTRUM_HEADER)
    grouped: Dict[Tuple[float, int], List[Tuple[int, complex]]] = {}
    for r in rows:
        key = (float(r["t"]), int(r["node_id"]))
        grouped.setdefault(key, []).append(
            (int(r["root_index"]), complex(float(r["re"]), float(r["im"])))
        )
    result = SpectrumTrace()
    for (t, node), roots in grouped.items():
        roots.sort()
        result.estimates.append(
            SpectrumEstimate(node, t, np.array([z for _, z in roots], dtype=np.complex128))
        )
    return result


def write_sweep(path: Path, sweep: SweepResult) -> Path:
    f, writer = _open_writer(path, SWEEP_HEADER)
    with f:
        for row in sweep.rows:
            writer.writerow(
                [
                    repr(row.magnitude),
                    row.trial,
                    row.rank,
                    repr(row.condition),
                    repr(row.spectrum_error),
                ]
            )
    return path


def read_sweep(path: Path, size: int) -> SweepResult:
    """Read a sweep CSV; ``size`` is the node count N of the swept W."""
    return SweepResult(
        size=size,
        rows=[
            SweepRow(
                magnitude=float(r["a"]),
                trial=int(r["trial"]),
                rank=int(r["rank"]),
                condition=float(r["condition"]),
                spectrum_error=float(r["spectrum_error"]),
            )
            for r in _rows(path, SWEEP_HEADER)
        ]
    )
