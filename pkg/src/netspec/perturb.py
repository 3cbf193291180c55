"""
Decentralized random perturbation of W for nodes that cannot assume W is cyclic.

Every node adds independent U[-a, a] noise to its diagonal entry and to each of
its edge entries; off-pattern zeros stay exactly zero. The perturbed Krylov
matrix is then nonsingular with probability one, at the price of estimating
the spectrum of a slightly different matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .graph import WAssignment
from .linalg import DEFAULT_RANK_TOL, condition_estimate, krylov_matrix, rank
from .logging import get_logger
from .spectrum import match_spectra, oracle_spectrum
from .stage1 import init_y0
from .utils import RootFindingError, ValidationError

logger = get_logger(__name__)


@dataclass(frozen=True)
class PerturbationSpec:
    magnitude: float
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not (self.magnitude > 0 and math.isfinite(self.magnitude)):
            raise ValidationError(
                f"perturbation magnitude must be positive, got {self.magnitude}"
            )


def perturb_w(wbar: WAssignment, spec: PerturbationSpec) -> WAssignment:
    """w_ii += U[-a, a] and w_ij += U[-a, a] for each neighbor j.

    Draws are taken node by node, diagonal first, neighbors ascending, so one
    seed reproduces what every node would have drawn on its own.
    """
    rng = np.random.default_rng(spec.seed)
    a = spec.magnitude
    w = np.array(wbar.w, dtype=np.float64)
    for i in wbar.graph.nodes:
        w[i - 1, i - 1] += rng.uniform(-a, a)
        for j in wbar.graph.neighbors(i):
            w[i - 1, j - 1] += rng.uniform(-a, a)
    return WAssignment(wbar.graph, w)


@dataclass(frozen=True)
class SweepRow:
    magnitude: float
    trial: int
    rank: int
    condition: float
    spectrum_error: float


@dataclass(frozen=True)
class SweepStats:
    magnitude: float
    trials: int
    nonsingular_fraction: float
    median_spectrum_error: float
    median_condition: float


@dataclass
class SweepResult:
    size: int
    rows: List[SweepRow] = field(default_factory=list)

    def stats(self) -> List[SweepStats]:
        by_magnitude: Dict[float, List[SweepRow]] = {}
        for row in self.rows:
            by_magnitude.setdefault(row.magnitude, []).append(row)
        out = []
        for a, rows in by_magnitude.items():
            full = sum(1 for r in rows if r.rank == self.size)
            out.append(
                SweepStats(
                    magnitude=a,
                    trials=len(rows),
                    nonsingular_fraction=full / len(rows),
                    median_spectrum_error=float(np.nanmedian([r.spectrum_error for r in rows]))
                    if any(math.isfinite(r.spectrum_error) for r in rows)
                    else math.nan,
                    median_condition=float(np.median([r.condition for r in rows])),
                )
            )
        return out

    def stats_for(self, magnitude: float) -> SweepStats:
        for s in self.stats():
            if s.magnitude == magnitude:
                return s
        raise KeyError(magnitude)


def perturbation_sweep(
    wbar: WAssignment,
    magnitudes: Sequence[float],
    trials: int,
    seed: Optional[int] = None,
    control: bool = True,
    tol: float = DEFAULT_RANK_TOL,
    on_trial: Optional[Callable[[float, int], None]] = None,
) -> SweepResult:
    """Perturb, draw y0 and record Krylov rank, conditioning and spectrum error.

    With ``control`` an a = 0 row set is added that skips the perturbation.
    Every (magnitude, trial) gets its own child seed, so results do not depend
    on evaluation order.
    """
    magnitudes = [float(a) for a in magnitudes]
    if not magnitudes:
        raise ValidationError("perturbation sweep needs at least one magnitude")
    if any(not a > 0 for a in magnitudes):
        raise ValidationError(f"magnitudes must be positive, got {magnitudes}")
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")

    reference = oracle_spectrum(wbar.w)
    levels = ([0.0] if control else []) + magnitudes
    children = np.random.SeedSequence(seed).spawn(len(levels))

    result = SweepResult(size=wbar.n)
    for a, level_seq in zip(levels, children):
        for trial, trial_seq in enumerate(level_seq.spawn(trials)):
            w_seed, y_seed = (
                int(s.generate_state(1)[0]) for s in trial_seq.spawn(2)
            )
            wa = wbar if a == 0.0 else perturb_w(wbar, PerturbationSpec(a, w_seed))
            y0 = init_y0(wa.n, y_seed)
            k = krylov_matrix(wa.w, y0)
            try:
                err = match_spectra(oracle_spectrum(wa.w), reference).max_abs_error
            except RootFindingError as e:
                logger.warning(
                    f"Spectrum unavailable for a={a:g}, trial {trial}: {e.message}",
                    stage="sweep",
                )
                err = math.nan
            result.rows.append(
                SweepRow(
                    magnitude=a,
                    trial=trial,
                    rank=rank(k, tol),
                    condition=condition_estimate(k, tol),
                    spectrum_error=err,
                )
            )
            if on_trial is not None:
                on_trial(a, trial)

    for s in result.stats():
        logger.debug(
            f"a={s.magnitude:g}: nonsingular {s.nonsingular_fraction:.2f}, "
            f"median error {s.median_spectrum_error:.3g}",
            stage="sweep",
        )
    return result
