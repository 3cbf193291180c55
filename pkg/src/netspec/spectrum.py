"""
Eigenvalue estimates from coefficient estimates.

Roots are found with the Aberth–Ehrlich simultaneous iteration, vectorized
over a batch of monic polynomials so that a whole flow trace (every node at
every sample) is processed at once. Emitted root sets are exactly closed under
conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .consensus import FlowTrace
from .linalg import CharPoly, ComplexVector, as_complex_vector, charpoly_oracle
from .logging import get_logger
from .utils import DimensionError, RootFindingError, ValidationError

logger = get_logger(__name__)

DEFAULT_MAX_ITER = 500
DEFAULT_PAIR_TOL = 1e-6
RESIDUAL_RTOL = 1e-8
START_ROTATION = 0.4

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SpectrumEstimate:
    node: int
    time: float
    roots: ComplexVector


@dataclass(frozen=True)
class SpectrumError:
    pairs: Tuple[Tuple[complex, complex], ...]  # (estimate, reference)
    max_abs_error: float
    mean_abs_error: float


@dataclass
class SpectrumTrace:
    estimates: List[SpectrumEstimate] = field(default_factory=list)
    gaps: List[Tuple[float, int]] = field(default_factory=list)  # (t, node)

    def final(self, node: int) -> Optional[SpectrumEstimate]:
        """Last successful estimate of ``node``."""
        for est in reversed(self.estimates):
            if est.node == node:
                return est
        return None


def _horner(desc: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate descending coefficient rows ``desc`` (B, d+1) at ``z`` (B, N)."""
    acc = np.broadcast_to(desc[:, :1], z.shape).astype(z.dtype)
    for k in range(1, desc.shape[1]):
        acc = acc * z + desc[:, k : k + 1]
    return acc


def _aberth(
    desc: np.ndarray, max_iter: int
) -> np.ndarray:
    """Run Aberth–Ehrlich on monic descending rows; returns the iterates."""
    batch, deg = desc.shape[0], desc.shape[1] - 1
    deriv = desc[:, :-1] * np.arange(deg, 0, -1, dtype=np.float64)
    magnitude = np.abs(desc)

    radius = 1.0 + np.max(np.abs(desc[:, 1:]), axis=1, initial=0.0)
    angles = 2.0 * np.pi * np.arange(deg) / deg + START_ROTATION
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    active = np.ones((batch, deg), dtype=bool)

    for _ in range(max_iter):
        rows = np.nonzero(active.any(axis=1))[0]
        if rows.size == 0:
            break
        zr = z[rows]
        p = _horner(desc[rows], zr)
        noise = 8.0 * deg * _EPS * _horner(magnitude[rows], np.abs(zr)).real
        done = np.abs(p) <= noise

        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            diff = zr[:, :, None] - zr[:, None, :]
            inv = 1.0 / diff
            inv[:, np.arange(deg), np.arange(deg)] = 0.0
            inv[~np.isfinite(inv)] = 0.0
            s = inv.sum(axis=2)
            dp = _horner(deriv[rows], zr)
            delta = p / (dp - p * s)
        delta[~np.isfinite(delta)] = 0.0

        still = active[rows] & ~done
        zr = np.where(still, zr - delta, zr)
        tiny = np.abs(delta) <= 4.0 * _EPS * np.abs(zr)
        z[rows] = zr
        active[rows] = still & ~tiny
    return z


def symmetrize_conjugates(roots: np.ndarray, pair_tol: float = DEFAULT_PAIR_TOL) -> ComplexVector:
    """Make a root set exactly conjugate-closed.

    Near-real roots become real; the remaining upper and lower half-plane roots
    are paired greedily by conjugate mismatch and replaced by exact conjugates.
    """
    out = np.array(roots, dtype=np.complex128)
    near_real = np.abs(out.imag) <= pair_tol * np.abs(out)
    out[near_real] = out[near_real].real

    upper = [k for k in range(out.size) if out[k].imag > 0]
    lower = [k for k in range(out.size) if out[k].imag < 0]
    while upper and lower:
        best = min(
            ((abs(out[u] - np.conj(out[l])), u, l) for u in upper for l in lower),
            key=lambda item: item[0],
        )
        _, u, l = best
        re = 0.5 * (out[u].real + out[l].real)
        im = 0.5 * (out[u].imag - out[l].imag)
        out[u] = complex(re, im)
        out[l] = complex(re, -im)
        upper.remove(u)
        lower.remove(l)
    # an unmatched non-real root can only be a real root pushed off the axis
    for k in upper + lower:
        out[k] = out[k].real
    return np.sort_complex(out)


def _residual_bound(coeffs: np.ndarray) -> np.ndarray:
    return RESIDUAL_RTOL * (1.0 + np.max(np.abs(coeffs), axis=-1))


def find_roots_batch(
    coeffs,
    max_iter: int = DEFAULT_MAX_ITER,
    pair_tol: float = DEFAULT_PAIR_TOL,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Roots of many monic polynomials at once.

    ``coeffs`` has shape (B, N) in ascending order without the leading 1.
    Returns (roots (B, N), ok (B,), residuals (B, N)); a row is ok when every
    root is finite and meets the residual bound.
    """
    c = np.array(coeffs, dtype=np.float64)
    if c.ndim != 2 or c.shape[1] < 1:
        raise DimensionError(f"coefficient batch must be (B, N) with N >= 1, got {c.shape}")
    batch, deg = c.shape
    finite_rows = np.all(np.isfinite(c), axis=1)
    desc = np.hstack([np.ones((batch, 1)), c[:, ::-1]])
    desc[~finite_rows] = 0.0
    desc[~finite_rows, 0] = 1.0

    z = _aberth(desc, max_iter)
    roots = np.empty_like(z)
    for b in range(batch):
        if np.all(np.isfinite(z[b])):
            roots[b] = symmetrize_conjugates(z[b], pair_tol)
        else:
            roots[b] = z[b]

    with np.errstate(over="ignore", invalid="ignore"):
        residuals = np.abs(_horner(desc, roots))
    ok = (
        finite_rows
        & np.all(np.isfinite(roots), axis=1)
        & np.all(residuals <= _residual_bound(c)[:, None], axis=1)
    )
    return roots, ok, residuals


def find_roots(
    poly: CharPoly | Sequence[float],
    max_iter: int = DEFAULT_MAX_ITER,
    pair_tol: float = DEFAULT_PAIR_TOL,
) -> ComplexVector:
    """All N complex roots of the monic polynomial, conjugate-closed."""
    if not isinstance(poly, CharPoly):
        poly = CharPoly(np.asarray(poly, dtype=np.float64))
    roots, ok, residuals = find_roots_batch(poly.coeffs[None, :], max_iter, pair_tol)
    if not ok[0]:
        raise RootFindingError(
            f"Root finder did not converge in {max_iter} iterations",
            residuals=residuals[0].tolist(),
            technical=f"max residual {np.max(residuals[0]):.3g}",
        )
    return roots[0]


def oracle_spectrum(w, max_iter: int = DEFAULT_MAX_ITER) -> ComplexVector:
    """Eigenvalues of W as roots of its characteristic polynomial."""
    return find_roots(charpoly_oracle(w), max_iter=max_iter)


def match_spectra(est, ref) -> SpectrumError:
    """Greedy bijection: repeatedly pair the globally closest unmatched roots."""
    est = as_complex_vector(est, name="estimate")
    ref = as_complex_vector(ref, name="reference")
    if est.shape != ref.shape:
        raise DimensionError(f"cannot match {est.size} roots against {ref.size}")
    if est.size == 0:
        raise ValidationError("cannot match empty spectra")

    dist = np.abs(est[:, None] - ref[None, :])
    matched: List[Tuple[int, int]] = []
    for _ in range(est.size):
        e, r = np.unravel_index(int(np.argmin(dist)), dist.shape)
        matched.append((int(e), int(r)))
        dist[e, :] = np.inf
        dist[:, r] = np.inf

    matched.sort(key=lambda pair: pair[1])
    errors = [abs(est[e] - ref[r]) for e, r in matched]
    return SpectrumError(
        pairs=tuple((complex(est[e]), complex(ref[r])) for e, r in matched),
        max_abs_error=float(max(errors)),
        mean_abs_error=float(math.fsum(errors) / len(errors)),
    )


def spectrum_trace(
    flow: FlowTrace,
    max_iter: int = DEFAULT_MAX_ITER,
    pair_tol: float = DEFAULT_PAIR_TOL,
) -> SpectrumTrace:
    """Roots of every node's coefficient estimate at every sample.

    Samples where the root finder fails are recorded as gaps.
    """
    samples, n, _ = flow.estimates.shape
    roots, ok, _ = find_roots_batch(
        flow.estimates.reshape(samples * n, n), max_iter, pair_tol
    )
    result = SpectrumTrace()
    for k in range(samples):
        t = float(flow.times[k])
        for i in range(n):
            row = k * n + i
            if ok[row]:
                result.estimates.append(SpectrumEstimate(i + 1, t, roots[row]))
            else:
                result.gaps.append((t, i + 1))
    if result.gaps:
        logger.warning(
            f"Root finding left {len(result.gaps)} gaps in {samples * n} snapshots",
            stage="spectrum",
            gaps=len(result.gaps),
        )
    return result
