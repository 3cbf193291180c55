"""
Dense linear algebra and the verification oracle.

Everything here works on small, dense float64 matrices (desk scale, N <= 12)
and serves as an independent reference for the distributed stages: the
characteristic polynomial, Krylov (controllability) matrices, numerical rank,
reference solves and conditioning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt

from .utils import DimensionError, SingularMatrixError, ValidationError

DenseMatrix = npt.NDArray[np.float64]
ComplexVector = npt.NDArray[np.complex128]

DEFAULT_RANK_TOL = 1e-9


def as_dense(data, square: bool = False, name: str = "matrix") -> DenseMatrix:
    """Validate and convert ``data`` into a 2-D finite float64 array."""
    m = np.array(data, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return m


def as_vector(data, length: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """Validate and convert ``data`` into a 1-D finite float64 array."""
    v = np.array(data, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionError(f"{name} must have length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return v


def as_complex_vector(data, name: str = "spectrum") -> ComplexVector:
    """Validate and convert ``data`` into a 1-D finite complex128 array."""
    v = np.array(data, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} contains NaN or Inf entries")
    return v


@dataclass(frozen=True)
class CharPoly:
    """Monic characteristic polynomial, ascending coefficients, leading 1 implicit.

    ``coeffs[k]`` is the coefficient of lambda**k for k < degree, so
    det(lambda*I - W) = lambda**N + coeffs[N-1]*lambda**(N-1) + ... + coeffs[0].
    """

    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = as_vector(self.coeffs, name="coefficients")
        if c.shape[0] < 1:
            raise DimensionError("characteristic polynomial needs degree >= 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return int(self.coeffs.shape[0])

    def monic(self) -> np.ndarray:
        """Full ascending coefficient vector including the leading 1."""
        return np.append(self.coeffs, 1.0)

    def evaluate(self, z):
        """Evaluate the polynomial at scalar or array ``z`` (Horner)."""
        return np.polyval(self.monic()[::-1], z)

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> CharPoly:
        """Expand prod(lambda - r) into ascending real coefficients."""
        expanded = np.poly(np.asarray(roots, dtype=np.complex128))
        return cls(np.real(expanded[::-1][:-1]))


def charpoly_oracle(w) -> CharPoly:
    """Characteristic polynomial coefficients by the Faddeev-LeVerrier recursion.

    M_0 = 0, c_N = 1; M_k = W M_{k-1} + c_{N-k+1} I, c_{N-k} = -tr(W M_k) / k.
    """
    w = as_dense(w, square=True, name="W")
    n = w.shape[0]
    identity = np.eye(n)
    coeffs = np.zeros(n)
    m = np.zeros((n, n))
    c_prev = 1.0
    for k in range(1, n + 1):
        m = w @ m + c_prev * identity
        c_prev = -float(np.trace(w @ m)) / k
        coeffs[n - k] = c_prev
    return CharPoly(coeffs)


def row_product(row: Sequence[float], values: Sequence[float]) -> float:
    """Correctly rounded dot product of one matrix row with a vector.

    ``math.fsum`` makes the result independent of summation order, so the
    same row evaluated by a simulated node and by the oracle agrees bit for
    bit even when the node skips structural zeros.
    """
    return math.fsum(float(a) * float(b) for a, b in zip(row, values))


def krylov_matrix(w, y0) -> DenseMatrix:
    """Controllability matrix [y0, W y0, ..., W^(N-1) y0]."""
    return krylov_columns(w, y0, count=None)


def krylov_columns(w, y0, count: Optional[int] = None) -> DenseMatrix:
    """First ``count`` Krylov columns (default N); column l is W^l y0."""
    w = as_dense(w, square=True, name="W")
    n = w.shape[0]
    y = as_vector(y0, length=n, name="y0")
    count = n if count is None else count
    rows = w.tolist()
    cols = [y.tolist()]
    for _ in range(1, count):
        prev = cols[-1]
        cols.append([row_product(r, prev) for r in rows])
    return np.array(cols[:count], dtype=np.float64).T


def rank(m, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank by row reduction with partial pivoting.

    A pivot counts as zero when |pivot| <= tol * max|M|.
    """
    if tol <= 0:
        raise ValidationError("rank tolerance must be positive")
    a = as_dense(m).copy()
    rows, cols = a.shape
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        return 0
    threshold = tol * scale

    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[p, c]) <= threshold:
            continue
        if p != r:
            a[[r, p]] = a[[p, r]]
        factors = a[r + 1 :, c] / a[r, c]
        a[r + 1 :, c:] -= np.outer(factors, a[r, c:])
        r += 1
    return r


def solve_dense(a, b, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Reference solution of A x = b, used only as an oracle."""
    a = as_dense(a, square=True, name="A")
    n = a.shape[0]
    b = as_vector(b, length=n, name="b")
    r = rank(a, tol)
    if r < n:
        raise SingularMatrixError(
            f"Matrix is singular at tolerance {tol:g}",
            rank=r,
            size=n,
            suggestion="Draw another y0, or perturb W when it may not be cyclic",
        )
    return np.linalg.solve(a, b)


def condition_estimate(a, tol: float = DEFAULT_RANK_TOL) -> float:
    """Ratio of largest to smallest singular value; +inf when A is singular."""
    a = as_dense(a, square=True, name="A")
    if rank(a, tol) < a.shape[0]:
        return math.inf
    s = np.linalg.svd(a, compute_uv=False)
    return float(s[0] / s[-1])


def cayley_hamilton_residual(w, poly: CharPoly) -> float:
    """Max-row-sum norm of W^N + x^(N-1) W^(N-1) + ... + x^(0) I."""
    w = as_dense(w, square=True, name="W")
    n = w.shape[0]
    if poly.degree != n:
        raise DimensionError(f"polynomial degree {poly.degree} does not match N={n}")
    # Horner in the matrix argument
    acc = np.eye(n)
    for k in range(n - 1, -1, -1):
        acc = acc @ w + poly.coeffs[k] * np.eye(n)
    return float(np.max(np.sum(np.abs(acc), axis=1)))


def is_controllable(w, y0, tol: float = DEFAULT_RANK_TOL) -> bool:
    """True when the Krylov matrix of (W, y0) has full rank."""
    k = krylov_matrix(w, y0)
    return rank(k, tol) == k.shape[0]


def is_cyclic(
    w, trials: int = 5, seed: Optional[int] = None, tol: float = DEFAULT_RANK_TOL
) -> bool:
    """Empirical cyclicity test.

    W is cyclic iff (W, y0) is controllable for almost every y0, and never
    controllable otherwise, so a few random draws decide it with probability one.
    """
    w = as_dense(w, square=True, name="W")
    rng = np.random.default_rng(seed)
    return any(
        is_controllable(w, rng.uniform(-1.0, 1.0, w.shape[0]), tol)
        for _ in range(trials)
    )
