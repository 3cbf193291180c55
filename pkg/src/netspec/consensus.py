"""
Stage 2: the distributed gradient flow that drives every node's estimate to x*.

Node i keeps an estimate x_i of the coefficient vector and follows

    dx_i/dt = -alpha_i (a_i^T x_i - b_i) a_i - sum_{j in N_i} beta_ij (x_i - x_j)

which is the negative gradient (halved) of the Lyapunov function

    V(x) = sum_i alpha_i (a_i^T x_i - b_i)^2 + sum_{ij in E} beta_ij |x_i - x_j|^2.

The stacked flow is affine, dx/dt = -P (x - x*), with
P = blockdiag(alpha_i a_i a_i^T) + L_beta (x) I_N. Integration is classical
fixed-step RK4; because the flow is affine one RK4 step is an affine map, which
``integrate`` can precompute and raise to the number of steps per sample.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .graph import Edge, Graph
from .linalg import DenseMatrix
from .logging import get_logger
from .stage1 import LocalEquation
from .utils import DimensionError, DivergenceError, StepSizeError, ValidationError

logger = get_logger(__name__)

# V may grow by this much (relative) between samples before the step is blamed
V_INCREASE_RTOL = 1e-9
# largest h * lambda on the negative real axis inside the RK4 stability region
RK4_REAL_STABILITY = 2.78


@dataclass(frozen=True)
class ConsensusParams:
    alpha: np.ndarray  # per node, index i-1
    beta: Mapping[Edge, float]  # per undirected edge (i, j), i < j
    step: float = 1e-3
    t_max: float = 200.0
    v_tol: float = 1e-12
    sample_every: float = 0.1
    propagator: bool = True

    def __post_init__(self) -> None:
        alpha = np.array(self.alpha, dtype=np.float64)
        if alpha.ndim != 1 or not np.all(np.isfinite(alpha)) or np.any(alpha <= 0):
            raise ValidationError("alpha must be a vector of positive finite values")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(
            self, "beta", {(min(e), max(e)): float(b) for e, b in self.beta.items()}
        )
        if any(not (b > 0 and math.isfinite(b)) for b in self.beta.values()):
            raise ValidationError("beta must be positive on every edge")
        if not self.step > 0:
            raise ValidationError(f"step must be positive, got {self.step}")
        if not self.t_max > 0:
            raise ValidationError(f"t_max must be positive, got {self.t_max}")
        if self.v_tol < 0:
            raise ValidationError(f"v_tol must be non-negative, got {self.v_tol}")
        if not self.sample_every > 0:
            raise ValidationError(f"sample_every must be positive, got {self.sample_every}")

    @classmethod
    def uniform(
        cls, graph: Graph, alpha: float = 10.0, beta: float = 10.0, **kwargs
    ) -> ConsensusParams:
        """Same alpha at every node and same beta on every edge."""
        return cls(
            alpha=np.full(graph.node_count, float(alpha)),
            beta={e: float(beta) for e in graph.edges},
            **kwargs,
        )

    def check(self, graph: Graph) -> None:
        if self.alpha.shape[0] != graph.node_count:
            raise DimensionError(
                f"{self.alpha.shape[0]} alpha values for {graph.node_count} nodes"
            )
        missing = graph.edges - set(self.beta)
        if missing:
            raise ValidationError(f"no beta for edges {sorted(missing)}")

    def steps_per_sample(self, sample_every: Optional[float] = None) -> int:
        every = self.sample_every if sample_every is None else sample_every
        steps = max(1, round(every / self.step))
        if abs(steps * self.step - every) > 1e-9 * every:
            raise ValidationError(
                f"sample_every={every:g} is not a whole number of steps h={self.step:g}"
            )
        return steps


@dataclass(frozen=True)
class ConsensusState:
    """Stacked estimates; row i-1 of ``x`` is node i's estimate."""

    time: float
    x: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] != x.shape[1]:
            raise DimensionError(f"estimates must be N x N, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DivergenceError(f"non-finite estimate at t={self.time:g}")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)

    @classmethod
    def zeros(cls, n: int) -> ConsensusState:
        return cls(0.0, np.zeros((n, n)))

    @classmethod
    def replicated(cls, x: Sequence[float], n: Optional[int] = None) -> ConsensusState:
        x = np.asarray(x, dtype=np.float64)
        return cls(0.0, np.tile(x, (n or x.shape[0], 1)))

    def estimate(self, i: int) -> np.ndarray:
        return self.x[i - 1]

    def stacked(self) -> np.ndarray:
        return self.x.reshape(-1)


@dataclass
class FlowTrace:
    """Samples (t, estimates, V) taken every ``sample_every`` time units."""

    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    estimates: np.ndarray = field(default_factory=lambda: np.zeros((0, 0, 0)))
    v: np.ndarray = field(default_factory=lambda: np.zeros(0))
    stop_reason: str = ""

    def __post_init__(self) -> None:
        if self.times.shape[0] > 1 and np.any(np.diff(self.times) <= 0):
            raise ValidationError("flow trace times must be strictly increasing")

    def __len__(self) -> int:
        return int(self.times.shape[0])

    def final(self) -> ConsensusState:
        return ConsensusState(float(self.times[-1]), self.estimates[-1])

    def v_summary(self) -> Dict[str, float]:
        return {
            "initial": float(self.v[0]),
            "final": float(self.v[-1]),
            "min": float(self.v.min()),
            "samples": len(self),
        }


def _check_dims(state: ConsensusState, eqs: Sequence[LocalEquation], graph: Graph) -> int:
    n = graph.node_count
    if len(eqs) != n or state.x.shape != (n, n):
        raise DimensionError(
            f"{len(eqs)} equations and {state.x.shape} estimates for {n} nodes"
        )
    for eq in eqs:
        if eq.a.shape[0] != n:
            raise DimensionError(f"a_{eq.node} has length {eq.a.shape[0]}, expected {n}")
    return n


def lyapunov_v(
    state: ConsensusState,
    eqs: Sequence[LocalEquation],
    graph: Graph,
    params: ConsensusParams,
) -> float:
    """V(x); zero exactly at the consensus solution x_i = x* for all i."""
    _check_dims(state, eqs, graph)
    x = state.x
    residual = sum(
        params.alpha[i] * float(eq.a @ x[i] - eq.b) ** 2 for i, eq in enumerate(eqs)
    )
    disagreement = sum(
        b * float(np.dot(x[i - 1] - x[j - 1], x[i - 1] - x[j - 1]))
        for (i, j), b in params.beta.items()
    )
    return residual + disagreement


def node_gradient(
    eq: LocalEquation,
    alpha: float,
    x_i: np.ndarray,
    neighbor_estimates: Mapping[int, np.ndarray],
    incident_beta: Mapping[int, float],
) -> np.ndarray:
    """alpha_i (a_i^T x_i - b_i) a_i + sum_j beta_ij (x_i - x_j), from local data only."""
    g = alpha * (float(eq.a @ x_i) - eq.b) * eq.a
    for j, x_j in neighbor_estimates.items():
        g = g + incident_beta[j] * (x_i - x_j)
    return g


def _local_gradients(
    x: np.ndarray, eqs: Sequence[LocalEquation], graph: Graph, params: ConsensusParams
) -> np.ndarray:
    out = np.empty_like(x)
    for i in graph.nodes:
        nbrs = graph.neighbors(i)
        out[i - 1] = node_gradient(
            eqs[i - 1],
            params.alpha[i - 1],
            x[i - 1],
            {j: x[j - 1] for j in nbrs},
            {j: params.beta[(min(i, j), max(i, j))] for j in nbrs},
        )
    return out


def flow_rhs(
    state: ConsensusState,
    eqs: Sequence[LocalEquation],
    graph: Graph,
    params: ConsensusParams,
) -> np.ndarray:
    """Per-node derivatives dx_i/dt, row i-1 for node i."""
    _check_dims(state, eqs, graph)
    return -_local_gradients(state.x, eqs, graph, params)


def lyapunov_vdot(
    state: ConsensusState,
    eqs: Sequence[LocalEquation],
    graph: Graph,
    params: ConsensusParams,
) -> float:
    """dV/dt = 2 sum_i g_i^T dx_i/dt along the flow, i.e. -2 sum_i |g_i|^2."""
    _check_dims(state, eqs, graph)
    g = _local_gradients(state.x, eqs, graph, params)
    return float(2.0 * np.sum(g * -g))


def weighted_laplacian(graph: Graph, beta: Mapping[Edge, float]) -> DenseMatrix:
    n = graph.node_count
    lap = np.zeros((n, n))
    for (i, j), b in beta.items():
        lap[i - 1, j - 1] -= b
        lap[j - 1, i - 1] -= b
        lap[i - 1, i - 1] += b
        lap[j - 1, j - 1] += b
    return lap


def lyapunov_matrix(
    eqs: Sequence[LocalEquation], graph: Graph, params: ConsensusParams
) -> DenseMatrix:
    """P with V(x) = (x - x*)^T P (x - x*) for the stacked estimate x."""
    n = graph.node_count
    p = np.kron(weighted_laplacian(graph, params.beta), np.eye(n))
    for k, eq in enumerate(eqs):
        block = slice(k * n, (k + 1) * n)
        p[block, block] += params.alpha[k] * np.outer(eq.a, eq.a)
    return p


def stable_step_bound(
    eqs: Sequence[LocalEquation], graph: Graph, params: ConsensusParams
) -> float:
    """Upper bound on the largest eigenvalue of P.

    Sum of the largest alpha_i |a_i|^2 and the Gershgorin bound on L_beta.
    """
    residual = max(params.alpha[i - 1] * float(eqs[i - 1].a @ eqs[i - 1].a) for i in graph.nodes)
    coupling = max(
        2.0 * sum(params.beta[(min(i, j), max(i, j))] for j in graph.neighbors(i))
        for i in graph.nodes
    )
    return residual + coupling


def rk4_step(
    x: np.ndarray, h: float, rhs: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_propagator(
    eqs: Sequence[LocalEquation], graph: Graph, params: ConsensusParams
) -> Tuple[DenseMatrix, np.ndarray]:
    """(Phi, phi) such that one RK4 step maps stacked x to Phi x + phi."""
    n = graph.node_count

    def rhs(flat: np.ndarray) -> np.ndarray:
        return -_local_gradients(flat.reshape(n, n), eqs, graph, params).reshape(-1)

    dim = n * n
    phi = rk4_step(np.zeros(dim), params.step, rhs)
    big_phi = np.empty((dim, dim))
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = 1.0
        big_phi[:, k] = rk4_step(e, params.step, rhs) - phi
    return big_phi, phi


def _v_noise(x: np.ndarray, eqs: Sequence[LocalEquation], v: float) -> float:
    """Rounding noise floor for evaluating V near ``x``."""
    n = x.shape[0]
    scale = max(
        max(abs(eq.b) + float(np.abs(eq.a) @ np.abs(x[k])) for k, eq in enumerate(eqs)),
        float(np.max(np.abs(x))),
    )
    delta = 16.0 * n * np.finfo(float).eps * scale
    return 4.0 * math.sqrt(max(v, 0.0)) * delta + delta * delta


def integrate(
    eqs: Sequence[LocalEquation],
    graph: Graph,
    params: ConsensusParams,
    x_init: Optional[ConsensusState] = None,
    sample_every: Optional[float] = None,
    on_sample: Optional[Callable[[float, float], None]] = None,
) -> Tuple[FlowTrace, ConsensusState]:
    """Integrate the flow with fixed-step RK4 until V <= v_tol or t >= t_max.

    Raises StepSizeError when V grows between samples and DivergenceError on
    non-finite state.
    """
    n = graph.node_count
    params.check(graph)
    state = x_init or ConsensusState.zeros(n)
    _check_dims(state, eqs, graph)
    every = params.sample_every if sample_every is None else sample_every
    steps = params.steps_per_sample(every)
    started = time.perf_counter()

    bound = stable_step_bound(eqs, graph, params)
    if params.step * bound > RK4_REAL_STABILITY:
        logger.warning(
            f"Step h={params.step:g} may exceed the RK4 stability limit "
            f"{RK4_REAL_STABILITY / bound:.3g} for this system",
            stage="stage2",
            step=params.step,
            bound=bound,
        )

    if params.propagator:
        big_phi, phi = step_propagator(eqs, graph, params)
        augmented = np.zeros((n * n + 1, n * n + 1))
        augmented[:-1, :-1] = big_phi
        augmented[:-1, -1] = phi
        augmented[-1, -1] = 1.0
        jump = np.linalg.matrix_power(augmented, steps)

        def advance(flat: np.ndarray) -> np.ndarray:
            return jump[:-1, :-1] @ flat + jump[:-1, -1]

    else:

        def rhs(flat: np.ndarray) -> np.ndarray:
            return -_local_gradients(flat.reshape(n, n), eqs, graph, params).reshape(-1)

        def advance(flat: np.ndarray) -> np.ndarray:
            for _ in range(steps):
                flat = rk4_step(flat, params.step, rhs)
            return flat

    times: List[float] = []
    samples: List[np.ndarray] = []
    values: List[float] = []

    flat = state.stacked().copy()
    t0 = state.time
    k = 0
    while True:
        t = t0 + k * every
        current = ConsensusState(t, flat.reshape(n, n))
        v = lyapunov_v(current, eqs, graph, params)
        if values:
            allowed = values[-1] * (1.0 + V_INCREASE_RTOL) + _v_noise(
                current.x, eqs, values[-1]
            )
            if v > allowed:
                raise StepSizeError(
                    f"V increased from {values[-1]:.6g} to {v:.6g} at t={t:g}",
                    step=params.step,
                    technical=f"upper bound on the largest eigenvalue of P: {bound:.6g}",
                )
        times.append(t)
        samples.append(current.x)
        values.append(v)
        if on_sample is not None:
            on_sample(t, v)

        if v <= params.v_tol:
            reason = "converged"
            break
        if t >= params.t_max:
            reason = "t_max"
            break

        flat = advance(flat)
        if not np.all(np.isfinite(flat)):
            raise DivergenceError(
                f"Estimates became non-finite after t={t:g}",
                suggestion=f"Retry with a step smaller than h={params.step:g}",
            )
        k += 1

    trace = FlowTrace(
        times=np.array(times),
        estimates=np.array(samples),
        v=np.array(values),
        stop_reason=reason,
    )
    logger.debug(
        f"Stage 2 stopped ({reason}) at t={times[-1]:g} with V={values[-1]:.3g}",
        stage="stage2",
        samples=len(trace),
        stop_reason=reason,
        duration=time.perf_counter() - started,
    )
    return trace, trace.final()


def decay_slope(trace: FlowTrace, x_star: Sequence[float]) -> float:
    """Least-squares slope of log|x(t) - x*| over the second half of the trace."""
    x_star = np.asarray(x_star, dtype=np.float64)
    half = len(trace) // 2
    times = trace.times[half:]
    errors = np.linalg.norm(
        (trace.estimates[half:] - x_star[None, None, :]).reshape(len(times), -1), axis=1
    )
    keep = errors > 0
    if np.count_nonzero(keep) < 2:
        raise ValidationError(
            "need at least two nonzero errors in the second half of the trace",
            suggestion="Sample more often or lower v_tol",
        )
    slope, _ = np.polyfit(times[keep], np.log(errors[keep]), 1)
    return float(slope)
