"""
Stage 1: the synchronous linear iteration y(t+1) = W y(t), simulated node by node.

Each node holds only its own row of W and its neighbor list. Values travel as
``RoundMessage`` objects through a ``MessageBus`` that refuses anything but
neighbor-to-neighbor traffic for the current round. After N rounds node i owns
one row (a_i, b_i) of the linear system A x = b whose solution is the vector of
characteristic polynomial coefficients of W.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .graph import WAssignment
from .linalg import DenseMatrix, as_vector, row_product
from .logging import get_logger
from .utils import ProtocolError, ValidationError

logger = get_logger(__name__)


@dataclass(frozen=True)
class RoundMessage:
    sender: int
    recipient: int
    payload: float
    round: int


@dataclass(frozen=True)
class LocalEquation:
    """Node ``node``'s row of A x = b: a = (y_i(0..N-1)), b = -y_i(N)."""

    node: int
    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        a = as_vector(self.a, name=f"a_{self.node}")
        if not np.isfinite(self.b):
            raise ValidationError(f"b_{self.node} is not finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))


@dataclass
class NodeState:
    """Everything a node may touch: its row entries, neighbor ids, own history."""

    id: int
    row: Dict[int, float]
    neighbors: Tuple[int, ...]
    history: List[float] = field(default_factory=list)
    inbox: Dict[int, float] = field(default_factory=dict, repr=False)

    @property
    def value(self) -> float:
        return self.history[-1]

    def emit(self, round: int) -> List[RoundMessage]:
        return [RoundMessage(self.id, j, self.value, round) for j in self.neighbors]

    def receive(self, message: RoundMessage) -> None:
        if message.sender in self.inbox:
            raise ProtocolError(
                f"node {self.id} received two values from {message.sender} in round {message.round}"
            )
        self.inbox[message.sender] = message.payload

    def update(self, round: int) -> float:
        """Apply y_i(t+1) = w_ii y_i(t) + sum_j w_ij y_j(t) once every neighbor has reported."""
        if set(self.inbox) != set(self.neighbors):
            missing = sorted(set(self.neighbors) - set(self.inbox))
            raise ProtocolError(
                f"node {self.id} cannot finish round {round}: no value from {missing}"
            )
        ids = (self.id, *self.neighbors)
        values = [self.value] + [self.inbox[j] for j in self.neighbors]
        nxt = row_product([self.row[j] for j in ids], values)
        self.history.append(nxt)
        self.inbox.clear()
        return nxt


class MessageBus:
    """In-process synchronous network with a global round clock."""

    def __init__(self, wa: WAssignment) -> None:
        self.graph = wa.graph
        self.round = 0
        self.delivered = 0
        self._pending: List[RoundMessage] = []

    def send(self, message: RoundMessage) -> None:
        if message.round != self.round:
            raise ProtocolError(
                f"message for round {message.round} sent during round {self.round}"
            )
        if not self.graph.has_edge(message.sender, message.recipient):
            raise ProtocolError(
                f"nodes {message.sender} and {message.recipient} are not neighbors"
            )
        self._pending.append(message)

    def deliver(self, nodes: Dict[int, NodeState]) -> int:
        """Hand every pending message to its recipient; the round barrier."""
        count = len(self._pending)
        for message in self._pending:
            nodes[message.recipient].receive(message)
        self.delivered += count
        self._pending.clear()
        return count

    def advance(self) -> None:
        if self._pending:
            raise ProtocolError(f"{len(self._pending)} undelivered messages at end of round {self.round}")
        self.round += 1


@dataclass(frozen=True)
class Stage1Result:
    equations: Tuple[LocalEquation, ...]
    trace: DenseMatrix  # trace[t, i-1] = y_i(t), t = 0..N
    messages: int

    @property
    def n(self) -> int:
        return len(self.equations)

    def matrix(self) -> Tuple[DenseMatrix, np.ndarray]:
        """Stack the local rows into (A, b)."""
        a = np.vstack([eq.a for eq in self.equations])
        b = np.array([eq.b for eq in self.equations])
        return a, b


def init_y0(n: int, seed: Optional[int] = None) -> np.ndarray:
    """Independent U[-1, 1] starting values, deterministic given ``seed``."""
    if n < 2:
        raise ValidationError(f"need at least 2 nodes, got {n}")
    return np.random.default_rng(seed).uniform(-1.0, 1.0, n)


def make_nodes(wa: WAssignment, y0: Sequence[float]) -> Dict[int, NodeState]:
    return {
        i: NodeState(
            id=i,
            row=wa.local_row(i),
            neighbors=wa.graph.neighbors(i),
            history=[float(y0[i - 1])],
        )
        for i in wa.graph.nodes
    }


def run_stage1(wa: WAssignment, y0: Sequence[float]) -> Stage1Result:
    """Run N synchronous rounds and return every node's local equation."""
    n = wa.n
    y0 = as_vector(y0, length=n, name="y0")
    started = time.perf_counter()

    nodes = make_nodes(wa, y0)
    bus = MessageBus(wa)
    for t in range(n):
        for node in nodes.values():
            for message in node.emit(t):
                bus.send(message)
        bus.deliver(nodes)
        for node in nodes.values():
            node.update(t)
        bus.advance()

    equations = tuple(
        LocalEquation(node=i, a=np.array(nodes[i].history[:n]), b=-nodes[i].history[n])
        for i in wa.graph.nodes
    )
    trace = np.array([nodes[i].history for i in wa.graph.nodes]).T

    logger.debug(
        f"Stage 1 finished: {n} rounds, {bus.delivered} messages",
        stage="stage1",
        rounds=n,
        messages=bus.delivered,
        duration=time.perf_counter() - started,
    )
    return Stage1Result(equations=equations, trace=trace, messages=bus.delivered)
