"""
Undirected connected graphs and matrices W that respect their zero pattern.

Node ids are 1-based throughout. A ``WAssignment`` pairs a graph with a dense
W; every off-diagonal entry outside the edge set must be exactly zero, which
``validate_assumption1`` checks and ``build_w`` always guarantees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np

from .linalg import DenseMatrix, as_dense
from .logging import get_logger
from .utils import DimensionError, GraphGenerationError, ValidationError

logger = get_logger(__name__)

Edge = Tuple[int, int]

MAX_GENERATION_ATTEMPTS = 100


class GraphKind(str, Enum):
    PATH = "path"
    CYCLE = "cycle"
    COMPLETE = "complete"
    ERDOS_RENYI = "erdos_renyi"


class WKind(str, Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"
    RANDOM_WEIGHTS = "random_weights"


def _normalize_edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected connected graph on nodes 1..node_count."""

    node_count: int
    edges: FrozenSet[Edge]
    _adjacency: Dict[int, Tuple[int, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        n = int(self.node_count)
        if n < 2:
            raise ValidationError(f"graph needs at least 2 nodes, got {n}")

        normalized = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError(f"self-loop on node {i}")
            if not (1 <= i <= n and 1 <= j <= n):
                raise ValidationError(f"edge {{{i},{j}}} references a node outside 1..{n}")
            normalized.add(_normalize_edge(i, j))
        object.__setattr__(self, "edges", frozenset(normalized))

        if not nx.is_connected(self.to_networkx()):
            raise ValidationError(
                f"graph on {n} nodes is not connected",
                suggestion="Every node must be reachable; add edges or fix the fixture",
            )

        adjacency: Dict[int, List[int]] = {i: [] for i in range(1, n + 1)}
        for i, j in normalized:
            adjacency[i].append(j)
            adjacency[j].append(i)
        object.__setattr__(
            self,
            "_adjacency",
            {i: tuple(sorted(nbrs)) for i, nbrs in adjacency.items()},
        )

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Iterable[int]]) -> Graph:
        """Build a graph from an edge list, rejecting duplicate edges."""
        seen = set()
        for pair in edges:
            pair = tuple(int(v) for v in pair)
            if len(pair) != 2:
                raise ValidationError(f"edge {list(pair)} must have exactly two endpoints")
            key = _normalize_edge(*pair)
            if key in seen:
                raise ValidationError(f"duplicate edge {{{key[0]},{key[1]}}}")
            seen.add(key)
        return cls(node_count, frozenset(seen))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> Graph:
        """Convert a networkx graph labelled 0..N-1 into a 1-based Graph."""
        return cls(g.number_of_nodes(), frozenset((u + 1, v + 1) for u, v in g.edges()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(1, self.node_count + 1))
        g.add_edges_from(self.edges)
        return g

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    def neighbors(self, i: int) -> Tuple[int, ...]:
        """Neighbors of node ``i`` in ascending order."""
        return self._adjacency[i]

    def has_edge(self, i: int, j: int) -> bool:
        return _normalize_edge(i, j) in self.edges

    def sorted_edges(self) -> List[Edge]:
        return sorted(self.edges)

    def adjacency_matrix(self) -> DenseMatrix:
        n = self.node_count
        a = np.zeros((n, n))
        for i, j in self.edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
        return a


def generate_graph(
    kind: GraphKind | str,
    n: int,
    edge_prob: Optional[float] = None,
    seed: Optional[int] = None,
    max_attempts: int = MAX_GENERATION_ATTEMPTS,
) -> Graph:
    """Generate a connected graph of the requested family.

    Erdős–Rényi draws are retried with seeds ``seed + attempt`` until one is
    connected; ``GraphGenerationError`` after ``max_attempts`` failures.
    """
    kind = GraphKind(kind)
    if n < 2:
        raise ValidationError(f"graph needs at least 2 nodes, got {n}")

    if kind is GraphKind.PATH:
        return Graph.from_networkx(nx.path_graph(n))
    if kind is GraphKind.CYCLE:
        return Graph.from_networkx(nx.cycle_graph(n))
    if kind is GraphKind.COMPLETE:
        return Graph.from_networkx(nx.complete_graph(n))

    if edge_prob is None or not (0.0 < edge_prob <= 1.0):
        raise ValidationError(
            f"erdos_renyi needs edge_prob in (0, 1], got {edge_prob}",
            suggestion="Pass --edge-prob or set graph.edge_prob in the run config",
        )
    for attempt in range(max_attempts):
        attempt_seed = None if seed is None else seed + attempt
        g = nx.gnp_random_graph(n, edge_prob, seed=attempt_seed)
        if nx.is_connected(g):
            if attempt:
                logger.debug(
                    f"Connected G({n}, {edge_prob}) after {attempt + 1} draws",
                    attempts=attempt + 1,
                )
            return Graph.from_networkx(g)

    raise GraphGenerationError(
        f"No connected G({n}, {edge_prob}) graph after {max_attempts} attempts",
        attempts=max_attempts,
    )


@dataclass(frozen=True)
class WAssignment:
    """A graph plus the matrix W whose rows the nodes hold."""

    graph: Graph
    w: DenseMatrix

    def __post_init__(self) -> None:
        w = as_dense(self.w, square=True, name="W")
        if w.shape[0] != self.graph.node_count:
            raise DimensionError(
                f"W is {w.shape[0]}x{w.shape[0]} but the graph has {self.graph.node_count} nodes"
            )
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.graph.node_count

    def local_row(self, i: int) -> Dict[int, float]:
        """What node ``i`` knows: w_ii and w_ij for each neighbor j."""
        row = {i: float(self.w[i - 1, i - 1])}
        for j in self.graph.neighbors(i):
            row[j] = float(self.w[i - 1, j - 1])
        return row


def build_w(
    graph: Graph, kind: WKind | str, seed: Optional[int] = None
) -> WAssignment:
    """Build W for ``graph``.

    ``random_weights`` draws w_ii and each directed w_ij on an edge independently
    from U[-1, 1], node-major with the diagonal first and neighbors ascending.
    """
    kind = WKind(kind)
    n = graph.node_count
    adjacency = graph.adjacency_matrix()

    if kind is WKind.ADJACENCY:
        return WAssignment(graph, adjacency)
    if kind is WKind.LAPLACIAN:
        return WAssignment(graph, np.diag(adjacency.sum(axis=1)) - adjacency)

    rng = np.random.default_rng(seed)
    w = np.zeros((n, n))
    for i in graph.nodes:
        w[i - 1, i - 1] = rng.uniform(-1.0, 1.0)
        for j in graph.neighbors(i):
            w[i - 1, j - 1] = rng.uniform(-1.0, 1.0)
    return WAssignment(graph, w)


def validate_assumption1(wa: WAssignment) -> List[Edge]:
    """Pairs (i, j), i < j, that are not edges yet carry a nonzero w_ij or w_ji."""
    violations = []
    n = wa.n
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if wa.graph.has_edge(i, j):
                continue
            if wa.w[i - 1, j - 1] != 0.0 or wa.w[j - 1, i - 1] != 0.0:
                violations.append((i, j))
    return violations
