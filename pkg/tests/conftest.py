"""Shared fixtures for the netspec test suite."""

import numpy as np
import pytest

from netspec.fixtures import load_fixture
from netspec.graph import Graph, WAssignment
from netspec.stage1 import LocalEquation


@pytest.fixture(scope="session")
def scenario1():
    """Six-node cyclic fixture with its shipped y0."""
    return load_fixture("paper_scenario1")


@pytest.fixture(scope="session")
def scenario2():
    """Six-node adjacency fixture with its shipped perturbed W."""
    return load_fixture("paper_scenario2")


@pytest.fixture
def p2_graph():
    """Two nodes joined by one edge."""
    return Graph.from_edges(2, [[1, 2]])


@pytest.fixture
def p2_ones(p2_graph):
    """W = [[1, 1], [1, 1]] on P2; char poly lambda^2 - 2 lambda."""
    return WAssignment(p2_graph, np.ones((2, 2)))


@pytest.fixture
def p2_equations():
    """Stage-1 rows of W = [[1, 1], [1, 1]] from y0 = (1, 0); x* = (0, -2)."""
    return (
        LocalEquation(node=1, a=np.array([1.0, 1.0]), b=-2.0),
        LocalEquation(node=2, a=np.array([0.0, 1.0]), b=-2.0),
    )


def well_conditioned_equations(n: int, seed: int, max_condition: float = 3.0):
    """Random rows (a_i, b_i) whose stacked A has condition number <= max_condition."""
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    a = q @ np.diag(rng.uniform(1.0, max_condition, n))
    x_star = rng.uniform(-1.0, 1.0, n)
    b = a @ x_star
    eqs = tuple(LocalEquation(node=i + 1, a=a[i], b=b[i]) for i in range(n))
    return eqs, x_star


@pytest.fixture
def make_system():
    """Factory for random well-conditioned Stage-2 systems."""
    return well_conditioned_equations
