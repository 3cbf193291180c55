"""Tests for the Stage-1 message-passing simulator."""

import numpy as np
import pytest

from netspec.graph import WAssignment, build_w, generate_graph
from netspec.linalg import charpoly_oracle, krylov_columns, krylov_matrix, rank
from netspec.stage1 import (
    LocalEquation,
    MessageBus,
    NodeState,
    RoundMessage,
    init_y0,
    make_nodes,
    run_stage1,
)
from netspec.utils import DimensionError, ProtocolError, ValidationError


class TestInitY0:
    """Test starting values."""

    def test_deterministic(self):
        """The same seed gives the same vector."""
        np.testing.assert_array_equal(init_y0(2, seed=4), init_y0(2, seed=4))

    def test_seeds_differ(self):
        """Different seeds give different vectors."""
        assert not np.array_equal(init_y0(6, seed=1), init_y0(6, seed=2))

    def test_range(self):
        """Values lie in [-1, 1]."""
        y = init_y0(12, seed=0)
        assert y.shape == (12,)
        assert np.all(np.abs(y) <= 1.0)

    def test_needs_two_nodes(self):
        """N = 1 is rejected."""
        with pytest.raises(ValidationError):
            init_y0(1, seed=0)


class TestRunStage1:
    """Test the synchronous iteration."""

    def test_two_node_example(self, p2_ones):
        """W = [[1,1],[1,1]], y0 = (1,0) gives y(1) = (1,1), y(2) = (2,2)."""
        result = run_stage1(p2_ones, [1.0, 0.0])
        np.testing.assert_array_equal(result.trace, [[1.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
        a, b = result.matrix()
        np.testing.assert_array_equal(a, [[1.0, 1.0], [0.0, 1.0]])
        np.testing.assert_array_equal(b, [-2.0, -2.0])
        x_star = charpoly_oracle(p2_ones.w).coeffs
        np.testing.assert_allclose(x_star, [0.0, -2.0])
        np.testing.assert_allclose(a @ x_star, b)

    def test_message_count(self, p2_ones):
        """Each round sends one message per directed edge."""
        assert run_stage1(p2_ones, [1.0, 0.0]).messages == 2 * 2

    def test_identity_pattern_is_fixed_point(self):
        """w_ii = 1 and zero edge weights keep y constant; A is singular."""
        graph = generate_graph("path", 3)
        result = run_stage1(WAssignment(graph, np.eye(3)), [0.2, -0.4, 0.7])
        for t in range(4):
            np.testing.assert_array_equal(result.trace[t], [0.2, -0.4, 0.7])
        a, _ = result.matrix()
        assert rank(a) == 1

    def test_matches_krylov_bit_for_bit(self, scenario1):
        """The assembled A equals krylov_matrix exactly and b = -W^N y0."""
        result = run_stage1(scenario1.w, scenario1.y0)
        a, b = result.matrix()
        np.testing.assert_array_equal(a, krylov_matrix(scenario1.w.w, scenario1.y0))
        np.testing.assert_array_equal(b, -krylov_columns(scenario1.w.w, scenario1.y0, 7)[:, 6])

    def test_seeded_y0_matches_krylov(self, scenario1):
        """Bit equality holds for RNG-drawn y0 too."""
        y0 = init_y0(6, seed=123)
        a, _ = run_stage1(scenario1.w, y0).matrix()
        np.testing.assert_array_equal(a, krylov_matrix(scenario1.w.w, y0))

    def test_cayley_hamilton_consistency(self, scenario1):
        """A x* = b with x* from the oracle."""
        a, b = run_stage1(scenario1.w, scenario1.y0).matrix()
        x_star = charpoly_oracle(scenario1.w.w).coeffs
        assert np.max(np.abs(a @ x_star - b)) <= 1e-6 * (1.0 + np.max(np.abs(b)))

    def test_cayley_hamilton_random_graphs(self):
        """A x* = b on 50 random connected graphs with 3 to 10 nodes."""
        rng = np.random.default_rng(2024)
        for trial in range(50):
            n = int(rng.integers(3, 11))
            graph = generate_graph("erdos_renyi", n, 0.5, seed=500 + trial)
            wa = build_w(graph, "random_weights", seed=trial)
            a, b = run_stage1(wa, init_y0(n, seed=trial)).matrix()
            x_star = charpoly_oracle(wa.w).coeffs
            assert np.max(np.abs(a @ x_star - b)) <= 1e-6 * (1.0 + np.max(np.abs(b))), trial

    def test_random_weights_almost_surely_full_rank(self):
        """Random-weight W on six nodes gives rank N in at least 99 of 100 draws."""
        full = 0
        for trial in range(100):
            graph = generate_graph("erdos_renyi", 6, 0.5, seed=1000 + trial)
            wa = build_w(graph, "random_weights", seed=trial)
            a, _ = run_stage1(wa, init_y0(6, seed=trial)).matrix()
            full += rank(a) == 6
        assert full >= 99

    @pytest.mark.parametrize("n", [3, 4])
    def test_complete_graph_never_full_rank(self, n):
        """K3/K4 adjacency is not cyclic, so A is singular for every y0."""
        wa = build_w(generate_graph("complete", n), "adjacency")
        for seed in range(100):
            a, _ = run_stage1(wa, init_y0(n, seed=seed)).matrix()
            assert rank(a) < n

    def test_y0_length(self, p2_ones):
        """y0 must have N entries."""
        with pytest.raises(DimensionError):
            run_stage1(p2_ones, [1.0, 2.0, 3.0])


class TestLocality:
    """Test that nodes only use local information."""

    def test_node_holds_only_its_row(self, scenario1):
        """Node state holds w_ii and w_ij for neighbors j only."""
        nodes = make_nodes(scenario1.w, scenario1.y0)
        for i, node in nodes.items():
            assert set(node.row) == {i, *scenario1.graph.neighbors(i)}

    def test_bus_rejects_non_neighbors(self, scenario1):
        """Nodes 1 and 3 are not adjacent; the bus refuses the message."""
        bus = MessageBus(scenario1.w)
        with pytest.raises(ProtocolError, match="not neighbors"):
            bus.send(RoundMessage(sender=1, recipient=3, payload=0.5, round=0))

    def test_bus_rejects_wrong_round(self, p2_ones):
        """Messages must belong to the current round."""
        bus = MessageBus(p2_ones)
        with pytest.raises(ProtocolError):
            bus.send(RoundMessage(sender=1, recipient=2, payload=0.5, round=1))

    def test_bus_barrier(self, p2_ones):
        """A round cannot end with undelivered messages."""
        bus = MessageBus(p2_ones)
        bus.send(RoundMessage(sender=1, recipient=2, payload=0.5, round=0))
        with pytest.raises(ProtocolError, match="undelivered"):
            bus.advance()

    def test_update_needs_every_neighbor(self):
        """A node refuses to update before all neighbors have reported."""
        node = NodeState(id=2, row={2: 1.0, 1: 1.0, 3: 1.0}, neighbors=(1, 3), history=[0.0])
        node.receive(RoundMessage(1, 2, 1.0, 0))
        with pytest.raises(ProtocolError, match="no value from \\[3\\]"):
            node.update(0)

    def test_duplicate_message(self):
        """Two values from the same neighbor in one round are refused."""
        node = NodeState(id=2, row={2: 1.0, 1: 1.0}, neighbors=(1,), history=[0.0])
        node.receive(RoundMessage(1, 2, 1.0, 0))
        with pytest.raises(ProtocolError):
            node.receive(RoundMessage(1, 2, 2.0, 0))

    def test_history_grows_by_one(self):
        """Each update appends exactly one value."""
        node = NodeState(id=1, row={1: 0.5, 2: 2.0}, neighbors=(2,), history=[1.0])
        node.receive(RoundMessage(2, 1, 3.0, 0))
        assert node.update(0) == pytest.approx(6.5)
        assert node.history == [1.0, 6.5]


class TestLocalEquation:
    """Test local equation rows."""

    def test_rejects_non_finite_b(self):
        """b must be finite."""
        with pytest.raises(ValidationError):
            LocalEquation(node=1, a=np.array([1.0]), b=float("inf"))
