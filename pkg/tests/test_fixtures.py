"""Tests for fixture loading."""

import json

import numpy as np
import pytest

from netspec.fixtures import fixture_names, load_fixture, parse_fixture, resolve_fixture_path
from netspec.utils import ConfigError, DimensionError


class TestShippedFixtures:
    """Test the fixtures that ship with the package."""

    def test_names(self):
        """Both reference fixtures are shipped."""
        assert {"paper_scenario1", "paper_scenario2"} <= set(fixture_names())

    def test_scenario1(self, scenario1):
        """The cyclic fixture carries W, y0 and the printed eigenvalues."""
        assert scenario1.graph.node_count == 6
        assert len(scenario1.graph.edges) == 8
        np.testing.assert_array_equal(scenario1.y0, [-0.5, 0.9, 0.1, -0.7, 0.6, 0.3])
        assert scenario1.expected_spectrum.shape == (6,)
        assert scenario1.perturbed_w is None

    def test_scenario2(self, scenario2):
        """The adjacency fixture carries a perturbed W within a = 0.2."""
        assert scenario2.perturbation_magnitude == pytest.approx(0.2)
        drift = np.max(np.abs(scenario2.perturbed_w.w - scenario2.w.w))
        assert drift <= 0.2 + 1e-12
        np.testing.assert_array_equal(scenario2.w.w, scenario2.w.w.T)

    def test_name_with_suffix(self):
        """Shipped names resolve with or without .json."""
        assert resolve_fixture_path("paper_scenario1.json") == resolve_fixture_path("paper_scenario1")


class TestParseFixture:
    """Test fixture documents."""

    def test_laplacian_tag(self):
        """A W tag builds the matrix from the graph."""
        fx = parse_fixture({"n": 2, "edges": [[1, 2]], "w": "laplacian"})
        np.testing.assert_array_equal(fx.w.w, [[1.0, -1.0], [-1.0, 1.0]])

    def test_default_is_adjacency(self):
        """Without 'w' the adjacency matrix is used."""
        fx = parse_fixture({"n": 2, "edges": [[1, 2]]})
        np.testing.assert_array_equal(fx.w.w, [[0.0, 1.0], [1.0, 0.0]])

    def test_unknown_tag(self):
        """Unknown W tags are config errors."""
        with pytest.raises(ConfigError):
            parse_fixture({"n": 2, "edges": [[1, 2]], "w": "incidence"})

    def test_missing_field(self):
        """'n' and 'edges' are required."""
        with pytest.raises(ConfigError, match="edges"):
            parse_fixture({"n": 2})

    def test_disconnected(self):
        """A 2x2 diagonal W on two isolated nodes is a config error naming the connectivity failure."""
        with pytest.raises(ConfigError, match="not connected"):
            parse_fixture({"n": 2, "edges": [], "w": [[1.0, 0.0], [0.0, 2.0]]})

    def test_bad_y0_length(self):
        """y0 must have one value per node."""
        with pytest.raises(DimensionError):
            parse_fixture({"n": 2, "edges": [[1, 2]], "y0": [1.0]})


class TestLoadFixture:
    """Test loading from disk."""

    def test_load_from_path(self, tmp_path):
        """A fixture file path loads directly."""
        path = tmp_path / "tiny.json"
        path.write_text(json.dumps({"n": 3, "edges": [[1, 2], [2, 3]], "w": "adjacency"}))
        fx = load_fixture(path)
        assert fx.name == "tiny"
        assert fx.graph.node_count == 3

    def test_missing(self):
        """Unknown names raise ConfigError listing the shipped fixtures."""
        with pytest.raises(ConfigError) as exc_info:
            load_fixture("no_such_fixture")
        assert "paper_scenario1" in exc_info.value.suggestion
