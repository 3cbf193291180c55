"""Test settings loading and run configuration documents."""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError as PydanticValidationError

from netspec.config import ConsensusCfg, Settings, get_output_path, load_config
from netspec.presets import get_preset, list_presets, preset_names
from netspec.runconfig import ConsensusSection, RunConfig, load_run_config
from netspec.utils import ConfigError


class TestSettings:
    """Test settings resolution."""

    def test_defaults(self, tmp_path):
        settings = load_config(str(tmp_path / "missing.yaml"))
        assert settings.numerics.max_nodes == 12
        assert settings.consensus.propagator is True
        assert settings.logging.level == "INFO"

    def test_explicit_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({"numerics": {"max_nodes": 20}, "consensus": {"alpha": 2.0}}))
        settings = load_config(str(path))
        assert settings.numerics.max_nodes == 20
        assert settings.consensus.alpha == 2.0
        assert settings.consensus.beta == 10.0

    def test_env_var(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yaml"
        path.write_text(yaml.safe_dump({"output": {"directory": str(tmp_path / "runs")}}))
        monkeypatch.setenv("NETSPEC_CONFIG", str(path))
        settings = load_config()
        assert get_output_path(settings) == tmp_path / "runs"

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_config(str(path)) == Settings()

    def test_shipped_example_loads(self):
        example = Path(__file__).parent.parent / "config" / "config.yaml"
        if not example.exists():
            pytest.skip("example settings not present")
        assert isinstance(load_config(str(example)), Settings)


class TestRunConfig:
    """Test RunConfig validation."""

    def test_generated(self):
        cfg = RunConfig(graph={"kind": "cycle", "nodes": 5})
        assert cfg.scenario == "cyclic-known"
        assert cfg.sweep.magnitudes == [0.2, 0.02]

    @pytest.mark.parametrize(
        "graph",
        [
            {},
            {"kind": "path"},
            {"kind": "erdos_renyi", "nodes": 5},
            {"kind": "path", "nodes": 1},
            {"kind": "path", "nodes": 3, "fixture": "paper_scenario1"},
            {"fixture": "no_such_fixture"},
        ],
    )
    def test_bad_graph(self, graph):
        with pytest.raises(PydanticValidationError):
            RunConfig(graph=graph)

    def test_cyclic_unknown_needs_perturbation(self):
        with pytest.raises(PydanticValidationError):
            RunConfig(scenario="cyclic-unknown", graph={"kind": "path", "nodes": 3})

    def test_bad_sweep(self):
        with pytest.raises(PydanticValidationError):
            RunConfig(graph={"kind": "path", "nodes": 3}, sweep={"magnitudes": []})
        with pytest.raises(PydanticValidationError):
            RunConfig(graph={"kind": "path", "nodes": 3}, sweep={"magnitudes": [0.1, -0.1]})

    def test_consensus_resolve(self):
        merged = ConsensusSection(alpha=3.0).resolve(ConsensusCfg())
        assert merged.alpha == 3.0
        assert merged.beta == ConsensusCfg().beta

    def test_with_seed(self):
        cfg = load_run_config("scenario2_paper").with_seed(10)
        assert cfg.y0_seed == 12
        assert cfg.use_fixture_y0 is False
        assert cfg.perturbation.seed == 13
        assert cfg.perturbation.use_fixture is False
        assert cfg.sweep.seed == 14


class TestLoadRunConfig:
    """Test load_run_config."""

    def test_presets(self):
        assert load_run_config("scenario1_paper").scenario == "cyclic-known"
        assert load_run_config("scenario2_paper.json").scenario == "cyclic-unknown"

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump({"name": "k", "graph": {"kind": "complete", "nodes": 4}}))
        assert load_run_config(path).name == "k"

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError) as exc_info:
            load_run_config(tmp_path / "missing.json")
        assert all(name in exc_info.value.suggestion for name in preset_names())

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_malformed(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("graph: [unclosed")
        with pytest.raises(ConfigError):
            load_run_config(path)


class TestPresets:
    def test_registry(self):
        assert set(preset_names()) == {"scenario1_paper", "scenario2_paper"}
        assert all(p.path.exists() for p in list_presets().values())

    def test_lookup(self):
        assert get_preset("SCENARIO1_PAPER").name == "scenario1_paper"
        assert get_preset("unknown") is None
