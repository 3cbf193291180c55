"""
Run configuration documents.

A run config is a single JSON (or YAML) document describing one experiment:
which graph and W to use, the scenario, the seeds, the consensus parameters
and, for the cyclic-unknown scenario, the perturbation. Consensus fields left
out fall back to the ``consensus`` section of the user settings.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from .config import ConsensusCfg
from .fixtures import resolve_fixture_path
from .graph import GraphKind, WKind
from .utils import ConfigError

Scenario = Literal["cyclic-known", "cyclic-unknown"]


class GraphSource(BaseModel):
    """Either a fixture (shipped name or path) or a generator spec."""

    fixture: Optional[str] = None
    kind: Optional[GraphKind] = None
    nodes: Optional[int] = Field(default=None, ge=2)
    edge_prob: Optional[float] = Field(default=None, gt=0.0, le=1.0)
    seed: Optional[int] = None

    @field_validator("fixture")
    @classmethod
    def fixture_exists(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            try:
                resolve_fixture_path(v)
            except ConfigError as e:
                raise ValueError(e.message)
        return v

    @model_validator(mode="after")
    def one_source(self) -> GraphSource:
        if (self.fixture is None) == (self.kind is None):
            raise ValueError("give exactly one of 'fixture' or 'kind'")
        if self.kind is not None and self.nodes is None:
            raise ValueError("generated graphs need 'nodes'")
        if self.kind == GraphKind.ERDOS_RENYI and self.edge_prob is None:
            raise ValueError("erdos_renyi graphs need 'edge_prob'")
        return self


class WSource(BaseModel):
    """How to build W; ``kind`` None keeps the fixture's own W."""

    kind: Optional[WKind] = None
    seed: Optional[int] = None


class ConsensusSection(BaseModel):
    alpha: Optional[float] = Field(default=None, gt=0.0)
    beta: Optional[float] = Field(default=None, gt=0.0)
    step: Optional[float] = Field(default=None, gt=0.0)
    t_max: Optional[float] = Field(default=None, gt=0.0)
    v_tol: Optional[float] = Field(default=None, ge=0.0)
    sample_every: Optional[float] = Field(default=None, gt=0.0)
    propagator: Optional[bool] = None

    def resolve(self, defaults: ConsensusCfg) -> ConsensusCfg:
        """Fill unset fields from the settings defaults."""
        merged = defaults.model_dump()
        merged.update(self.model_dump(exclude_none=True))
        return ConsensusCfg(**merged)


class PerturbationSection(BaseModel):
    magnitude: float = Field(gt=0.0)
    seed: Optional[int] = None
    use_fixture: bool = True  # take the fixture's perturbed W when it ships one


class SweepSection(BaseModel):
    magnitudes: List[float] = Field(default_factory=lambda: [0.2, 0.02])
    trials: int = Field(default=50, ge=1)
    seed: Optional[int] = None
    control: bool = True

    @field_validator("magnitudes")
    @classmethod
    def positive(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("magnitudes must not be empty")
        if any(a <= 0 for a in v):
            raise ValueError("magnitudes must be positive")
        return v


class RunConfig(BaseModel):
    name: str = "run"
    scenario: Scenario = "cyclic-known"
    graph: GraphSource
    w: WSource = Field(default_factory=WSource)
    y0_seed: Optional[int] = None
    use_fixture_y0: bool = True
    consensus: ConsensusSection = Field(default_factory=ConsensusSection)
    perturbation: Optional[PerturbationSection] = None
    sweep: SweepSection = Field(default_factory=SweepSection)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def scenario_requirements(self) -> RunConfig:
        if self.scenario == "cyclic-unknown" and self.perturbation is None:
            raise ValueError("scenario 'cyclic-unknown' requires a 'perturbation' section")
        return self

    def with_seed(self, seed: int) -> RunConfig:
        """Override every seed; shipped y0 and perturbed W are then redrawn too."""
        data = self.model_dump()
        data["graph"]["seed"] = seed
        data["w"]["seed"] = seed + 1
        data["y0_seed"] = seed + 2
        data["use_fixture_y0"] = False
        if data.get("perturbation") is not None:
            data["perturbation"]["seed"] = seed + 3
            data["perturbation"]["use_fixture"] = False
        data["sweep"]["seed"] = seed + 4
        return RunConfig(**data)


def load_run_config(ref: str | Path) -> RunConfig:
    """Load a run config from a preset name or a JSON/YAML file."""
    from .presets import get_preset, preset_names

    preset = get_preset(str(ref))
    path = preset.path if preset is not None else Path(ref)
    if not path.exists():
        raise ConfigError(
            f"Run config not found: {ref}",
            config_file=str(ref),
            suggestion=f"Use a preset name ({', '.join(preset_names())}) or a file path",
        )
    try:
        data = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as e:
        raise ConfigError(
            f"Run config is not valid JSON/YAML: {path}",
            config_file=str(path),
            technical=str(e),
        )
    if not isinstance(data, dict):
        raise ConfigError(f"Run config must be a mapping: {path}", config_file=str(path))
    return RunConfig(**data)
