"""
Shipped run presets.

Each preset is a run config document under ``netspec/config`` that reproduces
one of the reference experiments.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

PRESET_DIR = Path(__file__).parent / "config"


@dataclass
class RunPreset:
    """A named, shipped run configuration."""

    name: str
    description: str
    filename: str

    @property
    def path(self) -> Path:
        return PRESET_DIR / self.filename


PRESETS: Dict[str, RunPreset] = {
    "scenario1_paper": RunPreset(
        name="scenario1_paper",
        description="Cyclic W with random sensor weights, alpha=10, beta=10",
        filename="scenario1_paper.json",
    ),
    "scenario2_paper": RunPreset(
        name="scenario2_paper",
        description="Adjacency W (not cyclic) perturbed with a=0.2, alpha=100, beta=10",
        filename="scenario2_paper.json",
    ),
}


def get_preset(name: str) -> Optional[RunPreset]:
    """Get a preset by name (``.json`` suffix allowed)."""
    return PRESETS.get(name.lower().removesuffix(".json"))


def list_presets() -> Dict[str, RunPreset]:
    """Get all available presets."""
    return PRESETS.copy()


def preset_names() -> list[str]:
    """Get list of preset names."""
    return list(PRESETS.keys())
