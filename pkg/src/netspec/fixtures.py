"""
Graph/W fixture files.

A fixture is a JSON document::

    {
      "n": 6,
      "edges": [[1, 2], [2, 3], ...],          # 1-based, unordered pairs
      "w": [[...], ...] | "adjacency" | "laplacian",
      "y0": [...],                              # optional Stage-1 start
      "perturbation": {"magnitude": 0.2},       # optional
      "perturbed_w": [[...], ...],              # optional, bypasses the RNG
      "expected_spectrum": [[re, im], ...],     # optional reference values
      "expected_perturbed_spectrum": [[re, im], ...]
    }

Shipped fixtures live in ``netspec/fixtures`` and can be referred to by name.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .graph import Graph, WAssignment, WKind, build_w
from .linalg import ComplexVector, as_vector
from .utils import ConfigError, NetspecError, ValidationError

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@dataclass(frozen=True)
class Fixture:
    name: str
    graph: Graph
    w: WAssignment
    y0: Optional[np.ndarray] = None
    perturbed_w: Optional[WAssignment] = None
    perturbation_magnitude: Optional[float] = None
    expected_spectrum: Optional[ComplexVector] = None
    expected_perturbed_spectrum: Optional[ComplexVector] = None


def fixture_names() -> List[str]:
    """Names of the fixtures shipped with the package."""
    return sorted(p.stem for p in FIXTURE_DIR.glob("*.json"))


def resolve_fixture_path(ref: Union[str, Path]) -> Path:
    """Map a shipped fixture name or a filesystem path onto a file."""
    path = Path(ref)
    if path.exists():
        return path
    if path.parent == Path(".") and path.suffix in ("", ".json"):
        shipped = FIXTURE_DIR / f"{path.stem}.json"
        if shipped.exists():
            return shipped
    raise ConfigError(
        f"Fixture not found: {ref}",
        config_file=str(ref),
        suggestion=f"Use a file path or one of: {', '.join(fixture_names())}",
    )


def _spectrum(raw) -> Optional[ComplexVector]:
    if raw is None:
        return None
    return np.array([complex(re, im) for re, im in raw], dtype=np.complex128)


def parse_fixture(data: dict, name: str = "fixture") -> Fixture:
    """Build a Fixture from an already-decoded JSON document."""
    try:
        n = int(data["n"])
        graph = Graph.from_edges(n, data["edges"])
    except KeyError as e:
        raise ConfigError(
            f"Fixture '{name}' is missing field {e.args[0]!r}",
            suggestion="Fixtures need at least 'n', 'edges' and 'w'",
        )
    except ValidationError as e:
        raise ConfigError(
            f"Fixture '{name}' has an invalid graph: {e.message}",
            suggestion="Fixture graphs must be connected with 1-based node ids",
            technical=e.technical,
        )

    raw_w = data.get("w", WKind.ADJACENCY.value)
    if isinstance(raw_w, str):
        if raw_w not in (WKind.ADJACENCY.value, WKind.LAPLACIAN.value):
            raise ConfigError(
                f"Fixture '{name}' has unknown W tag {raw_w!r}",
                suggestion="Use a row-major matrix, 'adjacency' or 'laplacian'",
            )
        wa = build_w(graph, raw_w)
    else:
        wa = WAssignment(graph, np.array(raw_w, dtype=np.float64))

    y0 = data.get("y0")
    if y0 is not None:
        y0 = as_vector(y0, length=n, name="y0")

    perturbed = data.get("perturbed_w")
    if perturbed is not None:
        perturbed = WAssignment(graph, np.array(perturbed, dtype=np.float64))

    magnitude = (data.get("perturbation") or {}).get("magnitude")
    if magnitude is not None and magnitude <= 0:
        raise ValidationError(f"perturbation magnitude must be positive, got {magnitude}")

    return Fixture(
        name=name,
        graph=graph,
        w=wa,
        y0=y0,
        perturbed_w=perturbed,
        perturbation_magnitude=magnitude,
        expected_spectrum=_spectrum(data.get("expected_spectrum")),
        expected_perturbed_spectrum=_spectrum(data.get("expected_perturbed_spectrum")),
    )


def load_fixture(ref: Union[str, Path]) -> Fixture:
    """Load a fixture by shipped name or path."""
    path = resolve_fixture_path(ref)
    data = json.loads(path.read_text())
    try:
        return parse_fixture(data, name=path.stem)
    except NetspecError as e:
        if isinstance(e, ConfigError) and e.config_file is None:
            e.config_file = str(path)
        raise
