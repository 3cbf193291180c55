"""
Output formatting for netspec commands.

Reports render as rich markdown on a terminal, as plain markdown when stdout
is redirected, and as JSON with ``--json``.
"""

from __future__ import annotations

import json
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

from rich.console import Console
from rich.markdown import Markdown


def format_complex(z: Sequence[float], digits: int = 4) -> str:
    """Render an ``[re, im]`` pair as ``a ± bi``."""
    re, im = float(z[0]), float(z[1])
    if im == 0.0:
        return f"{re:.{digits}f}"
    sign = "+" if im > 0 else "-"
    return f"{re:.{digits}f} {sign} {abs(im):.{digits}f}i"


def format_float(value: Optional[float], spec: str = ".3g") -> str:
    return "n/a" if value is None else format(value, spec)


def finite_or_none(value: float) -> Optional[float]:
    """JSON has no inf or nan; report them as null."""
    return float(value) if math.isfinite(value) else None


class OutputManager:
    """Manages output formatting and rendering for netspec commands."""

    def __init__(self) -> None:
        self._is_redirected = not sys.stdout.isatty()
        self._console = (
            Console(force_terminal=False, legacy_windows=False)
            if self._is_redirected
            else Console()
        )

    def print_json(self, data: Dict[str, Any]) -> None:
        print(json.dumps(data, indent=2, sort_keys=True, default=str))

    def print_markdown(
        self,
        content: str,
        json_data: Optional[Dict[str, Any]] = None,
        json_output: bool = False,
    ) -> None:
        """Print ``json_data`` with ``json_output``, otherwise the markdown."""
        if json_output and json_data is not None:
            self.print_json(json_data)
        elif self._is_redirected:
            print(content)
        else:
            self._console.print(Markdown(content))

    def table_markdown(
        self,
        title: str,
        headers: List[str],
        rows: List[List[Any]],
        subtitle: Optional[str] = None,
        level: int = 1,
    ) -> str:
        """Generate a markdown table with a heading."""
        content = f"{'#' * level} {title}\n\n"
        if subtitle:
            content += f"{subtitle}\n\n"
        content += "| " + " | ".join(headers) + " |\n"
        content += "|" + "|".join("-" * (len(h) + 2) for h in headers) + "|\n"
        for row in rows:
            content += "| " + " | ".join(str(cell) for cell in row) + " |\n"
        return content + "\n"


def get_output_manager() -> OutputManager:
    """A manager bound to the current stdout (rebuilt per call for test runners)."""
    return OutputManager()
