"""
Error types and centralized error handling for netspec.

Every failure raised by the library carries a user-facing message, an optional
suggestion and technical detail, and a category that the CLI maps onto an
exit code.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional, Sequence

import typer
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console

from .codes import ExitCode


class NetspecError(Exception):
    """
    Base exception with user-friendly message and resolution hints.
    """

    exit_code = ExitCode.ERROR

    def __init__(
        self,
        message: str,
        suggestion: Optional[str] = None,
        technical: Optional[str] = None,
        category: str = "general",
    ) -> None:
        self.message = message
        self.suggestion = suggestion
        self.technical = technical
        self.category = category
        super().__init__(self.message)

    def __str__(self) -> str:
        result = f"[red]Error:[/red] {self.message}"
        if self.suggestion:
            result += f"\n[yellow]💡 Suggestion:[/yellow] {self.suggestion}"
        if self.technical:
            result += f"\n[dim]Technical details:[/dim] {self.technical}"
        return result


class DimensionError(NetspecError):
    """Operand shapes do not fit together."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category="dimension", **kwargs)


class ValidationError(NetspecError):
    """Input violates a documented invariant."""

    exit_code = ExitCode.VALIDATION_ERROR

    def __init__(self, message: str, expected_format: Optional[str] = None, **kwargs):
        self.expected_format = expected_format
        super().__init__(message, category="validation", **kwargs)


class ConfigError(NetspecError):
    """Run configuration is invalid or references missing files."""

    exit_code = ExitCode.CONFIG_ERROR

    def __init__(self, message: str, config_file: Optional[str] = None, **kwargs):
        self.config_file = config_file
        kwargs.setdefault(
            "suggestion", "Check the run configuration against a shipped preset"
        )
        super().__init__(message, category="config", **kwargs)


class GraphGenerationError(NetspecError):
    """Random graph generation gave up before finding a connected graph."""

    exit_code = ExitCode.CONFIG_ERROR

    def __init__(self, message: str, attempts: int = 0, **kwargs):
        self.attempts = attempts
        kwargs.setdefault("suggestion", "Increase edge_prob or use another seed")
        super().__init__(message, category="graph", **kwargs)


class SingularMatrixError(NetspecError):
    """Matrix is singular at the configured rank tolerance."""

    exit_code = ExitCode.SINGULAR_MATRIX

    def __init__(self, message: str, rank: int, size: int, **kwargs):
        self.rank = rank
        self.size = size
        kwargs.setdefault("technical", f"rank {rank} < {size}")
        super().__init__(message, category="singular", **kwargs)


class RootFindingError(NetspecError):
    """Aberth-Ehrlich iteration did not reach the residual bound."""

    exit_code = ExitCode.ROOT_FINDING_ERROR

    def __init__(self, message: str, residuals: Sequence[float] = (), **kwargs):
        self.residuals = list(residuals)
        super().__init__(message, category="roots", **kwargs)


class StepSizeError(NetspecError):
    """Lyapunov function increased between samples; the step is too large."""

    exit_code = ExitCode.INTEGRATION_FAILURE

    def __init__(self, message: str, step: float, **kwargs):
        self.step = step
        kwargs.setdefault("suggestion", f"Retry with a step smaller than h={step:g}")
        super().__init__(message, category="integration", **kwargs)


class DivergenceError(NetspecError):
    """Integration produced non-finite state."""

    exit_code = ExitCode.INTEGRATION_FAILURE

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category="integration", **kwargs)


class ProtocolError(NetspecError):
    """A simulated node broke the locality or round-barrier contract."""

    def __init__(self, message: str, **kwargs):
        super().__init__(message, category="protocol", **kwargs)


class ErrorHandler:
    """
    Centralized error handling for CLI commands.

    ``handle`` prints a formatted message and returns the exit code the
    command should terminate with.
    """

    def __init__(self, console: Optional[Console] = None) -> None:
        self.console = console or Console(stderr=True)

    def handle(self, error: Exception) -> int:
        if isinstance(error, NetspecError):
            self.console.print(str(error))
            return error.exit_code
        if isinstance(error, PydanticValidationError):
            wrapped = ConfigError(
                "Invalid run configuration",
                technical="; ".join(
                    f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}"
                    for e in error.errors()
                ),
            )
            self.console.print(str(wrapped))
            return wrapped.exit_code
        if isinstance(error, typer.BadParameter):
            self.console.print(
                str(
                    NetspecError(
                        f"Invalid parameter: {error}",
                        suggestion="Check the command help with '--help' for valid options",
                        category="parameter",
                    )
                )
            )
            return ExitCode.CONFIG_ERROR
        if isinstance(error, FileNotFoundError):
            file_path = Path(str(error.filename)) if error.filename else Path("unknown")
            self.console.print(
                str(
                    NetspecError(
                        f"File not found: {file_path}",
                        suggestion=self._get_file_suggestion(file_path),
                        technical=str(error),
                        category="file",
                    )
                )
            )
            return ExitCode.CONFIG_ERROR
        if isinstance(error, json.JSONDecodeError):
            self.console.print(
                str(
                    NetspecError(
                        "Invalid JSON format in file",
                        suggestion="Check file syntax and ensure valid JSON structure",
                        technical=f"Line {error.lineno}, Column {error.colno}: {error.msg}",
                        category="format",
                    )
                )
            )
            return ExitCode.CONFIG_ERROR

        self.console.print(
            str(
                NetspecError(
                    f"Unexpected error: {type(error).__name__}",
                    suggestion="Set logging.level to DEBUG for more information",
                    technical=str(error),
                )
            )
        )
        return ExitCode.ERROR

    def _get_file_suggestion(self, file_path: Path) -> str:
        if file_path.suffix.lower() == ".json":
            return "Use a shipped preset name (scenario1_paper, scenario2_paper) or a valid JSON path"
        if file_path.suffix.lower() in (".yaml", ".yml"):
            return "Check your settings file path and YAML syntax"
        return f"Verify the file path exists: {file_path}"


error_handler = ErrorHandler()
