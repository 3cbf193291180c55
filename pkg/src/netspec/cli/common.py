"""
Shared plumbing for netspec commands: settings, logging and error exits.
"""

from __future__ import annotations

from pathlib import Path
from typing import NoReturn, Optional

import typer

from ..config import Settings, load_config
from ..fixtures import Fixture, load_fixture
from ..logging import LogLevel, config_from_settings, logging_manager, setup_logging
from ..presets import preset_names
from ..runconfig import RunConfig, load_run_config
from ..utils import ConfigError, error_handler

CONFIG_HELP = f"Run config path or preset name ({', '.join(preset_names())})"


def init_settings(ctx: Optional[typer.Context] = None) -> Settings:
    """Load settings (``--settings`` on the root command wins) and set up logging."""
    obj = (ctx.obj if ctx is not None else None) or {}
    path = obj.get("settings_path")
    settings = load_config(str(path) if path else None)
    setup_logging(config_from_settings(settings))
    if obj.get("log_level"):
        logging_manager.set_level(LogLevel(obj["log_level"].upper()))
    return settings


def fail(error: Exception) -> NoReturn:
    """Print ``error`` and exit with its mapped code."""
    raise typer.Exit(error_handler.handle(error))


def load_config_ref(ref: str, seed: Optional[int] = None) -> RunConfig:
    """Load a run config from a preset name or file, applying ``--seed``."""
    cfg = load_run_config(ref)
    return cfg.with_seed(seed) if seed is not None else cfg


def require_one(**options) -> str:
    """Name of the single option that is set; ConfigError otherwise."""
    given = [name for name, value in options.items() if value is not None]
    if len(given) != 1:
        flags = ", ".join(f"--{name.replace('_', '-')}" for name in options)
        raise ConfigError(f"Give exactly one of {flags}")
    return given[0]


def load_fixture_ref(ref: str) -> Fixture:
    return load_fixture(Path(ref) if Path(ref).exists() else ref)
