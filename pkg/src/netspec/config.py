from __future__ import annotations

from pathlib import Path
import os

import platformdirs
import yaml
from pydantic import BaseModel, Field


class NumericsCfg(BaseModel):
    rank_tol: float = 1e-9  # relative to the largest absolute entry
    root_max_iter: int = 500
    root_pair_tol: float = 1e-6
    max_nodes: int = 12


class ConsensusCfg(BaseModel):
    alpha: float = 10.0
    beta: float = 10.0
    step: float = 1e-3
    t_max: float = 200.0
    v_tol: float = 1e-12
    sample_every: float = 0.1
    propagator: bool = True


class OutputCfg(BaseModel):
    directory: str = str(Path(platformdirs.user_data_dir("netspec")) / "runs")


class LoggingSettings(BaseModel):
    enabled: bool = True
    level: str = "INFO"
    format: str = "rich"
    output: str = "console"
    log_file: str = str(
        Path(platformdirs.user_data_dir("netspec")) / "logs" / "netspec.log"
    )
    max_file_size: int = 10485760  # 10MB
    backup_count: int = 5
    console_show_timestamp: bool = False
    console_show_level: bool = True
    console_rich_tracebacks: bool = True


class Settings(BaseModel):
    numerics: NumericsCfg = Field(default_factory=NumericsCfg)
    consensus: ConsensusCfg = Field(default_factory=ConsensusCfg)
    output: OutputCfg = Field(default_factory=OutputCfg)
    logging: LoggingSettings = Field(default_factory=LoggingSettings)


def get_default_config_path() -> Path:
    """Get the default config file path in the XDG config directory."""
    return Path(platformdirs.user_config_dir("netspec")) / "config.yaml"


def load_config(path: str | None = None) -> Settings:
    """Load settings from YAML.

    Resolution order: explicit ``path``, ``$NETSPEC_CONFIG``, the user config
    file, built-in defaults.
    """
    if path is None:
        path = os.environ.get("NETSPEC_CONFIG")
    if path is None and get_default_config_path().exists():
        path = str(get_default_config_path())

    data = {}
    if path is not None:
        p = Path(path)
        if p.exists():
            data = yaml.safe_load(p.read_text()) or {}

    return Settings(**data)


def get_config() -> Settings:
    """Get current configuration instance."""
    return load_config()


def get_output_path(config: Settings | None = None) -> Path:
    """Get the directory run artifacts are written to."""
    if config is None:
        config = get_config()
    return Path(config.output.directory).expanduser()
