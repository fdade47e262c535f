"""Configuration management for tccp.

Defaults for the solver, the time-domain integrator, parallel sweeps and
output formatting live in a YAML file; every value can also be set per run
from the command line.
"""

import numpy as np
import yaml
from pathlib import Path
from typing import Dict, Optional
from pydantic import BaseModel, Field, field_validator, model_validator


class SolverConfig(BaseModel):
    """Spectral solver settings."""
    levels: int = Field(default=5, ge=3)
    charge_cutoff: int = Field(default=30, ge=20)
    invalid_ratio: float = Field(default=3.0, gt=0)


class DynamicsConfig(BaseModel):
    """Time-domain settings."""
    dt_ns: float = Field(default=0.01, gt=0)
    max_leakage: float = Field(default=0.05, gt=0, le=1)


class SweepConfig(BaseModel):
    """Parallel grid evaluation."""
    parallel_workers: int = Field(default=4, ge=1)
    show_progress: bool = False


class OutputConfig(BaseModel):
    """Result document formatting."""
    format: str = "csv"
    significant_digits: int = Field(default=12, ge=1, le=17)

    @field_validator("format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in ("csv", "json"):
            raise ValueError("output format must be 'csv' or 'json'")
        return value


class LoggingConfig(BaseModel):
    level: str = "WARNING"

    @field_validator("level")
    @classmethod
    def _check_level(cls, value: str) -> str:
        value = value.upper()
        if value not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{value}'")
        return value


class ToolkitConfig(BaseModel):
    """Main configuration for tccp."""
    solver: SolverConfig = Field(default_factory=SolverConfig)
    dynamics: DynamicsConfig = Field(default_factory=DynamicsConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)


class GridSpec(BaseModel):
    """Inclusive linear grid from start to stop in steps points."""
    start: float
    stop: float
    steps: int = Field(ge=1)

    @model_validator(mode="after")
    def _check_order(self) -> "GridSpec":
        if self.start > self.stop:
            raise ValueError(f"grid start {self.start} is after stop {self.stop}")
        if self.steps > 1 and self.start == self.stop:
            raise ValueError("a grid with several steps needs start < stop")
        return self

    def values(self):
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation."""
    command: str
    netlist: Path
    flux: Dict[str, float] = Field(default_factory=dict)
    grid: Optional[GridSpec] = None
    levels: int = Field(default=5, ge=3)
    dt: float = Field(default=0.01, gt=0)
    format: str = "csv"
    output: Optional[Path] = None
    coupler: Optional[str] = None

    @field_validator("format")
    @classmethod
    def _check_format(cls, value: str) -> str:
        if value not in ("csv", "json"):
            raise ValueError("output format must be 'csv' or 'json'")
        return value


def load_config(config_path: Optional[Path] = None) -> ToolkitConfig:
    """Load configuration from file or return defaults.

    Args:
        config_path: Path to configuration file. If None, looks for
                    tccp.yaml in the current directory and the user config dir.

    Returns:
        Loaded configuration
    """
    config_data = {}

    if config_path is None:
        config_path = find_config_file()

    if config_path and config_path.exists():
        try:
            with open(config_path, 'r') as f:
                config_data = yaml.safe_load(f) or {}
            return ToolkitConfig(**config_data)
        except Exception as e:
            raise ValueError(f"Error loading config file {config_path}: {e}")

    return ToolkitConfig(**config_data)


def find_config_file() -> Optional[Path]:
    """Find configuration file in standard locations.

    Returns:
        Path to config file or None if not found
    """
    search_paths = [
        Path.cwd() / "tccp.yaml",
        Path.cwd() / "tccp.yml",
        Path.cwd() / ".tccp.yaml",
        Path.home() / ".config" / "tccp" / "config.yaml",
    ]

    for path in search_paths:
        if path.exists():
            return path

    return None


def save_config(config: ToolkitConfig, config_path: Path) -> None:
    """Save configuration to file.

    Args:
        config: Configuration to save
        config_path: Path to save configuration
    """
    config_dict = config.model_dump()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, 'w') as f:
        yaml.dump(config_dict, f, default_flow_style=False, sort_keys=False)
