"""Shared fixtures: the four reference designs and CLI helpers."""

from pathlib import Path

import pytest
import yaml
from click.testing import CliRunner

from tccp.netlist import load_netlist

DESIGNS = Path(__file__).resolve().parent.parent / "designs"

DESIGN_A_CAPS = {"cQG": 72.5, "cPG": 61.7, "cCG": 25.1, "cQP": 11.5, "cPC": 17.8, "cP12": 21.0}
DESIGN_B_CAPS = {"cQG": 72.4, "cPG": 42.2, "cCG": 32.5, "cQP": 11.0, "cPC": 12.3, "cP12": 13.6}
DESIGN_C_CAPS = {"cQG": 71.7, "cPG": 108.8, "cCG": 36.0, "cQP": 6.9, "cPC": 23.7}
DESIGN_D_CAPS = {"cQG": 71.8, "cPG": 74.7, "cCG": 28.2, "cQP": 8.8, "cPC": 32.8}


def design_path(name: str) -> Path:
    return DESIGNS / f"design_{name}.net"


@pytest.fixture
def design_a():
    return load_netlist(design_path("a"))


@pytest.fixture
def design_b():
    return load_netlist(design_path("b"))


@pytest.fixture
def design_c():
    return load_netlist(design_path("c"))


@pytest.fixture
def design_d():
    return load_netlist(design_path("d"))


@pytest.fixture
def runner():
    """Create a CLI runner."""
    return CliRunner()


@pytest.fixture
def temp_config(tmp_path):
    """Create a temporary configuration file with sequential sweeps."""
    config_data = {
        "solver": {"levels": 4},
        "sweep": {"parallel_workers": 1, "show_progress": False},
        "output": {"format": "csv", "significant_digits": 12},
        "logging": {"level": "ERROR"},
    }
    config_file = tmp_path / "tccp.yaml"
    with open(config_file, 'w') as f:
        yaml.dump(config_data, f)
    return config_file
