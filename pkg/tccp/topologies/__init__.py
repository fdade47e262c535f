"""Coupler layouts.

Each layout implements the Topology interface so designs can be built from a
short list of capacitances instead of a hand-written netlist.
"""

from typing import List

from .base import Topology
from .one_pad import AsymmetricOnePadTopology, OnePadTopology
from .two_pad import AsymmetricTwoPadTopology, TwoPadTopology

# Registry of available layouts
TOPOLOGIES = {
    "two-pad": TwoPadTopology,
    "one-pad": OnePadTopology,
    "two-pad-asym": AsymmetricTwoPadTopology,
    "one-pad-asym": AsymmetricOnePadTopology,
}


def get_topology(name: str) -> Topology:
    """Get a topology instance by name.

    Raises:
        ValueError: If the layout is not registered
    """
    if name not in TOPOLOGIES:
        available = ", ".join(TOPOLOGIES.keys())
        raise ValueError(f"Topology '{name}' not supported. Available: {available}")
    return TOPOLOGIES[name]()


def list_topologies() -> List[str]:
    """Names of the registered layouts."""
    return list(TOPOLOGIES.keys())
