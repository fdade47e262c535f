"""Base interface for coupler layouts.

A topology turns a handful of named capacitances plus SQUID parameters into a
full CircuitNetwork, and optionally knows a closed form for the junction block
of the inverse capacitance matrix.
"""

from abc import ABC, abstractmethod
from typing import Dict, List, Mapping, Optional, Tuple

from ..netlist import CircuitNetwork, NodeKind, NodeSpec
from ..quantizer import InverseBlock

Squid = Tuple[float, float]


class Topology(ABC):
    """Abstract base class for a two-qubit tunable-coupler layout.

    Junction nodes are always named Q1, C and Q2.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name (e.g. 'two-pad')."""

    @property
    @abstractmethod
    def description(self) -> str:
        """One-line description for listings."""

    @property
    @abstractmethod
    def capacitance_names(self) -> Tuple[str, ...]:
        """Names of the capacitances build() expects, in fF."""

    @property
    @abstractmethod
    def passive_nodes(self) -> Tuple[str, ...]:
        """Passive node names in declaration order."""

    @abstractmethod
    def node_order(self) -> Tuple[str, ...]:
        """All node names in declaration order."""

    @abstractmethod
    def ground_caps(self, caps: Mapping[str, float]) -> Dict[str, float]:
        """Capacitance to ground per node."""

    @abstractmethod
    def mutual_caps(self, caps: Mapping[str, float]) -> Dict[Tuple[str, str], float]:
        """Mutual capacitances per node pair."""

    def closed_form_inverse(self, caps: Mapping[str, float]) -> Optional[InverseBlock]:
        """Closed-form junction block, or None when the layout has none."""
        return None

    def check_caps(self, caps: Mapping[str, float]) -> None:
        missing = [c for c in self.capacitance_names if c not in caps]
        if missing:
            raise ValueError(f"topology '{self.name}' needs capacitances: {', '.join(missing)}")
        unknown = [c for c in caps if c not in self.capacitance_names]
        if unknown:
            raise ValueError(f"topology '{self.name}' has no capacitance named {', '.join(unknown)}")

    def build(self, caps: Mapping[str, float], qubit: Squid, coupler: Squid,
              qubit2: Optional[Squid] = None) -> CircuitNetwork:
        """Build the network.

        Args:
            caps: Capacitances keyed by capacitance_names
            qubit: (ejb, ejs) for Q1, and for Q2 unless qubit2 is given
            coupler: (ejb, ejs) for the coupler
            qubit2: Optional (ejb, ejs) for Q2
        """
        self.check_caps(caps)
        squids = {"Q1": qubit, "C": coupler, "Q2": qubit2 or qubit}
        nodes: List[NodeSpec] = []
        for name in self.node_order():
            if name in squids:
                ejb, ejs = squids[name]
                nodes.append(NodeSpec(name=name, kind=NodeKind.JUNCTION, ejb=ejb, ejs=ejs))
            else:
                nodes.append(NodeSpec(name=name, kind=NodeKind.PASSIVE))
        ground = {k: v for k, v in self.ground_caps(caps).items() if v != 0}
        mutual = {k: v for k, v in self.mutual_caps(caps).items() if v != 0}
        return CircuitNetwork(nodes=nodes, ground_caps=ground, mutual_caps=mutual)
