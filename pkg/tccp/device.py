"""Three-mode device snapshot: two qubits and a tunable coupler at one flux point."""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from .errors import BracketError
from .netlist import CircuitNetwork, FluxAssignment
from .quantizer import ModeParams, flux_for_ej, infer_ej_from_frequency, mode_params, quantize

logger = logging.getLogger(__name__)

COUPLING_KEYS = ("g12", "g1c", "g2c")


def identify_modes(network: CircuitNetwork, coupler: Optional[str] = None) -> Tuple[str, str, str]:
    """Pick (qubit 1, coupler, qubit 2) among the junction nodes.

    Without an explicit coupler name a junction called ``C`` is used, otherwise
    the second junction in declaration order.
    """
    junctions = network.junction_names
    if len(junctions) != 3:
        raise ValueError(
            f"expected three junction nodes (two qubits and a coupler), found {len(junctions)}")
    if coupler is None:
        coupler = "C" if "C" in junctions else junctions[1]
    if coupler not in junctions:
        raise ValueError(f"coupler '{coupler}' is not a junction node")
    q1, q2 = [name for name in junctions if name != coupler]
    return q1, coupler, q2


@dataclass(frozen=True)
class ThreeModeDevice:
    """Mode parameters and coupling energies of a qubit-coupler-qubit device.

    Attributes:
        names: (qubit 1, coupler, qubit 2)
        modes: ModeParams per junction name
        e12, e1c, e2c: Coupling charging energies in GHz
        flux: Flux assignment the device was evaluated at
        g_overrides: Fixed coupling strengths in MHz replacing the computed ones
    """
    names: Tuple[str, str, str]
    modes: Dict[str, ModeParams]
    e12: float
    e1c: float
    e2c: float
    flux: FluxAssignment = field(default_factory=dict)
    g_overrides: Dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_network(cls, network: CircuitNetwork, flux: Optional[FluxAssignment] = None,
                     coupler: Optional[str] = None,
                     ej_overrides: Optional[Dict[str, float]] = None) -> "ThreeModeDevice":
        q1, c, q2 = identify_modes(network, coupler)
        circuit = quantize(network, flux, ej_overrides)
        energies = circuit.energies
        return cls(names=(q1, c, q2), modes=circuit.modes,
                   e12=energies.pair(q1, q2), e1c=energies.pair(q1, c), e2c=energies.pair(q2, c),
                   flux=circuit.flux)

    @property
    def q1(self) -> ModeParams:
        return self.modes[self.names[0]]

    @property
    def coupler(self) -> ModeParams:
        return self.modes[self.names[1]]

    @property
    def q2(self) -> ModeParams:
        return self.modes[self.names[2]]

    def with_ej(self, name: str, ej: float) -> "ThreeModeDevice":
        """Copy with one junction's E_J replaced."""
        modes = dict(self.modes)
        modes[name] = mode_params(ej, modes[name].ec)
        return replace(self, modes=modes)

    def with_qubits_resonant(self) -> "ThreeModeDevice":
        """Retune qubit 2's E_J so both sixth-order qubit frequencies coincide."""
        name = self.names[2]
        ej = infer_ej_from_frequency(self.q1.omega, self.q2.ec)
        device = self.with_ej(name, ej)
        logger.debug("retuned %s to E_J = %.6f GHz (omega = %.6f GHz)", name, ej, device.q2.omega)
        return device

    def with_couplings(self, **overrides: float) -> "ThreeModeDevice":
        """Copy with fixed coupling strengths (keys g12, g1c, g2c in MHz)."""
        unknown = set(overrides) - set(COUPLING_KEYS)
        if unknown:
            raise ValueError(f"unknown coupling override(s): {', '.join(sorted(unknown))}")
        merged = dict(self.g_overrides)
        merged.update({k: float(v) for k, v in overrides.items() if v is not None})
        return replace(self, g_overrides=merged)

    def qubit_flux(self, network: CircuitNetwork, name: str) -> Optional[float]:
        """Flux that would realize the current E_J of a junction, if the SQUID can."""
        node = network.node(name)
        try:
            return flux_for_ej(node.ejb, node.ejs, self.modes[name].ej)
        except BracketError:
            return None
