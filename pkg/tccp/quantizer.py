"""Circuit quantization: capacitance matrix, junction block, energies, modes.

Energies and frequencies are in GHz with h = 1, capacitances in fF and inverse
capacitances in 1/fF.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import constants, linalg, optimize

from .errors import BracketError, DegenerateNetworkError, ZeroJunctionError
from .netlist import CircuitNetwork, FluxAssignment, validate_flux

logger = logging.getLogger(__name__)

# e^2 / (2h) expressed in GHz * fF
E2_OVER_2H = constants.e ** 2 / (2 * constants.h) / 1e-15 / 1e9

TRANSMON_RATIO = 20.0
DENOMINATOR_EPS = 1e-12


@dataclass(frozen=True)
class CapMatrix:
    """Dense symmetric capacitance matrix over all nodes, in fF."""
    names: Tuple[str, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class InverseBlock:
    """Junction rows and columns of the inverse capacitance matrix, in 1/fF."""
    names: Tuple[str, ...]
    matrix: np.ndarray

    def entry(self, a: str, b: str) -> float:
        return float(self.matrix[self.names.index(a), self.names.index(b)])


@dataclass(frozen=True)
class EnergyTable:
    """Charging energies per junction and coupling energies per pair, in GHz."""
    names: Tuple[str, ...]
    charging: Dict[str, float]
    coupling: Dict[Tuple[str, str], float] = field(default_factory=dict)

    def pair(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        return self.coupling.get(key, 0.0)


@dataclass(frozen=True)
class JunctionState:
    """Flux-dependent effective Josephson energy and junction phase offset."""
    ej: float
    phi0: float


@dataclass(frozen=True)
class ModeParams:
    """Transmon mode parameters from the sixth-order expansion."""
    ej: float
    ec: float
    omega: float
    alpha: float
    xi: float
    n_zpf: float
    phi_zpf: float
    outside_transmon_regime: bool


@dataclass(frozen=True)
class QuantizedCircuit:
    """Everything the quantizer knows about a network at one flux point."""
    network: CircuitNetwork
    flux: FluxAssignment
    block: InverseBlock
    energies: EnergyTable
    junctions: Dict[str, JunctionState]
    modes: Dict[str, ModeParams]


def assemble_cap_matrix(network: CircuitNetwork) -> CapMatrix:
    """Build the Maxwell capacitance matrix.

    Diagonal entries are ground capacitance plus junction shunt plus every
    mutual capacitance touching the node; off-diagonal entries are the negated
    mutual capacitances.
    """
    names = tuple(network.names)
    index = {name: i for i, name in enumerate(names)}
    matrix = np.zeros((len(names), len(names)))
    for node in network.nodes:
        i = index[node.name]
        matrix[i, i] += network.ground_caps.get(node.name, 0.0) + node.shunt
    for (a, b), cap in network.mutual_caps.items():
        i, j = index[a], index[b]
        matrix[i, i] += cap
        matrix[j, j] += cap
        matrix[i, j] -= cap
        matrix[j, i] -= cap
    return CapMatrix(names=names, matrix=matrix)


def _check_positive_definite(capmatrix: CapMatrix) -> None:
    diagonal = np.diag(capmatrix.matrix)
    for name, value in zip(capmatrix.names, diagonal):
        if value <= 0:
            raise DegenerateNetworkError("node has zero total capacitance", name)
    try:
        np.linalg.cholesky(capmatrix.matrix)
    except np.linalg.LinAlgError:
        raise DegenerateNetworkError(
            "capacitance matrix is singular or not positive definite (no path to ground?)")


def schur_junction_block(capmatrix: CapMatrix, network: CircuitNetwork) -> InverseBlock:
    """Invert the Schur complement that eliminates passive nodes."""
    junctions = [capmatrix.names.index(n) for n in network.junction_names]
    passive = [capmatrix.names.index(n) for n in network.passive_names]
    c = capmatrix.matrix
    c_jj = c[np.ix_(junctions, junctions)]
    if passive:
        c_jp = c[np.ix_(junctions, passive)]
        c_pp = c[np.ix_(passive, passive)]
        c_jj = c_jj - c_jp @ linalg.solve(c_pp, c_jp.T, assume_a="pos")
    return InverseBlock(names=tuple(network.junction_names), matrix=linalg.inv(c_jj))


def reduce_to_junction_block(capmatrix: CapMatrix, network: CircuitNetwork) -> InverseBlock:
    """Junction block of the full inverse, cross-checked by Schur elimination.

    Raises:
        DegenerateNetworkError: Singular matrix or disagreeing eliminations
    """
    _check_positive_definite(capmatrix)
    junctions = [capmatrix.names.index(n) for n in network.junction_names]
    full = linalg.inv(capmatrix.matrix)
    block = full[np.ix_(junctions, junctions)]
    block = 0.5 * (block + block.T)

    schur = schur_junction_block(capmatrix, network).matrix
    if not np.allclose(block, schur, rtol=1e-8, atol=1e-12 * np.abs(block).max()):
        raise DegenerateNetworkError("capacitance matrix too ill-conditioned to invert reliably")
    return InverseBlock(names=tuple(network.junction_names), matrix=block)


def _require(denominator: float, what: str) -> float:
    if abs(denominator) < DENOMINATOR_EPS:
        raise DegenerateNetworkError(f"degenerate network: {what} denominator vanishes")
    return denominator


def symmetric_two_pad_inverse(cQG: float, cPG: float, cCG: float,
                              cQP: float, cPC: float, cP12: float) -> InverseBlock:
    """Closed-form junction block for the symmetric two-pad layout Q1-P1-C-P2-Q2.

    Returns:
        Block over (Q1, C, Q2)
    """
    c12, c23, c24 = cQP, cPC, cP12
    c1s = cQG + cQP
    c2s = cPG + cQP + cPC + cP12
    c3s = cCG + 2 * cPC

    d = _require(2 * c1s * c23 ** 2 + c12 ** 2 * c3s + c1s * c3s * (c24 - c2s), "D")
    outer = _require(c12 ** 2 - c1s * (c24 + c2s), "qubit")

    a11 = (-c1s * (c24 + c2s) * (2 * c23 ** 2 + c3s * (c24 - c2s))
           + c12 ** 2 * (c23 ** 2 - c2s * c3s)) / (outer * d)
    a33 = (c12 ** 2 + c1s * (c24 - c2s)) / d
    a13 = -c12 * c23 / d
    a15 = c12 ** 2 * (c23 ** 2 + c24 * c3s) / (outer * d)

    matrix = np.array([[a11, a13, a15],
                       [a13, a33, a13],
                       [a15, a13, a11]])
    return InverseBlock(names=("Q1", "C", "Q2"), matrix=matrix)


def symmetric_one_pad_inverse(cQG: float, cPG: float, cCG: float,
                              cQP: float, cPC: float) -> InverseBlock:
    """Closed-form junction block for the symmetric one-pad layout (Q1, P, C, Q2).

    Returns:
        Block over (Q1, C, Q2)
    """
    c12, c23 = cQP, cPC
    c1s = _require(cQG + cQP, "qubit")
    c2s = cPG + 2 * cQP + cPC
    c3s = cCG + cPC

    bracket = _require(2 * c12 ** 2 * c3s + c1s * (c23 ** 2 - c2s * c3s), "D")

    a11 = (c12 ** 2 * c3s + c1s * (c23 ** 2 - c2s * c3s)) / (c1s * bracket)
    a33 = (2 * c12 ** 2 - c1s * c2s) / bracket
    a13 = -c12 * c23 / bracket
    a14 = -c12 ** 2 * c3s / (c1s * bracket)

    matrix = np.array([[a11, a13, a14],
                       [a13, a33, a13],
                       [a14, a13, a11]])
    return InverseBlock(names=("Q1", "C", "Q2"), matrix=matrix)


def energies_from_inverse(block: InverseBlock) -> EnergyTable:
    """E_Cj = e^2 A_jj / 2 and E_jk = e^2 A_jk / 2, in GHz."""
    names = block.names
    charging = {name: E2_OVER_2H * float(block.matrix[i, i]) for i, name in enumerate(names)}
    coupling = {}
    for i, a in enumerate(names):
        for j in range(i + 1, len(names)):
            b = names[j]
            key = (a, b) if a <= b else (b, a)
            coupling[key] = E2_OVER_2H * float(block.matrix[i, j])
    return EnergyTable(names=names, charging=charging, coupling=coupling)


def equivalent_capacitance(block: InverseBlock) -> Dict[str, float]:
    """Equivalent ground capacitance 1/A_jj per junction node, in fF."""
    return {name: 1.0 / float(block.matrix[i, i]) for i, name in enumerate(block.names)}


def squid_effective_ej(ejb: float, ejs: float, flux: float) -> JunctionState:
    """Effective Josephson energy and phase offset of an asymmetric DC SQUID.

    Args:
        ejb: Larger junction energy in GHz
        ejs: Smaller junction energy in GHz
        flux: External flux in units of the flux quantum
    """
    if ejb == 0 and ejs == 0:
        raise ZeroJunctionError("SQUID with ejb = ejs = 0 has no Josephson energy")
    ej_sq = ejs ** 2 + ejb ** 2 + 2 * ejs * ejb * math.cos(2 * math.pi * flux)
    ej = math.sqrt(max(ej_sq, 0.0))
    phi0 = math.atan((ejs - ejb) / (ejs + ejb) * math.tan(math.pi * flux))
    return JunctionState(ej=ej, phi0=phi0)


def mode_params(ej: float, ec: float) -> ModeParams:
    """Sixth-order corrected transmon mode parameters."""
    if ej <= 0:
        raise ZeroJunctionError(f"no Josephson energy left at this flux (E_J = {ej:.4g} GHz)")
    if ec <= 0:
        raise DegenerateNetworkError(f"charging energy E_C = {ec:.4g} GHz is not positive")
    xi = math.sqrt(2 * ec / ej)
    omega = math.sqrt(8 * ej * ec) - ec * (1 - xi / 4)
    n_zpf = (ej / (8 * ec)) ** 0.25 / math.sqrt(2)
    phi_zpf = (8 * ec / ej) ** 0.25 / math.sqrt(2)
    outside = ej / ec < TRANSMON_RATIO
    if outside:
        logger.warning("E_J/E_C = %.3g is below %g; transmon expansion is unreliable",
                       ej / ec, TRANSMON_RATIO)
    return ModeParams(ej=ej, ec=ec, omega=omega, alpha=-ec, xi=xi,
                      n_zpf=n_zpf, phi_zpf=phi_zpf, outside_transmon_regime=outside)


def _omega(ej: float, ec: float) -> float:
    return math.sqrt(8 * ej * ec) - ec * (1 - math.sqrt(2 * ec / ej) / 4)


def infer_ej_from_frequency(omega_target: float, ec: float) -> float:
    """Invert the sixth-order frequency formula for E_J.

    Raises:
        BracketError: If no solution lies in [E_C, 1e4 E_C]
    """
    if omega_target <= 0 or ec <= 0:
        raise ValueError("omega_target and E_C must be positive")
    lo, hi = ec, 1e4 * ec
    f_lo, f_hi = _omega(lo, ec) - omega_target, _omega(hi, ec) - omega_target
    if f_lo * f_hi > 0:
        raise BracketError(
            f"no E_J in [{lo:.4g}, {hi:.4g}] GHz gives omega = {omega_target} GHz at E_C = {ec}")
    return optimize.brentq(lambda ej: _omega(ej, ec) - omega_target, lo, hi,
                           xtol=1e-13, rtol=1e-14, maxiter=200)


def flux_for_ej(ejb: float, ejs: float, ej: float) -> float:
    """Flux in [0, 1/2] at which the SQUID reaches a given E_J.

    Raises:
        BracketError: If E_J is outside [ejb - ejs, ejb + ejs]
    """
    if ejs == 0:
        if math.isclose(ej, ejb, rel_tol=1e-12, abs_tol=1e-12):
            return 0.0
        raise BracketError(f"single junction is fixed at E_J = {ejb} GHz")
    cos_value = (ej ** 2 - ejs ** 2 - ejb ** 2) / (2 * ejs * ejb)
    if cos_value > 1 + 1e-12 or cos_value < -1 - 1e-12:
        raise BracketError(
            f"E_J = {ej} GHz is outside the SQUID range [{ejb - ejs}, {ejb + ejs}] GHz")
    return math.acos(min(1.0, max(-1.0, cos_value))) / (2 * math.pi)


def flux_for_frequency(network: CircuitNetwork, name: str, omega: float,
                       ec: Optional[float] = None) -> float:
    """Flux bias that puts a junction mode at a target frequency.

    Args:
        network: Circuit network
        name: Junction node name
        omega: Target mode frequency in GHz
        ec: Charging energy; computed from the network when omitted
    """
    node = network.node(name)
    if ec is None:
        block = reduce_to_junction_block(assemble_cap_matrix(network), network)
        ec = energies_from_inverse(block).charging[name]
    return flux_for_ej(node.ejb, node.ejs, infer_ej_from_frequency(omega, ec))


def quantize(network: CircuitNetwork, flux: Optional[FluxAssignment] = None,
             ej_overrides: Optional[Dict[str, float]] = None) -> QuantizedCircuit:
    """Run the full quantizer chain at one flux point.

    Args:
        network: Circuit network
        flux: External flux per junction node (missing nodes sit at 0)
        ej_overrides: Fixed E_J values replacing the SQUID result for some nodes
    """
    flux = validate_flux(network, flux or {})
    block = reduce_to_junction_block(assemble_cap_matrix(network), network)
    energies = energies_from_inverse(block)
    junctions = {}
    modes = {}
    for name in network.junction_names:
        node = network.node(name)
        state = squid_effective_ej(node.ejb, node.ejs, flux[name])
        if ej_overrides and name in ej_overrides:
            state = JunctionState(ej=ej_overrides[name], phi0=state.phi0)
        junctions[name] = state
        modes[name] = mode_params(state.ej, energies.charging[name])
    return QuantizedCircuit(network=network, flux=flux, block=block, energies=energies,
                            junctions=junctions, modes=modes)
