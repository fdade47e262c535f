"""Analytic coupling model of the qubit-coupler-qubit device.

Coupling strengths are in MHz, frequencies in GHz. The effective qubit-qubit
coupling follows the second-order Schrieffer-Wolff result, with both the
rotating (1/Delta) and counter-rotating (1/Sigma) contributions kept.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .device import ThreeModeDevice
from .errors import BracketError, ResonanceError, ZeroJunctionError
from .netlist import CircuitNetwork, FluxAssignment
from .quantizer import ModeParams

logger = logging.getLogger(__name__)

RESONANCE_GHZ = 1e-6
OFF_TOLERANCE_MHZ = 1e-3
MAX_ITERATIONS = 80


class Couplings(NamedTuple):
    g12: float
    g1c: float
    g2c: float


@dataclass(frozen=True)
class CouplingReport:
    """Effective coupling at one operating point."""
    g12: float
    g1c: float
    g2c: float
    omega1: float
    omega2: float
    omegac: float
    delta1: float
    delta2: float
    sigma1: float
    sigma2: float
    g_eff: float
    omega1_eff: float
    omega2_eff: float


@dataclass(frozen=True)
class FluxSweepRow:
    """One point of a flux sweep; valid is False near qubit-coupler resonance."""
    flux: float
    ejc: Optional[float]
    omegac: Optional[float]
    g1c: Optional[float]
    g2c: Optional[float]
    g_eff: Optional[float]
    zz_pert: Optional[float] = None
    zz_exact: Optional[float] = None
    valid: bool = True


def pairwise_g(e_jk: float, mode_j: ModeParams, mode_k: ModeParams) -> float:
    """Exchange coupling in MHz from a coupling charging energy in GHz."""
    ratio = (mode_j.ej * mode_k.ej / (mode_j.ec * mode_k.ec)) ** 0.25
    return 1e3 * e_jk / math.sqrt(2) * ratio * (1 - (mode_j.xi + mode_k.xi) / 8)


def device_couplings(device: ThreeModeDevice) -> Couplings:
    """g12, g1C, g2C of a device, honouring any fixed overrides."""
    q1, c, q2 = device.q1, device.coupler, device.q2
    computed = {
        "g12": pairwise_g(device.e12, q1, q2),
        "g1c": pairwise_g(device.e1c, q1, c),
        "g2c": pairwise_g(device.e2c, q2, c),
    }
    computed.update(device.g_overrides)
    return Couplings(**computed)


def effective_coupling(g12: float, g1c: float, g2c: float,
                       omega1: float, omega2: float, omegac: float) -> CouplingReport:
    """Effective qubit-qubit coupling and dispersively shifted qubit frequencies.

    Raises:
        ResonanceError: If the coupler is within 1 kHz of either qubit
    """
    delta1, delta2 = omegac - omega1, omegac - omega2
    sigma1, sigma2 = omegac + omega1, omegac + omega2
    for name, delta in (("qubit 1", delta1), ("qubit 2", delta2)):
        if abs(delta) < RESONANCE_GHZ:
            raise ResonanceError(f"coupler is resonant with {name} (detuning {delta:.3g} GHz)")

    # MHz^2 * (1/GHz) -> MHz
    mediated = sum(1 / d + 1 / s for d, s in ((delta1, sigma1), (delta2, sigma2))) / 1e3
    g_eff = g12 - g1c * g2c / 2 * mediated
    omega1_eff = omega1 - (g1c / 1e3) ** 2 * (1 / delta1 + 1 / sigma1)
    omega2_eff = omega2 - (g2c / 1e3) ** 2 * (1 / delta2 + 1 / sigma2)
    return CouplingReport(g12=g12, g1c=g1c, g2c=g2c, omega1=omega1, omega2=omega2, omegac=omegac,
                          delta1=delta1, delta2=delta2, sigma1=sigma1, sigma2=sigma2,
                          g_eff=g_eff, omega1_eff=omega1_eff, omega2_eff=omega2_eff)


def coupling_report(device: ThreeModeDevice) -> CouplingReport:
    g = device_couplings(device)
    return effective_coupling(g.g12, g.g1c, g.g2c,
                              device.q1.omega, device.q2.omega, device.coupler.omega)


def _device_at(network: CircuitNetwork, base_flux: FluxAssignment, name: str, value: float,
               coupler: Optional[str]) -> ThreeModeDevice:
    flux = dict(base_flux)
    flux[name] = value
    return ThreeModeDevice.from_network(network, flux, coupler=coupler)


def solve_off_point(fn, lo: float, hi: float, what: str) -> float:
    """Bracketed root of a signed coupling function, to 1 kHz."""
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if f_lo * f_hi > 0:
        raise BracketError(
            f"g_eff does not change sign over the {what} bracket "
            f"[{lo:.6g}, {hi:.6g}] ({f_lo:.4g} and {f_hi:.4g} MHz)")
    root, result = optimize.brentq(fn, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                                   maxiter=MAX_ITERATIONS, full_output=True, disp=False)
    residual = fn(root)
    if abs(residual) >= OFF_TOLERANCE_MHZ:
        raise BracketError(
            f"off-point search stopped after {result.iterations} iterations "
            f"with |g_eff| = {abs(residual):.3g} MHz")
    logger.debug("off point at %s = %.10g after %d iterations", what, root, result.iterations)
    return root


def coupler_off_point(network: CircuitNetwork, flux_lo: float, flux_hi: float,
                      base_flux: Optional[FluxAssignment] = None,
                      coupler: Optional[str] = None) -> Tuple[float, float]:
    """Coupler flux where the analytic g_eff vanishes.

    Every quantity that depends on the coupler flux (E_JC, xi_C, g_kC, omega_C)
    is re-evaluated at each iterate.

    Returns:
        (flux_off, omegac_off)

    Raises:
        BracketError: No sign change of g_eff over [flux_lo, flux_hi]
        ResonanceError: The coupler crosses a qubit inside the bracket
    """
    base_flux = dict(base_flux or {})
    name = ThreeModeDevice.from_network(network, base_flux, coupler=coupler).names[1]

    ends = [coupling_report(_device_at(network, base_flux, name, f, coupler))
            for f in (flux_lo, flux_hi)]
    for attr in ("delta1", "delta2"):
        if getattr(ends[0], attr) * getattr(ends[1], attr) < 0:
            raise ResonanceError("coupler crosses a qubit frequency inside the flux bracket")

    def g_eff(value: float) -> float:
        return coupling_report(_device_at(network, base_flux, name, value, coupler)).g_eff

    flux_off = solve_off_point(g_eff, flux_lo, flux_hi, "flux")
    omegac = _device_at(network, base_flux, name, flux_off, coupler).coupler.omega
    return flux_off, omegac


def coupler_off_point_frozen(g12: float, g1c: float, g2c: float, omega1: float, omega2: float,
                             omegac_lo: Optional[float] = None,
                             omegac_hi: Optional[float] = None) -> float:
    """Coupler frequency in GHz where g_eff vanishes for fixed couplings.

    The default bracket runs from just above the higher qubit to 100 GHz above it.
    """
    top = max(omega1, omega2)
    lo = top + 1e-3 if omegac_lo is None else omegac_lo
    hi = top + 100.0 if omegac_hi is None else omegac_hi

    def g_eff(omegac: float) -> float:
        return effective_coupling(g12, g1c, g2c, omega1, omega2, omegac).g_eff

    return solve_off_point(g_eff, lo, hi, "coupler frequency")


def sweep_flux(network: CircuitNetwork, junction_name: str, flux_grid: Sequence[float],
               base_flux: Optional[FluxAssignment] = None, coupler: Optional[str] = None,
               levels: Optional[int] = None, invalid_ratio: float = 3.0,
               runner=None) -> List[FluxSweepRow]:
    """Sweep one junction's flux and tabulate the coupling model.

    Args:
        network: Circuit network
        junction_name: Junction whose flux is swept (usually the coupler)
        flux_grid: Strictly increasing flux values
        base_flux: Flux of the other junctions
        coupler: Coupler node name (see identify_modes)
        levels: Also compute the exact ZZ with this many levels per mode
        invalid_ratio: Rows with |Delta_k| < ratio * g_kC are flagged invalid
        runner: GridRunner for parallel evaluation
    """
    from .sweep import GridRunner
    from .zz import zz_for_device

    if junction_name not in network.junction_names:
        raise ValueError(f"junction '{junction_name}' not found in network")
    grid = [float(f) for f in flux_grid]
    if not grid:
        raise ValueError("flux grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("flux grid must be strictly increasing")
    base_flux = dict(base_flux or {})
    runner = runner or GridRunner()

    def row(value: float) -> FluxSweepRow:
        try:
            device = _device_at(network, base_flux, junction_name, value, coupler)
        except ZeroJunctionError as e:
            logger.warning("flux %.6g: %s, row marked invalid", value, e)
            return FluxSweepRow(flux=value, ejc=None, omegac=None, g1c=None, g2c=None,
                                g_eff=None, valid=False)
        g = device_couplings(device)
        coupler_mode = device.coupler
        try:
            report = effective_coupling(g.g12, g.g1c, g.g2c,
                                        device.q1.omega, device.q2.omega, coupler_mode.omega)
        except ResonanceError:
            return FluxSweepRow(flux=value, ejc=coupler_mode.ej, omegac=coupler_mode.omega,
                                g1c=g.g1c, g2c=g.g2c, g_eff=None, valid=False)
        valid = (abs(report.delta1) * 1e3 >= invalid_ratio * abs(g.g1c)
                 and abs(report.delta2) * 1e3 >= invalid_ratio * abs(g.g2c))
        zz_pert = zz_exact = None
        if valid:
            zz_pert = zz_for_device(device).zz_total
            if levels is not None:
                from .spectrum import device_zz_exact
                zz_exact = device_zz_exact(device, levels)
        else:
            logger.warning("flux %.6g: coupler within %g g of a qubit, row marked invalid",
                           value, invalid_ratio)
        return FluxSweepRow(flux=value, ejc=coupler_mode.ej, omegac=coupler_mode.omega,
                            g1c=g.g1c, g2c=g.g2c, g_eff=report.g_eff,
                            zz_pert=zz_pert, zz_exact=zz_exact, valid=valid)

    return runner.map(row, grid, description=f"Sweeping {junction_name}")
