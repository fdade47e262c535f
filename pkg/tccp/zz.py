"""Closed-form residual ZZ through fourth order.

Anharmonicities enter as positive magnitudes. Detunings are
Delta_k = omega_C - omega_k and Delta_12 = omega_1 - omega_2.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .coupling import device_couplings
from .device import ThreeModeDevice
from .netlist import CircuitNetwork, FluxAssignment
from .spectrum import bare_ladder, device_zz_exact

logger = logging.getLogger(__name__)

SINGULAR_RATIO = 10.0


@dataclass(frozen=True)
class ZZReport:
    """Perturbative ZZ in MHz.

    validity is "ok" or "near-singular"; offending names the smallest
    denominator when it is near-singular.
    """
    zz2: float
    zz3: float
    zz4: float
    zz_total: float
    validity: str = "ok"
    offending: Optional[str] = None

    @property
    def zz_coefficient(self) -> float:
        """Coefficient of sigma_z sigma_z in the effective two-qubit Hamiltonian."""
        return self.zz_total / 4


@dataclass(frozen=True)
class ZZCompareRow:
    flux: float
    zz_pert: float
    zz_exact: float
    rel_err: Optional[float]


def zz_perturbative(omega1: float, omega2: float, omegac: float,
                    alpha1: float, alpha2: float, alphac: float,
                    g12: float, g1c: float, g2c: float) -> ZZReport:
    """Second, third and fourth order residual ZZ.

    Args:
        omega1, omega2, omegac: Mode frequencies in GHz
        alpha1, alpha2, alphac: Anharmonicities in GHz (sign ignored)
        g12, g1c, g2c: Couplings in MHz
    """
    w1, w2, wc = (np.float64(v) for v in (omega1, omega2, omegac))
    a1, a2, ac = (np.float64(abs(v)) for v in (alpha1, alpha2, alphac))
    j12, j1, j2 = (np.float64(v) / 1e3 for v in (g12, g1c, g2c))
    d1, d2, d12 = wc - w1, wc - w2, w1 - w2

    denominators = {
        "Delta12 - alpha1": d12 - a1,
        "Delta12 + alpha2": d12 + a2,
        "Delta1": d1,
        "Delta2": d2,
        "Delta1 + Delta2 - alphaC": d1 + d2 - ac,
    }

    with np.errstate(divide="ignore", invalid="ignore"):
        zz2 = -2 * j12 ** 2 * (a1 + a2) / ((d12 - a1) * (d12 + a2))
        # 1/Delta12 pairs summed in closed form so degenerate qubits stay finite;
        # the coupler loop term 2 g12 g1C g2C/(d1 d2) is folded in
        zz3 = (-4 * j12 * j1 * j2 * (1 / (d2 * (a1 - d12)) + 1 / (d1 * (a2 + d12)))
               + 4 * j12 * j1 * j2 / (d1 * d2))
        g4 = j1 ** 2 * j2 ** 2
        # 1/(d1**2 d2) and 1/(d1 d2**2) terms cancel against the closed pair
        zz4 = (2 * g4 / (d1 ** 2 * (a2 + d12))
               + 2 * g4 / (d2 ** 2 * (a1 - d12))
               - 2 * g4 / (d1 + d2 - ac) * (1 / d1 + 1 / d2) ** 2)

    # couplings that vanish remove their terms entirely
    if j12 == 0:
        zz2 = zz3 = np.float64(0.0)
    if j1 == 0 or j2 == 0:
        zz3 = zz4 = np.float64(0.0)

    validity, offending = "ok", None
    threshold = SINGULAR_RATIO * max(abs(j12), abs(j1), abs(j2))
    if threshold > 0:
        name, value = min(denominators.items(), key=lambda item: abs(item[1]))
        if abs(value) < threshold:
            validity, offending = "near-singular", name
            logger.debug("ZZ expansion near-singular: |%s| = %.4g GHz < %.4g GHz",
                         name, abs(value), threshold)

    total = zz2 + zz3 + zz4
    return ZZReport(zz2=1e3 * float(zz2), zz3=1e3 * float(zz3), zz4=1e3 * float(zz4),
                    zz_total=1e3 * float(total), validity=validity, offending=offending)


def zz_for_device(device: ThreeModeDevice) -> ZZReport:
    """Perturbative ZZ from the oracle's own bare ladders and the device couplings."""
    (w1, a1), (wc, ac), (w2, a2) = (bare_ladder(m) for m in (device.q1, device.coupler, device.q2))
    g = device_couplings(device)
    return zz_perturbative(w1, w2, wc, a1, a2, ac, g.g12, g.g1c, g.g2c)


def zz_compare(network: CircuitNetwork, flux_grid: Sequence[float],
               base_flux: Optional[FluxAssignment] = None, coupler: Optional[str] = None,
               levels: int = 5, runner=None) -> List[ZZCompareRow]:
    """Perturbative against exact ZZ over a coupler flux grid."""
    from .sweep import GridRunner

    base_flux = dict(base_flux or {})
    name = ThreeModeDevice.from_network(network, base_flux, coupler=coupler).names[1]
    runner = runner or GridRunner()

    def row(value: float) -> ZZCompareRow:
        flux = dict(base_flux)
        flux[name] = value
        device = ThreeModeDevice.from_network(network, flux, coupler=coupler)
        pert = zz_for_device(device).zz_total
        exact = device_zz_exact(device, levels)
        if exact == 0:
            rel = 0.0 if pert == 0 else None
        else:
            rel = abs(pert - exact) / abs(exact)
        return ZZCompareRow(flux=float(value), zz_pert=pert, zz_exact=exact, rel_err=rel)

    return runner.map(row, list(flux_grid), description="Comparing ZZ")
