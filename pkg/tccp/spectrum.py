"""Numerically exact reference for the three-mode device.

The Hamiltonian is the tensor product of three truncated anharmonic ladders
(mode order Q1, C, Q2) with charge-charge exchange terms kept in full, without
the rotating-wave approximation. Bare states are labelled by occupation
strings such as ``"101"``.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize

from .coupling import device_couplings, solve_off_point
from .device import ThreeModeDevice
from .errors import BracketError, CutoffError, FitError, LabelAmbiguityError
from .netlist import CircuitNetwork, FluxAssignment
from .quantizer import ModeParams

logger = logging.getLogger(__name__)

LABEL_THRESHOLD = 0.5
CONVERGENCE_TOLERANCE = 0.01


@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Dense Hamiltonian in GHz over levels**3 Fock states."""
    levels: int
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def index(self, label: str) -> int:
        return bare_index(label, self.levels)


@dataclass(frozen=True)
class QubitBlock:
    """Effective two-level Hamiltonian of the single-excitation qubit manifold.

    h_eff is expressed in the bare (|100>, |001>) basis, in GHz; g is its
    off-diagonal element in MHz.
    rotation[k] holds the eigenvector weights of the dressed state that
    stands in for bare state k.
    """
    h_eff: np.ndarray
    energies: Tuple[float, float]
    weight: float
    indices: Tuple[int, int] = (0, 0)
    rotation: Optional[np.ndarray] = None

    @property
    def g(self) -> float:
        return 1e3 * float(self.h_eff[0, 1])

    @property
    def half_gap(self) -> float:
        return 1e3 * (self.energies[1] - self.energies[0]) / 2


@dataclass(frozen=True)
class AnticrossResult:
    """Qubit-coupler anticrossing: fitted g_QC in MHz and the data it came from."""
    g_qc: float
    center: float
    detuning: np.ndarray
    gap: np.ndarray
    flux: np.ndarray

    @property
    def min_gap(self) -> float:
        return float(self.gap.min())


def bare_index(label: str, levels: int) -> int:
    """Basis index of an occupation label like '101'."""
    if len(label) != 3 or not label.isdigit():
        raise ValueError(f"bare-state label must be three digits, got '{label}'")
    n1, nc, n2 = (int(ch) for ch in label)
    if max(n1, nc, n2) >= levels:
        raise ValueError(f"label '{label}' needs more than {levels} levels per mode")
    return (n1 * levels + nc) * levels + n2


def bare_label(index: int, levels: int) -> str:
    n1, rest = divmod(index, levels * levels)
    nc, n2 = divmod(rest, levels)
    return f"{n1}{nc}{n2}"


def ladder_energies(mode: ModeParams, levels: int) -> np.ndarray:
    """Single-mode energies from the sixth-order number-operator polynomial."""
    n = np.arange(levels, dtype=float)
    linear = mode.omega + mode.ec / 2 * (1 - 5 * mode.xi / 18)
    kerr = mode.ec / 2 * (1 - mode.xi / 6)
    return (linear - kerr * n) * n


def bare_ladder(mode: ModeParams) -> Tuple[float, float]:
    """(omega01, anharmonicity) of the oracle's own single-mode ladder, in GHz."""
    e = ladder_energies(mode, 3)
    return float(e[1] - e[0]), float(e[2] - 2 * e[1] + e[0])


def _charge_operator(levels: int) -> np.ndarray:
    # (a^dagger - a)
    a = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1)
    return a.T - a


def hamiltonian_from_modes(modes: Sequence[ModeParams], g12: float, g1c: float, g2c: float,
                           levels: int) -> TruncatedHamiltonian:
    """Assemble the three-mode Hamiltonian.

    Args:
        modes: ModeParams for (Q1, C, Q2)
        g12, g1c, g2c: Exchange couplings in MHz
        levels: Fock levels per mode (>= 3)
    """
    if levels < 3:
        raise ValueError("levels per mode must be >= 3")
    eye = np.eye(levels)
    diag = [ladder_energies(m, levels) for m in modes]
    bare = (diag[0][:, None, None] + diag[1][None, :, None] + diag[2][None, None, :]).ravel()

    x = _charge_operator(levels)
    ops = [np.kron(np.kron(x, eye), eye),
           np.kron(np.kron(eye, x), eye),
           np.kron(np.kron(eye, eye), x)]
    # g n_j n_k with n = i(a^dagger - a)
    exchange = -(g12 * ops[0] @ ops[2] + g1c * ops[0] @ ops[1] + g2c * ops[1] @ ops[2]) / 1e3
    matrix = np.diag(bare) + exchange
    return TruncatedHamiltonian(levels=levels, matrix=matrix)


def build_hamiltonian(device: ThreeModeDevice, levels: int = 5) -> TruncatedHamiltonian:
    """Hamiltonian of a device, couplings from its charging energies (or overrides)."""
    g = device_couplings(device)
    return hamiltonian_from_modes((device.q1, device.coupler, device.q2),
                                  g.g12, g.g1c, g.g2c, levels)


class Spectrum:
    """Eigen-decomposition with maximum-overlap bare-state labels."""

    def __init__(self, hamiltonian: TruncatedHamiltonian, eigenvalues: np.ndarray,
                 eigenvectors: np.ndarray):
        self.hamiltonian = hamiltonian
        self.levels = hamiltonian.levels
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        weights = np.abs(eigenvectors) ** 2
        self.labels = [bare_label(int(i), self.levels) for i in weights.argmax(axis=0)]
        self.overlaps = weights.max(axis=0)
        self.ambiguous = bool((self.overlaps <= LABEL_THRESHOLD).any()
                              or len(set(self.labels)) != len(self.labels))

    def find(self, label: str) -> int:
        """Eigenvector index of the dressed state that resembles a bare state.

        Raises:
            LabelAmbiguityError: If no eigenvector has more than half its weight there
        """
        row = bare_index(label, self.levels)
        weights = np.abs(self.eigenvectors[row]) ** 2
        k = int(weights.argmax())
        if weights[k] <= LABEL_THRESHOLD or self.labels[k] != label:
            raise LabelAmbiguityError(
                f"state |{label}> is not resolved (best overlap {weights[k]:.3f}); "
                "the coupler is probably near resonance")
        return k

    def energy(self, label: str) -> float:
        return float(self.eigenvalues[self.find(label)])

    def vector(self, label: str) -> np.ndarray:
        return self.eigenvectors[:, self.find(label)]


def eigensolve(hamiltonian: TruncatedHamiltonian) -> Spectrum:
    """Full dense eigendecomposition, eigenvalues ascending."""
    h = hamiltonian.matrix
    eigenvalues, eigenvectors = linalg.eigh(h)
    residual = np.linalg.norm(h @ eigenvectors - eigenvectors * eigenvalues, axis=0).max()
    scale = max(float(np.abs(eigenvalues).max()), 1.0)
    if residual > 1e-9 * scale:
        logger.warning("eigen-residual %.3g exceeds 1e-9 |H|", residual)
    spectrum = Spectrum(hamiltonian, eigenvalues, eigenvectors)
    if spectrum.ambiguous:
        logger.debug("spectrum has ambiguous bare-state labels")
    return spectrum


def zz_exact(spectrum: Spectrum) -> float:
    """Residual ZZ in MHz: E101 - E100 - E001 + E000."""
    return 1e3 * (spectrum.energy("101") - spectrum.energy("100")
                  - spectrum.energy("001") + spectrum.energy("000"))


def device_zz_exact(device: ThreeModeDevice, levels: int = 5) -> float:
    return zz_exact(eigensolve(build_hamiltonian(device, levels)))


def qubit_block(spectrum: Spectrum) -> QubitBlock:
    """Effective Hamiltonian of the two qubit-like single-excitation states.

    The two eigenvectors with most weight on span{|100>, |001>} are projected
    onto that span and symmetrically orthonormalized; the block is then
    U diag(E) U^T in the bare basis.
    """
    rows = [bare_index("100", spectrum.levels), bare_index("001", spectrum.levels)]
    weights = (np.abs(spectrum.eigenvectors[rows]) ** 2).sum(axis=0)
    picked = np.sort(np.argsort(weights)[-2:])
    s = spectrum.eigenvectors[np.ix_(rows, picked)]
    if abs(np.linalg.det(s)) < 1e-6:
        raise LabelAmbiguityError("qubit manifold is not resolved in the spectrum")
    u, _ = linalg.polar(s)
    energies = spectrum.eigenvalues[picked]
    h_eff = u @ np.diag(energies) @ u.T
    return QubitBlock(h_eff=0.5 * (h_eff + h_eff.T),
                      energies=(float(energies[0]), float(energies[1])),
                      weight=float(weights[picked].sum() / 2),
                      indices=(int(picked[0]), int(picked[1])), rotation=u)


def resonant_device(device: ThreeModeDevice) -> ThreeModeDevice:
    """Retune qubit 2 so both bare oracle ladders share omega01 (to 1 kHz)."""
    target = bare_ladder(device.q1)[0]
    ec2 = device.q2.ec
    name = device.names[2]

    def mismatch(ej: float) -> float:
        xi = np.sqrt(2 * ec2 / ej)
        omega = np.sqrt(8 * ej * ec2) - ec2 * (1 - xi / 4)
        return omega - ec2 * xi / 18 - target

    lo, hi = ec2, 1e4 * ec2
    if mismatch(lo) * mismatch(hi) > 0:
        raise BracketError(f"cannot tune {name} to {target:.6f} GHz")
    ej = optimize.brentq(mismatch, lo, hi, xtol=1e-12, rtol=1e-14)
    return device.with_ej(name, ej)


def dressed_geff(network: CircuitNetwork, flux: Optional[FluxAssignment] = None,
                 coupler: Optional[str] = None, levels: int = 5,
                 device: Optional[ThreeModeDevice] = None) -> float:
    """Signed oracle qubit-qubit coupling in MHz with the qubits tuned resonant.

    At resonance its magnitude is half the splitting of the two dressed
    single-excitation qubit states.
    """
    if device is None:
        device = ThreeModeDevice.from_network(network, flux, coupler=coupler)
    spectrum = eigensolve(build_hamiltonian(resonant_device(device), levels))
    return qubit_block(spectrum).g


def dressed_off_point(network: CircuitNetwork, flux_lo: float, flux_hi: float,
                      base_flux: Optional[FluxAssignment] = None, coupler: Optional[str] = None,
                      levels: int = 5) -> float:
    """Coupler flux where the oracle coupling vanishes."""
    base_flux = dict(base_flux or {})
    name = ThreeModeDevice.from_network(network, base_flux, coupler=coupler).names[1]

    def g(value: float) -> float:
        flux = dict(base_flux)
        flux[name] = value
        return dressed_geff(network, flux, coupler=coupler, levels=levels)

    return solve_off_point(g, flux_lo, flux_hi, "flux (oracle)")


def _hyperbola(detuning, center, g):
    return np.sqrt((detuning - center) ** 2 + 4 * g ** 2)


def fit_anticross(detuning: Sequence[float], gap: Sequence[float]) -> Tuple[float, float]:
    """Fit gap = sqrt((d - d0)^2 + 4 g^2).

    Args:
        detuning: Bare detuning in GHz
        gap: Dressed splitting in GHz

    Returns:
        (g in MHz, d0 in GHz)

    Raises:
        FitError: If the minimum gap sits at an end of the data
    """
    detuning = np.asarray(detuning, dtype=float)
    gap = np.asarray(gap, dtype=float)
    if detuning.size < 3:
        raise FitError("anticross fit needs at least three points")
    k = int(gap.argmin())
    if k == 0 or k == gap.size - 1:
        raise FitError("gap minimum is not interior to the grid; widen the sweep")
    guess = (detuning[k], gap[k] / 2)
    try:
        (center, g), _ = optimize.curve_fit(_hyperbola, detuning, gap, p0=guess, maxfev=10000)
    except RuntimeError as e:
        raise FitError(f"anticross fit did not converge: {e}") from e
    return 1e3 * abs(float(g)), float(center)


def _qubit_coupler_pair(spectrum: Spectrum, qubit_label: str) -> Tuple[float, float]:
    rows = [bare_index(qubit_label, spectrum.levels), bare_index("010", spectrum.levels)]
    weights = (np.abs(spectrum.eigenvectors[rows]) ** 2).sum(axis=0)
    picked = np.sort(np.argsort(weights)[-2:])
    low, high = spectrum.eigenvalues[picked]
    return float(low), float(high)


def anticross_gqc(network: CircuitNetwork, qubit_name: str, flux_grid: Sequence[float],
                  base_flux: Optional[FluxAssignment] = None, coupler: Optional[str] = None,
                  levels: int = 5, runner=None) -> AnticrossResult:
    """Qubit-coupler coupling from the anticrossing as the coupler flux sweeps.

    Keep the other qubit detuned through base_flux so only one crossing is seen.
    """
    from .sweep import GridRunner

    base_flux = dict(base_flux or {})
    names = ThreeModeDevice.from_network(network, base_flux, coupler=coupler).names
    if qubit_name not in (names[0], names[2]):
        raise ValueError(f"'{qubit_name}' is not a qubit of this device (qubits: {names[0]}, {names[2]})")
    label = "100" if qubit_name == names[0] else "001"
    runner = runner or GridRunner()

    def point(value: float) -> Tuple[float, float]:
        flux = dict(base_flux)
        flux[names[1]] = value
        device = ThreeModeDevice.from_network(network, flux, coupler=coupler)
        qubit = device.modes[qubit_name]
        detuning = bare_ladder(device.coupler)[0] - bare_ladder(qubit)[0]
        low, high = _qubit_coupler_pair(eigensolve(build_hamiltonian(device, levels)), label)
        return detuning, high - low

    grid = np.asarray(list(flux_grid), dtype=float)
    data = runner.map(point, list(grid), description="Anticrossing")
    detuning = np.array([d for d, _ in data])
    gap = np.array([g for _, g in data])
    g_qc, center = fit_anticross(detuning, gap)
    return AnticrossResult(g_qc=g_qc, center=center, detuning=detuning, gap=gap, flux=grid)


def _charge_levels(ej: float, ec: float, cutoff: int) -> np.ndarray:
    n = np.arange(-cutoff, cutoff + 1, dtype=float)
    diagonal = 4 * ec * n ** 2
    off = np.full(2 * cutoff, -ej / 2)
    return linalg.eigh_tridiagonal(diagonal, off, select="i", select_range=(0, 2),
                                   eigvals_only=True)


def exact_transmon_levels(ej: float, ec: float, n_charge_cutoff: int = 30) -> Tuple[float, float]:
    """omega01 and anharmonicity of 4 E_C n^2 - E_J cos(phi) in the charge basis.

    Raises:
        CutoffError: If doubling the cutoff moves either result by more than 1e-8 GHz
    """
    if n_charge_cutoff < 20:
        raise CutoffError("charge cutoff must be at least 20")
    if ej <= 0 or ec <= 0:
        raise ValueError("E_J and E_C must be positive")

    def observables(cutoff: int) -> Tuple[float, float]:
        e = _charge_levels(ej, ec, cutoff)
        return float(e[1] - e[0]), float(e[2] - 2 * e[1] + e[0])

    result = observables(n_charge_cutoff)
    check = observables(2 * n_charge_cutoff)
    if max(abs(result[0] - check[0]), abs(result[1] - check[1])) > 1e-8:
        raise CutoffError(f"charge cutoff {n_charge_cutoff} is too small for E_J/E_C = {ej / ec:.3g}")
    return result


def truncation_converged(device: ThreeModeDevice, quantity: Callable[[Spectrum], float],
                         low: int = 4, high: int = 6) -> bool:
    """Whether a spectral quantity moves by less than 1% between two truncations."""
    a = quantity(eigensolve(build_hamiltonian(device, low)))
    b = quantity(eigensolve(build_hamiltonian(device, high)))
    scale = max(abs(a), abs(b))
    converged = scale == 0 or abs(a - b) <= CONVERGENCE_TOLERANCE * scale
    if not converged:
        logger.warning("truncation not converged: %.6g at %d levels vs %.6g at %d levels",
                       a, low, b, high)
    return converged
