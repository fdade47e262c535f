"""Closed-system time-domain protocols.

Times are in ns and energies in GHz, so a Hamiltonian H propagates as
exp(-2 pi i H t). Flux pulses are piecewise: constant holds and cosine ramps.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize
from scipy.signal import windows

from .device import ThreeModeDevice
from .errors import LeakageError, NonUnitaryError, ScheduleError
from .netlist import CircuitNetwork, FluxAssignment
from .spectrum import (build_hamiltonian, device_zz_exact, eigensolve, qubit_block,
                       resonant_device)
from .tomography import CZ, chi_from_operator, process_fidelity, qpt_chi

logger = logging.getLogger(__name__)

STEPS_PER_PERIOD = 50
NORM_TOLERANCE = 1e-9
ZERO_PAD = 8
MIN_BINS = 2
PEAK_FLOOR = 5.0
COMPUTATIONAL = ("000", "001", "100", "101")


@dataclass(frozen=True)
class Segment:
    """One piece of a flux pulse.

    A cosine segment moves every junction from start to stop along
    (1 - cos(pi tau / T)) / 2; a constant segment holds start.
    """
    duration: float
    start: Dict[str, float]
    stop: Dict[str, float]
    shape: str = "constant"

    def flux_at(self, tau: float) -> Dict[str, float]:
        if self.shape == "constant":
            return dict(self.start)
        s = (1 - math.cos(math.pi * tau / self.duration)) / 2
        return {k: self.start[k] + (self.stop[k] - self.start[k]) * s for k in self.start}

    @property
    def max_frequency(self) -> float:
        """Bandwidth of the segment in GHz (1 / ramp time for cosine ramps)."""
        return 0.0 if self.shape == "constant" else 1.0 / self.duration


@dataclass(frozen=True)
class PulseSchedule:
    """Contiguous flux segments sampled with time step dt (ns)."""
    segments: Tuple[Segment, ...]
    dt: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ScheduleError("time step must be positive")
        if not self.segments:
            raise ScheduleError("schedule has no segments")
        for i, seg in enumerate(self.segments):
            if seg.duration <= 0:
                raise ScheduleError(f"segment {i} has non-positive duration")
            if seg.shape not in ("constant", "cosine"):
                raise ScheduleError(f"segment {i} has unknown shape '{seg.shape}'")
            if seg.shape == "constant" and seg.start != seg.stop:
                raise ScheduleError(f"constant segment {i} must end where it starts")
            if set(seg.start) != set(seg.stop):
                raise ScheduleError(f"segment {i} moves different junctions at its two ends")
        for i, (a, b) in enumerate(zip(self.segments, self.segments[1:])):
            if set(a.stop) != set(b.start) or any(
                    abs(a.stop[k] - b.start[k]) > 1e-12 for k in a.stop):
                raise ScheduleError(f"flux jumps between segments {i} and {i + 1}")
        f_max = max(seg.max_frequency for seg in self.segments)
        if f_max > 0 and self.dt > 1 / (STEPS_PER_PERIOD * f_max):
            raise ScheduleError(
                f"dt = {self.dt} ns is too coarse for a {1 / f_max:.4g} ns ramp "
                f"(need dt <= {1 / (STEPS_PER_PERIOD * f_max):.4g} ns)")

    @property
    def duration(self) -> float:
        return sum(seg.duration for seg in self.segments)


def flat_top_schedule(idle_flux: FluxAssignment, gate_flux: FluxAssignment,
                      ramp_ns: float, hold_ns: float, dt: float) -> PulseSchedule:
    """Cosine ramp from idle to gate flux, hold, cosine ramp back."""
    idle, gate = dict(idle_flux), dict(gate_flux)
    if set(idle) != set(gate):
        raise ScheduleError("idle and gate flux must name the same junctions")
    segments = [Segment(ramp_ns, idle, gate, "cosine")]
    if hold_ns > 0:
        segments.append(Segment(hold_ns, gate, gate, "constant"))
    segments.append(Segment(ramp_ns, gate, idle, "cosine"))
    return PulseSchedule(segments=tuple(segments), dt=dt)


@dataclass
class Evolution:
    """Final state(s) and, when recorded, the sampled trajectory."""
    final: np.ndarray
    times: List[float] = field(default_factory=list)
    states: List[np.ndarray] = field(default_factory=list)


def _propagator(h: np.ndarray, t: float) -> np.ndarray:
    return linalg.expm(-2j * np.pi * h * t)


def evolve(hamiltonian: Callable[[Dict[str, float]], np.ndarray], psi0: np.ndarray,
           schedule: PulseSchedule, record: bool = False) -> Evolution:
    """Propagate state(s) through a flux schedule.

    Constant segments use one exact exponential; ramps use fixed steps with
    the Hamiltonian sampled at each step's midpoint.

    Args:
        hamiltonian: Maps a flux assignment to a Hermitian matrix in GHz
        psi0: Normalized state vector, or a matrix whose columns are states
        schedule: Pulse schedule
        record: Keep the state after every step

    Raises:
        NonUnitaryError: If any column's norm drifts by more than 1e-9
    """
    psi = np.array(psi0, dtype=complex)
    norms0 = np.linalg.norm(psi, axis=0)
    if np.abs(norms0 - 1).max() > NORM_TOLERANCE:
        raise ValueError("initial state is not normalized")
    result = Evolution(final=psi)
    t = 0.0
    if record:
        result.times.append(t)
        result.states.append(psi.copy())

    for seg in schedule.segments:
        if seg.shape == "constant":
            psi = _propagator(hamiltonian(seg.flux_at(0.0)), seg.duration) @ psi
            t += seg.duration
            if record:
                result.times.append(t)
                result.states.append(psi.copy())
            continue
        steps = max(1, math.ceil(seg.duration / schedule.dt - 1e-9))
        h_step = seg.duration / steps
        for k in range(steps):
            psi = _propagator(hamiltonian(seg.flux_at((k + 0.5) * h_step)), h_step) @ psi
            t += h_step
            if record:
                result.times.append(t)
                result.states.append(psi.copy())

    drift = np.abs(np.linalg.norm(psi, axis=0) - 1).max()
    if drift > NORM_TOLERANCE:
        raise NonUnitaryError(f"state norm drifted by {drift:.3g}")
    result.final = psi
    return result


def device_hamiltonian(network: CircuitNetwork, coupler: Optional[str] = None,
                       levels: int = 3) -> Callable[[Dict[str, float]], np.ndarray]:
    """Flux-to-Hamiltonian map for evolve()."""
    def hamiltonian(flux: Dict[str, float]) -> np.ndarray:
        device = ThreeModeDevice.from_network(network, flux, coupler=coupler)
        return build_hamiltonian(device, levels).matrix
    return hamiltonian


@dataclass(frozen=True)
class ChevronMap:
    """Excited-state population on a (flux, delay) grid; population[i, j] at flux[i], delay[j]."""
    flux: np.ndarray
    delay: np.ndarray
    population: np.ndarray


def swap_chevron(network: CircuitNetwork, excite: str, flux_grid: Sequence[float],
                 delay_grid: Sequence[float], base_flux: Optional[FluxAssignment] = None,
                 coupler: Optional[str] = None, levels: int = 5, initial: str = "dressed",
                 runner=None) -> ChevronMap:
    """SWAP chevron: probability that the chosen qubit is excited after free evolution.

    At every coupler flux the qubits are tuned resonant and the initial state
    is propagated through the full eigendecomposition. With initial="dressed"
    it is the dressed stand-in for the bare single excitation (what a selective
    pi pulse prepares); initial="bare" starts from the bare Fock state itself,
    so the coupler admixture shows up as a fast wiggle.
    """
    from .sweep import GridRunner

    if initial not in ("dressed", "bare"):
        raise ValueError(f"initial must be 'dressed' or 'bare', got '{initial}'")
    base_flux = dict(base_flux or {})
    names = ThreeModeDevice.from_network(network, base_flux, coupler=coupler).names
    if excite not in (names[0], names[2]):
        raise ValueError(f"'{excite}' is not a qubit of this device (qubits: {names[0]}, {names[2]})")
    label_row, axis = (0, 0) if excite == names[0] else (1, 2)
    label = "100" if label_row == 0 else "001"
    occupation = np.unravel_index(np.arange(levels ** 3), (levels,) * 3)[axis]
    excited_rows = np.flatnonzero(occupation == 1)
    delays = np.asarray(list(delay_grid), dtype=float)
    runner = runner or GridRunner()

    def column(value: float) -> np.ndarray:
        flux = dict(base_flux)
        flux[names[1]] = value
        device = resonant_device(ThreeModeDevice.from_network(network, flux, coupler=coupler))
        spectrum = eigensolve(build_hamiltonian(device, levels))
        vectors = spectrum.eigenvectors
        if initial == "bare":
            psi0 = np.zeros(vectors.shape[0])
            psi0[spectrum.hamiltonian.index(label)] = 1.0
        else:
            block = qubit_block(spectrum)
            psi0 = vectors[:, list(block.indices)] @ block.rotation[label_row]
        coeffs = vectors.conj().T @ psi0
        phases = np.exp(-2j * np.pi * np.outer(spectrum.eigenvalues, delays))
        psi = vectors[excited_rows] @ (coeffs[:, None] * phases)
        return (np.abs(psi) ** 2).sum(axis=0)

    grid = [float(f) for f in flux_grid]
    population = np.array(runner.map(column, grid, description="Simulating chevron"))
    if population.size and (population.max() > 1 + 1e-9 or population.min() < -1e-12):
        raise NonUnitaryError("chevron population left [0, 1]")
    return ChevronMap(flux=np.array(grid), delay=delays, population=population)


def estimate_frequency(samples: Sequence[float], dt: float) -> Optional[float]:
    """Dominant non-zero frequency of a uniformly sampled signal, in 1/dt units.

    Mean removed, Hann window, zero padded, and refined by a parabola through
    the log magnitude of the peak bin and its neighbours. Returns None for a
    flat signal or when no peak clears the noise floor.
    """
    x = np.asarray(samples, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need at least four samples")
    x = x - x.mean()
    if x.std() < 1e-9:
        return None
    spectrum = np.abs(np.fft.rfft(x * windows.hann(n, sym=False), n=ZERO_PAD * n))
    freqs = np.fft.rfftfreq(ZERO_PAD * n, d=dt)
    lowest = MIN_BINS * ZERO_PAD
    if spectrum.size <= lowest + 2:
        return None
    search = spectrum[lowest:-1]
    k = lowest + int(search.argmax())
    floor = np.median(spectrum[lowest:])
    if spectrum[k] <= PEAK_FLOOR * floor:
        return None
    alpha, beta, gamma = np.log(spectrum[k - 1:k + 2] + 1e-300)
    denom = alpha - 2 * beta + gamma
    delta = 0.5 * (alpha - gamma) / denom if denom != 0 else 0.0
    return float((k + delta) * (freqs[1] - freqs[0]))


def chevron_fft(chevron: ChevronMap) -> List[Optional[float]]:
    """Per-flux coupling estimate in MHz: half the dominant oscillation frequency."""
    delay = chevron.delay
    if delay.size < 64:
        raise ValueError("chevron FFT needs at least 64 delay points")
    steps = np.diff(delay)
    if np.abs(steps - steps[0]).max() > 1e-9 * max(1.0, abs(steps[0])):
        raise ValueError("chevron delay grid must be uniform")
    estimates = []
    for column in chevron.population:
        f = estimate_frequency(column, steps[0])
        estimates.append(None if f is None else 1e3 * f / 2)
    return estimates


@dataclass(frozen=True)
class RamseyResult:
    """Ramsey traces for control |0> and |1>, fringe frequencies in MHz, ZZ in MHz."""
    times: np.ndarray
    signal0: np.ndarray
    signal1: np.ndarray
    fringe0: float
    fringe1: float
    detuning: float

    @property
    def zz(self) -> float:
        return self.fringe1 - self.fringe0


def _fringe(times: np.ndarray, signal: np.ndarray) -> float:
    guess = estimate_frequency(signal, times[1] - times[0])
    if guess is None:
        raise ScheduleError("no Ramsey fringe found; increase the evolution span or detuning")

    def model(t, f, phase, amplitude, offset):
        return offset + amplitude * np.cos(2 * np.pi * f * t + phase)

    try:
        params, _ = optimize.curve_fit(model, times, signal, p0=(guess, 0.0, 0.5, 0.5),
                                       maxfev=20000)
    except RuntimeError:
        return guess
    return abs(float(params[0]))


def ramsey_signal(network: CircuitNetwork, flux: Optional[FluxAssignment],
                  control_state: int, evolution_grid: Sequence[float], detuning_mhz: float,
                  target: Optional[str] = None, coupler: Optional[str] = None,
                  levels: int = 5) -> np.ndarray:
    """Ramsey fringe of the target qubit with the control prepared in 0 or 1.

    The pi/2 pulses are ideal; the reference frame rotates at the target's
    dressed frequency (control in 0) minus detuning_mhz.
    """
    if control_state not in (0, 1):
        raise ValueError("control_state must be 0 or 1")
    device = ThreeModeDevice.from_network(network, flux, coupler=coupler)
    target = target or device.names[2]
    if target not in (device.names[0], device.names[2]):
        raise ValueError(f"'{target}' is not a qubit of this device")
    spectrum = eigensolve(build_hamiltonian(device, levels))

    def label(control: int, excited: int) -> str:
        if target == device.names[2]:
            return f"{control}0{excited}"
        return f"{excited}0{control}"

    reference = spectrum.energy(label(0, 1)) - spectrum.energy(label(0, 0)) - detuning_mhz / 1e3
    frequency = (spectrum.energy(label(control_state, 1))
                 - spectrum.energy(label(control_state, 0)))
    t = np.asarray(list(evolution_grid), dtype=float)
    return (1 + np.cos(2 * np.pi * (frequency - reference) * t)) / 2


def ramsey_zz(network: CircuitNetwork, flux: Optional[FluxAssignment],
              evolution_grid: Sequence[float], detuning_mhz: float = 5.0,
              target: Optional[str] = None, coupler: Optional[str] = None,
              levels: int = 5) -> RamseyResult:
    """ZZ from the fringe-frequency shift when the control qubit is excited.

    Raises:
        ScheduleError: If the span holds fewer than three fringes at the detuning
    """
    t = np.asarray(list(evolution_grid), dtype=float)
    if t.size < 16:
        raise ScheduleError("Ramsey needs at least 16 evolution points")
    span = t[-1] - t[0]
    if span * abs(detuning_mhz) / 1e3 < 3:
        raise ScheduleError(
            f"evolution span {span:.4g} ns covers fewer than 3 fringes at {detuning_mhz} MHz")
    signals = [ramsey_signal(network, flux, c, t, detuning_mhz, target, coupler, levels)
               for c in (0, 1)]
    f0, f1 = (1e3 * _fringe(t - t[0], s) for s in signals)
    return RamseyResult(times=t, signal0=signals[0], signal1=signals[1],
                        fringe0=f0, fringe1=f1, detuning=detuning_mhz)


@dataclass(frozen=True)
class CZResult:
    """Outcome of an adiabatic CZ pulse.

    unitary is the computational-subspace block after the Z-frame correction,
    in the order 00, 01, 10, 11 (qubit 1 first).
    """
    unitary: np.ndarray
    raw: np.ndarray
    leakage: float
    conditional_phase: float
    fidelity: float
    hold_ns: float


def _wrap(phase: float) -> float:
    return float(np.mod(phase, 2 * np.pi))


def adiabatic_cz(network: CircuitNetwork, idle_flux: FluxAssignment, gate_flux: FluxAssignment,
                 ramp_ns: float, hold_ns: float, dt: float = 0.01,
                 coupler: Optional[str] = None, levels: int = 3,
                 max_leakage: float = 0.05) -> CZResult:
    """Propagate the computational states through a flat-top coupler pulse.

    The computational basis is the set of idle-point dressed states resembling
    |000>, |001>, |100>, |101>. Single-qubit phases are removed by a Z-frame
    correction before the fidelity against the ideal CZ is taken.

    Raises:
        LeakageError: If the mean population lost from the subspace exceeds max_leakage
    """
    idle = ThreeModeDevice.from_network(network, idle_flux, coupler=coupler)
    keys = sorted(set(idle.flux))
    idle_full = {k: idle.flux[k] for k in keys}
    gate_full = dict(idle_full)
    gate_full.update(gate_flux)
    schedule = flat_top_schedule(idle_full, gate_full, ramp_ns, hold_ns, dt)

    spectrum = eigensolve(build_hamiltonian(idle, levels))
    basis = np.column_stack([spectrum.vector(label) for label in COMPUTATIONAL])
    evolution = evolve(device_hamiltonian(network, coupler, levels), basis, schedule)

    raw = basis.conj().T @ evolution.final

    leakage = float(1 - np.mean(np.sum(np.abs(raw) ** 2, axis=0)))
    phases = np.angle(np.diag(raw))
    p00, p01, p10, p11 = phases
    conditional = _wrap(p11 - p10 - p01 + p00)
    frame = np.diag(np.exp(-1j * np.array([p00, p01, p10, p01 + p10 - p00])))
    corrected = frame @ raw
    fidelity = process_fidelity(chi_from_operator(corrected), qpt_chi(CZ))

    logger.debug("CZ hold %.4g ns: phase %.6f rad, leakage %.3g, fidelity %.8f",
                 hold_ns, conditional, leakage, fidelity)
    if leakage > max_leakage:
        raise LeakageError(
            f"leakage {leakage:.3g} exceeds {max_leakage}; use longer ramps")
    return CZResult(unitary=corrected, raw=raw, leakage=leakage,
                    conditional_phase=conditional, fidelity=fidelity, hold_ns=hold_ns)


def tune_cz_hold(network: CircuitNetwork, idle_flux: FluxAssignment, gate_flux: FluxAssignment,
                 ramp_ns: float, dt: float = 0.01, coupler: Optional[str] = None,
                 levels: int = 3, max_leakage: float = 0.05, target: float = math.pi,
                 tolerance: float = 1e-3, max_rounds: int = 8) -> CZResult:
    """Search the hold time that gives a conditional phase of target.

    The phase grows linearly with the hold at a rate set by the ZZ at the
    gate point; a few secant corrections absorb the ramps.
    """
    idle = ThreeModeDevice.from_network(network, idle_flux, coupler=coupler)
    gate_full = dict(idle.flux)
    gate_full.update(gate_flux)
    gate = ThreeModeDevice.from_network(network, gate_full, coupler=coupler)
    zz_gate = device_zz_exact(gate, levels)
    rate = -2 * np.pi * zz_gate / 1e3
    if abs(rate) < 1e-12:
        raise ScheduleError("no ZZ at the gate point; the conditional phase cannot accumulate")

    def run(hold: float) -> CZResult:
        return adiabatic_cz(network, idle_flux, gate_flux, ramp_ns, hold, dt, coupler,
                            levels, max_leakage)

    result = run(0.0)
    missing = np.mod(target - result.conditional_phase, 2 * np.pi)
    if rate < 0:
        missing -= 2 * np.pi
    hold = float(missing / rate)
    for _ in range(max_rounds):
        result = run(hold)
        error = (target - result.conditional_phase + np.pi) % (2 * np.pi) - np.pi
        if abs(error) < tolerance:
            break
        hold = max(0.0, hold + float(error / rate))
    else:
        raise ScheduleError(
            f"hold-time search did not converge after {max_rounds} rounds "
            f"(residual phase {error:.3g} rad at hold {result.hold_ns:.6g} ns)")
    logger.debug("CZ hold %.6g ns, conditional phase %.6f rad", result.hold_ns,
                 result.conditional_phase)
    return result
