"""Tests for the time-domain protocols."""

import numpy as np
import pytest

from tccp.coupling import coupler_off_point
from tccp.device import ThreeModeDevice
from tccp.dynamics import (ChevronMap, PulseSchedule, Segment, adiabatic_cz, chevron_fft,
                           estimate_frequency, evolve, flat_top_schedule, ramsey_signal, ramsey_zz,
                           swap_chevron, tune_cz_hold)
from tccp.errors import ScheduleError
from tccp.quantizer import flux_for_frequency
from tccp.spectrum import device_zz_exact, dressed_geff, dressed_off_point


def _design_d_idle(network):
    return {"Q1": flux_for_frequency(network, "Q1", 5.11),
            "Q2": flux_for_frequency(network, "Q2", 5.64),
            "C": flux_for_frequency(network, "C", 6.404)}


def _two_level(g):
    """Flux-independent resonant pair with coupling g (GHz)."""
    return lambda flux: np.array([[0.0, g], [g, 0.0]])


def _tilted_pair(flux):
    """Pair whose splitting follows the 'C' flux."""
    return np.array([[0.0, 0.02], [0.02, flux["C"]]])


def test_schedule_validation():
    """Test the structural checks on pulse schedules."""
    zero, one = {"C": 0.0}, {"C": 0.1}

    with pytest.raises(ScheduleError, match="too coarse"):
        flat_top_schedule(zero, one, ramp_ns=20.0, hold_ns=10.0, dt=0.5)
    with pytest.raises(ScheduleError, match="flux jumps"):
        PulseSchedule((Segment(10.0, zero, one, "cosine"),
                       Segment(10.0, {"C": 0.2}, {"C": 0.2})), dt=0.1)
    with pytest.raises(ScheduleError, match="must end where it starts"):
        PulseSchedule((Segment(10.0, zero, one),), dt=0.1)
    with pytest.raises(ScheduleError, match="no segments"):
        PulseSchedule((), dt=0.1)
    with pytest.raises(ScheduleError, match="same junctions"):
        flat_top_schedule(zero, {"Q1": 0.1}, ramp_ns=20.0, hold_ns=0.0, dt=0.1)


def test_flat_top_schedule():
    """Test the ramp-hold-ramp layout."""
    schedule = flat_top_schedule({"C": 0.0}, {"C": 0.2}, ramp_ns=20.0, hold_ns=50.0, dt=0.2)

    assert schedule.duration == pytest.approx(90.0)
    assert [s.shape for s in schedule.segments] == ["cosine", "constant", "cosine"]
    assert schedule.segments[0].flux_at(10.0)["C"] == pytest.approx(0.1)
    assert len(flat_top_schedule({"C": 0.0}, {"C": 0.2}, 20.0, 0.0, 0.2).segments) == 2


def test_resonant_transfer():
    """Test complete exchange after a quarter period of the coupling."""
    g = 0.01
    schedule = PulseSchedule((Segment(1 / (4 * g), {"C": 0.0}, {"C": 0.0}),), dt=0.1)
    result = evolve(_two_level(g), np.array([1.0, 0.0]), schedule)

    assert abs(result.final[1]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_evolution_conserves_norm():
    """Test a ramped evolution of several states at once."""
    schedule = flat_top_schedule({"C": 0.0}, {"C": 0.3}, ramp_ns=20.0, hold_ns=15.0, dt=0.1)
    result = evolve(_tilted_pair, np.eye(2), schedule, record=True)

    assert result.times[-1] == pytest.approx(55.0)
    assert len(result.states) == len(result.times)
    np.testing.assert_allclose(np.linalg.norm(result.final, axis=0), 1.0, atol=1e-12)
    with pytest.raises(ValueError, match="not normalized"):
        evolve(_tilted_pair, np.array([1.0, 1.0]), schedule)


def test_estimate_frequency():
    """Test the windowed FFT peak estimate on a clean cosine."""
    t = np.arange(200) * 1.0
    assert estimate_frequency(np.cos(2 * np.pi * 0.05 * t), 1.0) == pytest.approx(0.05, rel=1e-2)
    assert estimate_frequency(np.ones(200), 1.0) is None
    with pytest.raises(ValueError):
        estimate_frequency([1.0, 0.0], 1.0)


def test_chevron_fft_synthetic():
    """Test that a cos^2(2 pi g t) population returns g."""
    delay = np.linspace(0.0, 300.0, 128)
    population = np.cos(2 * np.pi * 0.01 * delay) ** 2
    chevron = ChevronMap(flux=np.array([0.0]), delay=delay, population=population[None, :])

    assert chevron_fft(chevron)[0] == pytest.approx(10.0, rel=2e-2)


def test_chevron_fft_requirements():
    """Test the delay grid checks."""
    short = ChevronMap(flux=np.array([0.0]), delay=np.linspace(0, 100, 32),
                       population=np.ones((1, 32)))
    with pytest.raises(ValueError, match="at least 64"):
        chevron_fft(short)

    delay = np.concatenate([np.linspace(0, 50, 40), np.linspace(51, 200, 40)])
    uneven = ChevronMap(flux=np.array([0.0]), delay=delay, population=np.ones((1, 80)))
    with pytest.raises(ValueError, match="uniform"):
        chevron_fft(uneven)


def test_swap_chevron_design_a(design_a):
    """Test the chevron populations and the coupling read off them."""
    delay = np.linspace(0.0, 1000.0, 256)
    chevron = swap_chevron(design_a, "Q1", [0.0, 0.05], delay, levels=3)

    assert chevron.population.shape == (2, 256)
    # the dressed start carries a small coupler admixture
    assert chevron.population[:, 0] == pytest.approx([1.0, 1.0], abs=1e-2)
    assert chevron.population.min() >= 0.0
    assert chevron.population.max() <= 1.0 + 1e-9

    estimate = chevron_fft(chevron)[0]
    assert estimate == pytest.approx(abs(dressed_geff(design_a, {"C": 0.0}, levels=3)), rel=5e-2)

    with pytest.raises(ValueError, match="not a qubit"):
        swap_chevron(design_a, "C", [0.0], delay, levels=3)
    with pytest.raises(ValueError, match="initial"):
        swap_chevron(design_a, "Q1", [0.0], delay, levels=3, initial="thermal")


def test_swap_chevron_bare_start(design_a):
    """Test that the bare start is fully excited at zero delay and feels the coupler."""
    delay = np.linspace(0.0, 200.0, 401)
    bare = swap_chevron(design_a, "Q2", [0.0], delay, levels=3, initial="bare").population[0]
    dressed = swap_chevron(design_a, "Q2", [0.0], delay, levels=3).population[0]

    assert bare[0] == pytest.approx(1.0, abs=1e-12)
    assert dressed[0] < bare[0]
    # the coupler admixture oscillates at the qubit-coupler detuning on top of the swap
    assert np.abs(np.diff(bare, 2)).max() > np.abs(np.diff(dressed, 2)).max()


def test_chevron_fft_across_flux(design_a):
    """Test the FFT coupling estimate against the oracle over several coupler fluxes."""
    grid = [0.0, 0.04, 0.08, 0.12]
    chevron = swap_chevron(design_a, "Q1", grid, np.linspace(0.0, 2000.0, 256), levels=3)
    estimates = chevron_fft(chevron)

    for flux, estimate in zip(grid, estimates):
        expected = abs(dressed_geff(design_a, {"C": flux}, levels=3))
        assert estimate == pytest.approx(expected, rel=5e-2), flux


def test_off_point_closure(design_a):
    """Test that the coupler off point leaves the qubits uncoupled."""
    flux_off, _ = coupler_off_point(design_a, 0.0, 0.22)
    assert abs(dressed_geff(design_a, {"C": flux_off})) < 0.05

    refined = dressed_off_point(design_a, 0.0, 0.22, levels=4)
    chevron = swap_chevron(design_a, "Q1", [refined], np.linspace(0.0, 1000.0, 201), levels=4)
    population = chevron.population[0]
    assert population.max() - population.min() < 1e-2


def test_propagator_unitarity():
    """Test that random Hermitian holds give unitary evolutions."""
    rng = np.random.default_rng(3)
    for _ in range(1000):
        z = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        h = (z + z.conj().T) / 2
        hold = rng.uniform(0.1, 10.0)
        schedule = PulseSchedule((Segment(hold, {"C": 0.0}, {"C": 0.0}),), dt=0.1)
        u = evolve(lambda flux: h, np.eye(6), schedule).final
        np.testing.assert_allclose(u.conj().T @ u, np.eye(6), atol=1e-9)


def test_ramsey_matches_exact_zz(design_b):
    """Test that the Ramsey fringe shift reproduces the spectral ZZ."""
    flux = {"Q2": flux_for_frequency(design_b, "Q2", 5.22)}
    result = ramsey_zz(design_b, flux, np.linspace(0.0, 2000.0, 401), detuning_mhz=5.0)
    exact = device_zz_exact(ThreeModeDevice.from_network(design_b, flux), levels=5)

    assert result.fringe0 == pytest.approx(5.0, rel=1e-3)
    assert result.zz == pytest.approx(exact, rel=2e-2)
    assert result.signal0[0] == pytest.approx(1.0)


def test_ramsey_requirements(design_b):
    """Test spans that cannot resolve a fringe."""
    flux = {"Q2": 0.2}
    with pytest.raises(ScheduleError, match="fewer than 3 fringes"):
        ramsey_zz(design_b, flux, np.linspace(0.0, 100.0, 32), detuning_mhz=5.0)
    with pytest.raises(ScheduleError, match="at least 16"):
        ramsey_zz(design_b, flux, np.linspace(0.0, 2000.0, 8))
    with pytest.raises(ValueError, match="control_state"):
        ramsey_signal(design_b, flux, 2, [0.0, 1.0], 5.0)


def test_cz_design_d(design_d):
    """Test an adiabatic CZ at the Design D idle point."""
    idle = _design_d_idle(design_d)
    gate = {"C": flux_for_frequency(design_d, "C", 6.0)}
    result = tune_cz_hold(design_d, idle, gate, ramp_ns=20.0, dt=0.1, levels=3)

    assert result.conditional_phase == pytest.approx(np.pi, abs=1e-2)
    assert result.leakage <= 1e-3
    assert result.fidelity >= 0.999
    assert 100.0 < result.hold_ns < 3000.0
    np.testing.assert_allclose(np.abs(np.diag(result.unitary)), 1.0, atol=0.05)

    finer = adiabatic_cz(design_d, idle, gate, ramp_ns=20.0, hold_ns=result.hold_ns, dt=0.05,
                         levels=3)
    assert finer.fidelity == pytest.approx(result.fidelity, abs=1e-4)
    assert finer.conditional_phase == pytest.approx(result.conditional_phase, abs=1e-3)


def test_cz_hold_search_gives_up(design_d):
    """Test that an unreachable phase tolerance is reported."""
    gate = {"C": flux_for_frequency(design_d, "C", 6.0)}
    with pytest.raises(ScheduleError, match="did not converge after 1 rounds"):
        tune_cz_hold(design_d, _design_d_idle(design_d), gate, ramp_ns=20.0, dt=0.1, levels=3,
                     tolerance=1e-15, max_rounds=1)
