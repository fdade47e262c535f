"""Tests for the analytic coupling model."""

import numpy as np
import pytest

from tccp.coupling import (coupler_off_point, coupler_off_point_frozen, coupling_report,
                           device_couplings, effective_coupling, pairwise_g, solve_off_point,
                           sweep_flux)
from tccp.device import ThreeModeDevice
from tccp.errors import BracketError, ResonanceError
from tccp.sweep import GridRunner


def test_pairwise_g_design_a(design_a):
    """Test the qubit-coupler coupling of Design A at the sweet spot."""
    device = ThreeModeDevice.from_network(design_a)
    g1c = pairwise_g(device.e1c, device.q1, device.coupler)

    assert g1c == pytest.approx(52.2, rel=2e-2)
    assert pairwise_g(device.e2c, device.q2, device.coupler) == pytest.approx(g1c)
    assert pairwise_g(0.0, device.q1, device.coupler) == 0.0


def test_device_couplings_overrides(design_a):
    """Test that fixed couplings replace the computed ones."""
    device = ThreeModeDevice.from_network(design_a)
    computed = device_couplings(device)
    g = device_couplings(device.with_couplings(g1c=83.5))

    assert g.g1c == 83.5
    assert g.g2c == computed.g2c
    assert 0 < computed.g12 < computed.g1c


def test_effective_coupling_frozen_design_a():
    """Test g_eff with frozen Design A couplings."""
    report = effective_coupling(9.62, 83.5, 83.5, 5.59, 5.59, 6.83)

    assert report.g_eff == pytest.approx(3.44, abs=0.01)
    assert report.delta1 == pytest.approx(1.24)
    assert report.sigma2 == pytest.approx(12.42)
    # both qubits are pushed down by the coupler above them
    assert report.omega1_eff == pytest.approx(5.59 - 0.00618, abs=1e-4)
    assert report.omega1_eff == pytest.approx(report.omega2_eff)


def test_effective_coupling_far_coupler():
    """Test that the direct coupling survives alone when the coupler is far away."""
    report = effective_coupling(9.62, 83.5, 83.5, 5.59, 5.59, 1e6)
    assert report.g_eff == pytest.approx(9.62, abs=1e-3)


def test_effective_coupling_resonance():
    """Test the resonance guard."""
    with pytest.raises(ResonanceError, match="qubit 2"):
        effective_coupling(9.62, 83.5, 83.5, 5.59, 6.0, 6.0)


def test_coupling_report(design_a):
    """Test the report of a netlist device at the sweet spot."""
    device = ThreeModeDevice.from_network(design_a)
    report = coupling_report(device)

    assert report.omegac == pytest.approx(6.83, abs=0.01)
    assert report.g_eff > 0
    assert report.g_eff < report.g12


def test_frozen_off_point():
    """Test the scalar off point for frozen Design A couplings."""
    omegac = coupler_off_point_frozen(9.62, 83.5, 83.5, 5.59, 5.59)

    assert omegac == pytest.approx(6.361, abs=5e-3)
    assert effective_coupling(9.62, 83.5, 83.5, 5.59, 5.59, omegac).g_eff == pytest.approx(0, abs=1e-3)


def test_frozen_off_point_no_root():
    """Test a bracket without a sign change."""
    with pytest.raises(BracketError, match="does not change sign"):
        coupler_off_point_frozen(9.62, 83.5, 83.5, 5.59, 5.59, 7.0, 8.0)


def test_coupler_off_point_design_a(design_a):
    """Test the off point with every coupler quantity re-evaluated along the search."""
    flux_off, omegac = coupler_off_point(design_a, 0.0, 0.22)

    assert 0.1 < flux_off < 0.22
    assert 5.9 < omegac < 6.3
    device = ThreeModeDevice.from_network(design_a, {"C": flux_off})
    assert coupling_report(device).g_eff == pytest.approx(0, abs=1e-3)


def test_coupler_off_point_crossing_qubit(design_a):
    """Test that a bracket spanning a qubit crossing is rejected."""
    with pytest.raises(ResonanceError):
        coupler_off_point(design_a, 0.0, 0.45)


def test_sweep_design_b(design_b):
    """Test the coupler sweep: g_eff falls through zero before the coupler reaches the qubits."""
    grid = np.linspace(0.0, 0.45, 181)
    rows = sweep_flux(design_b, "C", grid)

    assert len(rows) == 181
    assert [r.flux for r in rows] == pytest.approx(list(grid))
    first_invalid = next(i for i, r in enumerate(rows) if not r.valid)
    valid = rows[:first_invalid]
    g_eff = [r.g_eff for r in valid]

    assert g_eff[0] == pytest.approx(3.95, abs=0.5)
    assert all(b < a for a, b in zip(g_eff, g_eff[1:]))
    assert sum(1 for a, b in zip(g_eff, g_eff[1:]) if a > 0 >= b) == 1
    # tunable range: -25 MHz scaled by (g1C / 79 MHz)**2 with g1C = 49 MHz, +-40%
    assert -13.5 < min(g_eff) < -5.8
    assert 0 < max(g_eff) < 5.0
    assert all(r.zz_pert is not None and np.isfinite(r.zz_pert) and r.zz_exact is None
               for r in valid)
    assert all(b.omegac < a.omegac for a, b in zip(rows, rows[1:]))


def test_sweep_through_frustrated_squid(design_b):
    """Test that a coupler SQUID with no Josephson energy only invalidates its row."""
    rows = sweep_flux(design_b, "C", np.linspace(0.0, 0.5, 11))

    assert len(rows) == 11
    assert rows[0].valid
    last = rows[-1]
    assert not last.valid
    assert last.ejc is None and last.omegac is None and last.g_eff is None


def test_sweep_parallel_matches_sequential(design_b):
    """Test that a threaded sweep returns rows in grid order."""
    grid = np.linspace(0.0, 0.2, 9)
    sequential = sweep_flux(design_b, "C", grid, base_flux={"Q2": 0.2})
    parallel = sweep_flux(design_b, "C", grid, base_flux={"Q2": 0.2}, runner=GridRunner(workers=4))
    assert parallel == sequential


def test_sweep_with_exact_zz(design_b):
    """Test the optional exact ZZ column with detuned qubits."""
    rows = sweep_flux(design_b, "C", [0.0, 0.05], base_flux={"Q2": 0.2}, levels=4)
    assert all(r.zz_exact is not None for r in rows)


def test_sweep_rejects_bad_input(design_b):
    """Test sweep argument validation."""
    with pytest.raises(ValueError, match="not found"):
        sweep_flux(design_b, "P1", [0.0, 0.1])
    with pytest.raises(ValueError, match="strictly increasing"):
        sweep_flux(design_b, "C", [0.1, 0.0])
    with pytest.raises(ValueError, match="empty"):
        sweep_flux(design_b, "C", [])


def test_solve_off_point_linear():
    """Test that the root finder reaches a plain linear crossing."""
    assert solve_off_point(lambda x: x - 0.3, 0.0, 1.0, "x") == pytest.approx(0.3, abs=1e-12)


def test_geff_rises_with_coupler_frequency():
    """Test that g_eff grows as a coupler above both qubits moves up."""
    rng = np.random.default_rng(23)
    for _ in range(1000):
        omega1, omega2 = rng.uniform(4.5, 6.0, 2)
        g12 = rng.uniform(0.0, 20.0)
        g1c, g2c = rng.uniform(20.0, 120.0, 2)
        low = max(omega1, omega2) + rng.uniform(0.3, 1.0)
        high = low + rng.uniform(0.05, 2.0)

        a = effective_coupling(g12, g1c, g2c, omega1, omega2, low)
        b = effective_coupling(g12, g1c, g2c, omega1, omega2, high)
        assert b.g_eff > a.g_eff
