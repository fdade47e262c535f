"""Tests for the CLI module."""

import csv
import io
import json

import numpy as np
import pytest
from conftest import design_path

from tccp.cli import SWEEP_COLUMNS, cli, parse_assignments
from tccp.config import load_config
from tccp.netlist import load_netlist
from tccp.quantizer import assemble_cap_matrix, flux_for_frequency


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _invoke(runner, temp_config, *args):
    return runner.invoke(cli, ["--config", str(temp_config), *[str(a) for a in args]])


def test_parse_assignments():
    """Test the NAME=VALUE list parser."""
    assert parse_assignments("C=0.23, Q1=0") == {"C": 0.23, "Q1": 0.0}
    assert parse_assignments(None) == {}


def test_analyze_command(runner, temp_config):
    """Test the analyze command at the Design A sweet spot."""
    result = _invoke(runner, temp_config, "analyze", design_path("a"))

    assert result.exit_code == 0
    rows = _rows(result.stdout)
    table = {(r["section"], r["subject"], r["quantity"]): r["value"] for r in rows}
    assert float(table[("mode", "C", "omega_ghz")]) == pytest.approx(6.83, abs=0.01)
    assert float(table[("mode", "Q1", "alpha_mhz")]) < 0
    assert table[("mode", "Q1", "transmon_regime")] == "true"
    assert float(table[("device", "", "geff_mhz")]) > 0
    # resonant qubits cannot be labelled, so the exact ZZ cell stays empty
    assert table[("device", "", "zz_exact_mhz")] == ""


def test_analyze_json_detuned(runner, temp_config):
    """Test JSON output with the exact ZZ available."""
    result = _invoke(runner, temp_config, "analyze", design_path("a"), "--flux", "Q2=0.15",
                     "--format", "json")

    assert result.exit_code == 0
    records = json.loads(result.stdout)
    exact = next(r for r in records if r["quantity"] == "zz_exact_mhz")
    assert exact["value"] is not None


def test_sweep_command(runner, temp_config, tmp_path):
    """Test a short coupler sweep written to a file."""
    out = tmp_path / "out" / "sweep.csv"
    result = _invoke(runner, temp_config, "sweep", design_path("b"), "--from", 0.0, "--to", 0.2,
                     "--steps", 5, "--no-exact", "--output", out)

    assert result.exit_code == 0
    rows = _rows(out.read_text())
    assert list(rows[0]) == SWEEP_COLUMNS
    assert [float(r["flux"]) for r in rows] == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2])
    assert all(r["zz_exact_mhz"] == "" for r in rows)
    assert float(rows[0]["geff_mhz"]) > float(rows[-1]["geff_mhz"])


def test_offpoint_frozen(runner, temp_config):
    """Test the frozen off point with the Design A couplings."""
    result = _invoke(runner, temp_config, "offpoint", design_path("a"), "--to", 0.22, "--frozen",
                     "--g12-mhz", 9.62, "--gqc-mhz", 83.5, "--omega-q-ghz", 5.59)

    assert result.exit_code == 0
    row = _rows(result.stdout)[0]
    assert row["method"] == "frozen"
    assert float(row["omegac_off_ghz"]) == pytest.approx(6.3616, abs=5e-3)


def test_offpoint_analytic(runner, temp_config):
    """Test the analytic off point of Design A."""
    result = _invoke(runner, temp_config, "offpoint", design_path("a"), "--to", 0.22)

    assert result.exit_code == 0
    row = _rows(result.stdout)[0]
    assert 0.1 < float(row["flux_off"]) < 0.22


def test_zz_command(runner, temp_config):
    """Test the perturbative/exact comparison table."""
    result = _invoke(runner, temp_config, "zz", design_path("b"), "--flux", "Q2=0.2",
                     "--from", 0.0, "--to", 0.1, "--steps", 2, "--format", "json")

    assert result.exit_code == 0
    records = json.loads(result.stdout)
    assert [r["flux"] for r in records] == [0.0, 0.1]
    assert all(set(r) == {"flux", "zz_pert_mhz", "zz_exact_mhz", "rel_err"} for r in records)


def test_ramsey_command(runner, temp_config):
    """Test the Ramsey ZZ command."""
    result = _invoke(runner, temp_config, "ramsey", design_path("b"), "--flux", "Q2=0.2",
                     "--span-ns", 2000, "--points", 256)

    assert result.exit_code == 0
    row = _rows(result.stdout)[0]
    assert float(row["fringe0_mhz"]) == pytest.approx(5.0, rel=1e-3)
    assert np.isfinite(float(row["zz_mhz"]))


def test_chevron_fft_command(runner, temp_config):
    """Test the chevron coupling estimates."""
    result = _invoke(runner, temp_config, "chevron", design_path("a"), "--from", 0.0, "--to", 0.05,
                     "--steps", 2, "--delay-points", 128, "--levels", 3, "--fft")

    assert result.exit_code == 0
    rows = _rows(result.stdout)
    assert len(rows) == 2
    assert float(rows[0]["geff_mhz"]) > 0


def test_cz_command(runner, temp_config):
    """Test a fixed-hold CZ pulse on Design D."""
    network = load_netlist(design_path("d"))
    idle = {"Q1": flux_for_frequency(network, "Q1", 5.11),
            "Q2": flux_for_frequency(network, "Q2", 5.64),
            "C": flux_for_frequency(network, "C", 6.404)}
    gate = flux_for_frequency(network, "C", 6.0)
    result = _invoke(runner, temp_config, "cz", design_path("d"),
                     "--idle-flux", ",".join(f"{k}={float(v)}" for k, v in idle.items()),
                     "--gate-flux", f"C={float(gate)}", "--hold-ns", 0, "--dt", 0.1)

    assert result.exit_code == 0
    row = _rows(result.stdout)[0]
    assert float(row["leakage"]) < 1e-2
    assert 0.0 <= float(row["fidelity"]) <= 1.0


def test_anticross_command(runner, temp_config):
    """Test the anticrossing fit of qubit 1 with the coupler."""
    result = _invoke(runner, temp_config, "anticross", design_path("a"), "--qubit", "Q1",
                     "--flux", "Q2=0.25", "--from", 0.22, "--to", 0.30, "--steps", 21)

    assert result.exit_code == 0
    assert 40.0 < float(_rows(result.stdout)[0]["g_qc_mhz"]) < 55.0


def test_topologies_list(runner, temp_config):
    """Test listing the built-in layouts."""
    result = _invoke(runner, temp_config, "topologies")

    assert result.exit_code == 0
    assert [r["name"] for r in _rows(result.stdout)] == [
        "two-pad", "one-pad", "two-pad-asym", "one-pad-asym"]


def test_topologies_build(runner, temp_config, tmp_path, design_a):
    """Test building the Design A netlist from its capacitances."""
    out = tmp_path / "built.net"
    result = _invoke(runner, temp_config, "topologies", "--build", "two-pad",
                     "--caps", "cQG=72.5,cPG=61.7,cCG=25.1,cQP=11.5,cPC=17.8,cP12=21",
                     "--qubit-ej", "9.015,9.015", "--coupler-ej", "8.90,8.90", "--output", out)

    assert result.exit_code == 0
    network = load_netlist(out)
    assert network.names == design_a.names
    np.testing.assert_allclose(assemble_cap_matrix(network).matrix,
                               assemble_cap_matrix(design_a).matrix)


def test_usage_errors_exit_1(runner, temp_config):
    """Test that usage problems map to exit code 1."""
    cases = [
        ["analyze", design_path("a"), "--flux", "C"],
        ["analyze", design_path("a"), "--flux", "P1=0.1"],
        ["sweep", design_path("a"), "--from", 0.4, "--to", 0.0],
        ["topologies", "--build", "three-pad"],
        ["analyze", design_path("a"), "--levels", 2],
        ["frobnicate"],
    ]
    for args in cases:
        assert _invoke(runner, temp_config, *args).exit_code == 1, args


def test_parse_error_exit_2(runner, temp_config, tmp_path):
    """Test that a malformed netlist maps to exit code 2."""
    bad = tmp_path / "bad.net"
    bad.write_text("node Q1 junction ejb=9GHz ejs=9GHz\ngcap Q1 70\n")
    assert _invoke(runner, temp_config, "analyze", bad).exit_code == 2


def test_numeric_error_exit_3(runner, temp_config):
    """Test that numeric failures map to exit code 3."""
    offpoint = _invoke(runner, temp_config, "offpoint", design_path("a"), "--to", 0.45)
    ramsey = _invoke(runner, temp_config, "ramsey", design_path("b"), "--flux", "Q2=0.2",
                     "--span-ns", 100, "--points", 64)

    assert offpoint.exit_code == 3
    assert ramsey.exit_code == 3


def test_init_writes_reloadable_config(runner, temp_config, tmp_path):
    """Test that init writes the active configuration and refuses to overwrite it."""
    target = tmp_path / "out" / "tccp.yaml"
    first = _invoke(runner, temp_config, "init", target)
    second = _invoke(runner, temp_config, "init", target)
    forced = _invoke(runner, temp_config, "init", target, "--force")

    assert first.exit_code == 0
    assert load_config(target) == load_config(temp_config)
    assert second.exit_code == 1
    assert forced.exit_code == 0


def test_chevron_bare_start(runner, temp_config):
    """Test the chevron command from a bare Fock state."""
    result = _invoke(runner, temp_config, "chevron", design_path("a"), "--from", 0.0, "--to", 0.05,
                     "--steps", 2, "--delay-points", 64, "--levels", 3, "--initial", "bare")

    assert result.exit_code == 0
    assert len(_rows(result.stdout)) > 0


def test_frustrated_squid_exit_3(runner, temp_config):
    """Test that a coupler with no Josephson energy left maps to exit code 3."""
    result = _invoke(runner, temp_config, "analyze", design_path("b"), "--flux", "C=0.5")
    assert result.exit_code == 3
