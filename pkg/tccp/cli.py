"""Command-line interface for tccp.

Every command reads a netlist, runs one stage of the pipeline and writes a
machine-readable table (CSV or JSON) to stdout or to --output. Diagnostics go
to stderr.

Exit codes: 0 success, 1 usage error, 2 netlist parse error, 3 numeric failure.
"""

import logging
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional

import click
import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from .config import GridSpec, RunConfig, ToolkitConfig, load_config, save_config
from .coupling import (coupler_off_point, coupler_off_point_frozen, coupling_report,
                       device_couplings, sweep_flux)
from .device import ThreeModeDevice
from .dynamics import adiabatic_cz, chevron_fft, ramsey_zz, swap_chevron, tune_cz_hold
from .errors import LabelAmbiguityError, NetlistError, TccpError
from .netlist import load_netlist, serialize_netlist, validate_flux
from .quantizer import (assemble_cap_matrix, equivalent_capacitance, flux_for_frequency,
                        reduce_to_junction_block)
from .report import render
from .spectrum import anticross_gqc, device_zz_exact, dressed_off_point
from .sweep import GridRunner
from .topologies import get_topology, list_topologies
from .zz import zz_compare, zz_for_device

console = Console(stderr=True)
logger = logging.getLogger("tccp")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_NUMERIC = 3

SWEEP_COLUMNS = ["flux", "ejc_ghz", "omegac_ghz", "g1c_mhz", "g2c_mhz", "geff_mhz",
                 "zz_pert_mhz", "zz_exact_mhz", "valid"]


class ExitCodeGroup(click.Group):
    """Click group that maps tccp errors onto the documented exit codes."""

    def main(self, args=None, prog_name=None, **extra):
        extra.pop("standalone_mode", None)
        try:
            rv = super().main(args=args, prog_name=prog_name, standalone_mode=False, **extra)
        except click.ClickException as e:
            console.print(f"[red]Error: {e.format_message()}[/red]")
            sys.exit(EXIT_USAGE)
        except click.Abort:
            console.print("[red]Aborted[/red]")
            sys.exit(EXIT_USAGE)
        except NetlistError as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_PARSE)
        except TccpError as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_NUMERIC)
        except (ValueError, ValidationError) as e:
            console.print(f"[red]Error: {e}[/red]")
            sys.exit(EXIT_USAGE)
        sys.exit(rv if isinstance(rv, int) else EXIT_OK)


def parse_assignments(value: Optional[str]) -> Dict[str, float]:
    """Parse 'C=0.23,Q1=0.0' into a dict."""
    result: Dict[str, float] = {}
    if not value:
        return result
    for item in value.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, raw = item.partition("=")
        if not sep or not name.strip():
            raise click.BadParameter(f"expected NAME=VALUE, got '{item}'")
        try:
            number = float(raw)
        except ValueError:
            raise click.BadParameter(f"'{raw}' is not a number")
        if not math.isfinite(number):
            raise click.BadParameter(f"'{raw}' is not finite")
        result[name.strip()] = number
    return result


def _assignment_callback(ctx, param, value):
    return parse_assignments(value)


def _setup_logging(level: str) -> None:
    root = logging.getLogger("tccp")
    root.handlers.clear()
    handler = RichHandler(console=console, show_time=False, show_path=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(level)
    root.propagate = False


def _emit(records: List[dict], run: RunConfig, config: ToolkitConfig,
          columns: Optional[List[str]] = None) -> None:
    text = render(records, run.format, config.output.significant_digits, columns)
    if run.output:
        run.output.parent.mkdir(parents=True, exist_ok=True)
        run.output.write_text(text, encoding="utf-8")
        logger.info("wrote %d rows to %s", len(records), run.output)
    else:
        click.echo(text, nl=False)


def _run_config(ctx, command: str, netlist: Path, flux, fmt, output, levels=None, dt=None,
                grid=None, coupler=None) -> RunConfig:
    config: ToolkitConfig = ctx.obj['config']
    try:
        return RunConfig(command=command, netlist=netlist, flux=flux or {},
                         grid=grid, coupler=coupler,
                         levels=levels if levels is not None else config.solver.levels,
                         dt=dt if dt is not None else config.dynamics.dt_ns,
                         format=fmt or config.output.format, output=output)
    except ValidationError as e:
        raise click.UsageError(str(e))


def _grid(start: float, stop: float, steps: int) -> GridSpec:
    try:
        return GridSpec(start=start, stop=stop, steps=steps)
    except ValidationError as e:
        raise click.BadParameter(e.errors()[0]["msg"])


def _load(run: RunConfig):
    network = load_netlist(run.netlist)
    try:
        validate_flux(network, run.flux)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--flux")
    return network


def output_options(f):
    f = click.option('--output', '-o', type=click.Path(dir_okay=False, path_type=Path),
                     help='Write the table here instead of stdout')(f)
    f = click.option('--format', 'fmt', type=click.Choice(['csv', 'json']),
                     help='Output format (default from config)')(f)
    return f


def device_options(f):
    f = click.option('--coupler', help='Coupler junction name (default: C, else the second junction)')(f)
    f = click.option('--flux', callback=_assignment_callback,
                     help='Flux per junction in flux quanta, e.g. "C=0.23,Q1=0.0"')(f)
    f = click.argument('netlist', type=click.Path(exists=True, dir_okay=False, path_type=Path))(f)
    return f


def grid_options(f):
    f = click.option('--steps', type=int, default=81, show_default=True, help='Grid points')(f)
    f = click.option('--to', 'stop', type=float, required=True, help='Last flux value')(f)
    f = click.option('--from', 'start', type=float, required=True, help='First flux value')(f)
    return f


@click.group(cls=ExitCodeGroup)
@click.option('--config', type=click.Path(exists=True, path_type=Path), help='Configuration file path')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging on stderr')
@click.pass_context
def cli(ctx, config, verbose):
    """Quantize tunable-coupler circuits and simulate their coupling physics.

    Typical flow:
    1. analyze a netlist at a flux point
    2. sweep the coupler flux to map g_eff and ZZ
    3. locate the coupler-off point
    4. simulate chevrons, Ramsey ZZ and adiabatic CZ gates
    """
    ctx.ensure_object(dict)
    ctx.obj['config'] = load_config(config)
    _setup_logging("DEBUG" if verbose else ctx.obj['config'].logging.level)


@cli.command()
@device_options
@click.option('--levels', type=int, help='Fock levels per mode for the exact ZZ')
@output_options
@click.pass_context
def analyze(ctx, netlist, flux, coupler, levels, fmt, output):
    """Report mode parameters, couplings, g_eff and ZZ at one flux point."""
    run = _run_config(ctx, "analyze", netlist, flux, fmt, output, levels=levels, coupler=coupler)
    network = _load(run)
    device = ThreeModeDevice.from_network(network, run.flux, coupler=run.coupler)
    block = reduce_to_junction_block(assemble_cap_matrix(network), network)
    capacitance = equivalent_capacitance(block)

    records = []
    for name in device.names:
        mode = device.modes[name]
        for quantity, value in (("ec_ghz", mode.ec), ("ej_ghz", mode.ej),
                                ("omega_ghz", mode.omega), ("alpha_mhz", 1e3 * mode.alpha),
                                ("xi", mode.xi), ("n_zpf", mode.n_zpf), ("phi_zpf", mode.phi_zpf),
                                ("equivalent_capacitance_ff", capacitance[name]),
                                ("transmon_regime", not mode.outside_transmon_regime)):
            records.append({"section": "mode", "subject": name, "quantity": quantity, "value": value})

    q1, c, q2 = device.names
    g = device_couplings(device)
    for subject, energy, coupling in ((f"{q1}-{c}", device.e1c, g.g1c),
                                      (f"{q2}-{c}", device.e2c, g.g2c),
                                      (f"{q1}-{q2}", device.e12, g.g12)):
        records.append({"section": "pair", "subject": subject, "quantity": "e_mhz", "value": 1e3 * energy})
        records.append({"section": "pair", "subject": subject, "quantity": "g_mhz", "value": coupling})

    report = coupling_report(device)
    zz = zz_for_device(device)
    try:
        exact = device_zz_exact(device, run.levels)
    except LabelAmbiguityError as e:
        logger.warning("exact ZZ unavailable: %s", e)
        exact = None
    for quantity, value in (("geff_mhz", report.g_eff), ("omega1_eff_ghz", report.omega1_eff),
                            ("omega2_eff_ghz", report.omega2_eff), ("zz_pert_mhz", zz.zz_total),
                            ("zz_exact_mhz", exact), ("zz_valid", zz.validity == "ok")):
        records.append({"section": "device", "subject": "", "quantity": quantity, "value": value})
    _emit(records, run, ctx.obj['config'], ["section", "subject", "quantity", "value"])


@cli.command()
@device_options
@grid_options
@click.option('--junction', help='Junction whose flux is swept (default: the coupler)')
@click.option('--exact/--no-exact', default=True, show_default=True, help='Include the exact ZZ column')
@click.option('--levels', type=int, help='Fock levels per mode')
@output_options
@click.pass_context
def sweep(ctx, netlist, flux, coupler, start, stop, steps, junction, exact, levels, fmt, output):
    """Sweep a junction flux and tabulate couplings, g_eff and ZZ."""
    config: ToolkitConfig = ctx.obj['config']
    run = _run_config(ctx, "sweep", netlist, flux, fmt, output, levels=levels,
                      grid=_grid(start, stop, steps), coupler=coupler)
    network = _load(run)
    junction = junction or ThreeModeDevice.from_network(network, run.flux, coupler=run.coupler).names[1]
    rows = sweep_flux(network, junction, run.grid.values(), base_flux=run.flux, coupler=run.coupler,
                      levels=run.levels if exact else None,
                      invalid_ratio=config.solver.invalid_ratio,
                      runner=GridRunner.from_config(config))
    records = [{"flux": r.flux, "ejc_ghz": r.ejc, "omegac_ghz": r.omegac, "g1c_mhz": r.g1c,
                "g2c_mhz": r.g2c, "geff_mhz": r.g_eff, "zz_pert_mhz": r.zz_pert,
                "zz_exact_mhz": r.zz_exact, "valid": r.valid} for r in rows]
    _emit(records, run, config, SWEEP_COLUMNS)


@cli.command()
@device_options
@click.option('--from', 'start', type=float, default=0.0, show_default=True, help='Bracket start (flux)')
@click.option('--to', 'stop', type=float, required=True, help='Bracket end (flux)')
@click.option('--oracle', is_flag=True, help='Use the exact spectrum instead of the analytic g_eff')
@click.option('--frozen', is_flag=True, help='Scalar model with couplings frozen at the given flux')
@click.option('--g12-mhz', type=float, help='Frozen direct coupling override')
@click.option('--gqc-mhz', type=float, help='Frozen qubit-coupler coupling override (both qubits)')
@click.option('--omega-q-ghz', type=float, help='Frozen qubit frequency override (both qubits)')
@click.option('--levels', type=int, help='Fock levels per mode (oracle only)')
@output_options
@click.pass_context
def offpoint(ctx, netlist, flux, coupler, start, stop, oracle, frozen, g12_mhz, gqc_mhz,
             omega_q_ghz, levels, fmt, output):
    """Find the coupler flux where the qubit-qubit coupling vanishes."""
    run = _run_config(ctx, "offpoint", netlist, flux, fmt, output, levels=levels, coupler=coupler)
    network = _load(run)
    if frozen:
        device = ThreeModeDevice.from_network(network, run.flux, coupler=run.coupler)
        g = device_couplings(device)
        omega1 = omega_q_ghz if omega_q_ghz is not None else device.q1.omega
        omega2 = omega_q_ghz if omega_q_ghz is not None else device.q2.omega
        omegac = coupler_off_point_frozen(
            g12_mhz if g12_mhz is not None else g.g12,
            gqc_mhz if gqc_mhz is not None else g.g1c,
            gqc_mhz if gqc_mhz is not None else g.g2c, omega1, omega2)
        try:
            flux_off = flux_for_frequency(network, device.names[1], omegac)
        except TccpError as e:
            logger.warning("coupler cannot reach %.6f GHz: %s", omegac, e)
            flux_off = None
        method = "frozen"
    elif oracle:
        flux_off = dressed_off_point(network, start, stop, base_flux=run.flux,
                                     coupler=run.coupler, levels=run.levels)
        device = ThreeModeDevice.from_network(
            network, {**run.flux, **_coupler_flux(network, run, flux_off)}, coupler=run.coupler)
        omegac = device.coupler.omega
        method = "oracle"
    else:
        flux_off, omegac = coupler_off_point(network, start, stop, base_flux=run.flux,
                                             coupler=run.coupler)
        method = "analytic"
    _emit([{"method": method, "flux_off": flux_off, "omegac_off_ghz": omegac}],
          run, ctx.obj['config'])


def _coupler_flux(network, run: RunConfig, value: float) -> Dict[str, float]:
    name = ThreeModeDevice.from_network(network, run.flux, coupler=run.coupler).names[1]
    return {name: value}


@cli.command()
@device_options
@grid_options
@click.option('--levels', type=int, help='Fock levels per mode')
@output_options
@click.pass_context
def zz(ctx, netlist, flux, coupler, start, stop, steps, levels, fmt, output):
    """Compare perturbative and exact ZZ over a coupler flux grid."""
    config: ToolkitConfig = ctx.obj['config']
    run = _run_config(ctx, "zz", netlist, flux, fmt, output, levels=levels,
                      grid=_grid(start, stop, steps), coupler=coupler)
    network = _load(run)
    rows = zz_compare(network, run.grid.values(), base_flux=run.flux, coupler=run.coupler,
                      levels=run.levels, runner=GridRunner.from_config(config))
    records = [{"flux": r.flux, "zz_pert_mhz": r.zz_pert, "zz_exact_mhz": r.zz_exact,
                "rel_err": r.rel_err} for r in rows]
    _emit(records, run, config)


@cli.command()
@device_options
@click.option('--target', help='Qubit probed by the Ramsey sequence (default: qubit 2)')
@click.option('--span-ns', type=float, default=4000.0, show_default=True, help='Evolution span')
@click.option('--points', type=int, default=1024, show_default=True, help='Evolution samples')
@click.option('--detuning-mhz', type=float, default=5.0, show_default=True, help='Artificial detuning')
@click.option('--levels', type=int, help='Fock levels per mode')
@output_options
@click.pass_context
def ramsey(ctx, netlist, flux, coupler, target, span_ns, points, detuning_mhz, levels, fmt, output):
    """Measure ZZ as the Ramsey fringe shift when the other qubit is excited."""
    run = _run_config(ctx, "ramsey", netlist, flux, fmt, output, levels=levels, coupler=coupler)
    network = _load(run)
    times = np.linspace(0.0, span_ns, points)
    result = ramsey_zz(network, run.flux, times, detuning_mhz, target, run.coupler, run.levels)
    _emit([{"fringe0_mhz": result.fringe0, "fringe1_mhz": result.fringe1, "zz_mhz": result.zz}],
          run, ctx.obj['config'])


@cli.command()
@device_options
@grid_options
@click.option('--excite', default=None, help='Qubit prepared in |1> (default: qubit 1)')
@click.option('--delay-ns', type=float, default=1000.0, show_default=True, help='Longest delay')
@click.option('--delay-points', type=int, default=256, show_default=True, help='Delay samples')
@click.option('--initial', type=click.Choice(['dressed', 'bare']), default='dressed', show_default=True,
              help='Start from the dressed or the bare single excitation')
@click.option('--fft', is_flag=True, help='Emit per-flux g_eff from the FFT instead of populations')
@click.option('--levels', type=int, help='Fock levels per mode')
@output_options
@click.pass_context
def chevron(ctx, netlist, flux, coupler, start, stop, steps, excite, delay_ns, delay_points,
            initial, fft, levels, fmt, output):
    """Simulate a SWAP chevron over coupler flux and delay."""
    config: ToolkitConfig = ctx.obj['config']
    run = _run_config(ctx, "chevron", netlist, flux, fmt, output, levels=levels,
                      grid=_grid(start, stop, steps), coupler=coupler)
    network = _load(run)
    excite = excite or ThreeModeDevice.from_network(network, run.flux, coupler=run.coupler).names[0]
    delays = np.linspace(0.0, delay_ns, delay_points)
    chevron_map = swap_chevron(network, excite, run.grid.values(), delays, base_flux=run.flux,
                               coupler=run.coupler, levels=run.levels, initial=initial,
                               runner=GridRunner.from_config(config))
    if fft:
        estimates = chevron_fft(chevron_map)
        records = [{"flux": f, "geff_mhz": g} for f, g in zip(chevron_map.flux, estimates)]
    else:
        records = [{"flux": f, "delay_ns": t, "p_excited": p}
                   for f, column in zip(chevron_map.flux, chevron_map.population)
                   for t, p in zip(chevron_map.delay, column)]
    _emit(records, run, config)


@cli.command()
@click.argument('netlist', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--coupler', help='Coupler junction name')
@click.option('--idle-flux', callback=_assignment_callback, required=True,
              help='Flux at the idle point, e.g. "Q1=0.1,Q2=0.0,C=0.0"')
@click.option('--gate-flux', callback=_assignment_callback, required=True,
              help='Flux changes at the gate point, e.g. "C=0.2"')
@click.option('--ramp-ns', type=float, default=20.0, show_default=True, help='Cosine ramp time')
@click.option('--hold-ns', type=float, help='Hold time (tuned for a pi phase when omitted)')
@click.option('--dt', type=float, help='Integrator step in ns (default from config)')
@click.option('--levels', type=int, default=3, show_default=True, help='Fock levels per mode')
@output_options
@click.pass_context
def cz(ctx, netlist, coupler, idle_flux, gate_flux, ramp_ns, hold_ns, dt, levels, fmt, output):
    """Simulate an adiabatic CZ pulse and report phase, leakage and fidelity."""
    config: ToolkitConfig = ctx.obj['config']
    run = _run_config(ctx, "cz", netlist, idle_flux, fmt, output, levels=levels, dt=dt,
                      coupler=coupler)
    network = _load(run)
    try:
        validate_flux(network, gate_flux)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--gate-flux")
    if hold_ns is None:
        result = tune_cz_hold(network, run.flux, gate_flux, ramp_ns, run.dt, run.coupler,
                              run.levels, config.dynamics.max_leakage)
    else:
        result = adiabatic_cz(network, run.flux, gate_flux, ramp_ns, hold_ns, run.dt,
                              run.coupler, run.levels, config.dynamics.max_leakage)
    logger.info("CZ hold time %.6g ns", result.hold_ns)
    _emit([{"cond_phase_rad": result.conditional_phase, "leakage": result.leakage,
            "fidelity": result.fidelity}], run, config)


@cli.command()
@device_options
@grid_options
@click.option('--qubit', required=True, help='Qubit whose anticrossing with the coupler is fitted')
@click.option('--levels', type=int, help='Fock levels per mode')
@output_options
@click.pass_context
def anticross(ctx, netlist, flux, coupler, start, stop, steps, qubit, levels, fmt, output):
    """Fit the qubit-coupler anticrossing and report g_QC."""
    config: ToolkitConfig = ctx.obj['config']
    run = _run_config(ctx, "anticross", netlist, flux, fmt, output, levels=levels,
                      grid=_grid(start, stop, steps), coupler=coupler)
    network = _load(run)
    result = anticross_gqc(network, qubit, run.grid.values(), base_flux=run.flux,
                           coupler=run.coupler, levels=run.levels,
                           runner=GridRunner.from_config(config))
    _emit([{"qubit": qubit, "g_qc_mhz": result.g_qc, "center_ghz": result.center,
            "min_gap_mhz": 1e3 * result.min_gap}], run, config)


@cli.command()
@click.option('--build', 'name', help='Build a netlist for this layout instead of listing layouts')
@click.option('--caps', callback=_assignment_callback, help='Capacitances in fF, e.g. "cQG=72.5,cPG=61.7,..."')
@click.option('--qubit-ej', default="9.0,9.0", show_default=True, help='Qubit SQUID "ejb,ejs" in GHz')
@click.option('--coupler-ej', default="8.9,8.9", show_default=True, help='Coupler SQUID "ejb,ejs" in GHz')
@output_options
@click.pass_context
def topologies(ctx, name, caps, qubit_ej, coupler_ej, fmt, output):
    """List the built-in coupler layouts, or build a netlist from one."""
    config: ToolkitConfig = ctx.obj['config']
    if name is None:
        records = []
        for key in list_topologies():
            topology = get_topology(key)
            records.append({"name": topology.name, "description": topology.description,
                            "capacitances": " ".join(topology.capacitance_names)})
        run = RunConfig(command="topologies", netlist=Path("-"), format=fmt or config.output.format,
                        output=output)
        _emit(records, run, config)
        return

    try:
        topology = get_topology(name)
    except ValueError as e:
        raise click.BadParameter(str(e), param_hint="--build")
    network = topology.build(caps, _squid(qubit_ej, "--qubit-ej"), _squid(coupler_ej, "--coupler-ej"))
    text = serialize_netlist(network)
    if output:
        output.write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _squid(value: str, hint: str):
    try:
        ejb, ejs = (float(v) for v in value.split(","))
    except ValueError:
        raise click.BadParameter(f"expected 'ejb,ejs', got '{value}'", param_hint=hint)
    return ejb, ejs


@cli.command()
@click.argument('path', type=click.Path(dir_okay=False, path_type=Path), default='tccp.yaml')
@click.option('--force', is_flag=True, help='Overwrite an existing file')
@click.pass_context
def init(ctx, path, force):
    """Write the active configuration to a YAML file to start from."""
    if path.exists() and not force:
        raise click.UsageError(f"{path} already exists; pass --force to overwrite it")
    save_config(ctx.obj['config'], path)
    console.print(f"[green]Wrote configuration to {path}[/green]")


def main():
    """Entry point for the CLI."""
    cli()


if __name__ == '__main__':
    main()
