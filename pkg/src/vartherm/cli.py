"""Command-line interface.

Exit codes: 0 clean run, 2 law violation detected, 3 integration failure,
4 configuration error. Verbosity through the VARTHERM_LOG environment
variable (debug, info, warning, error).
"""

from __future__ import annotations

import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from .config import (SCENARIO_DESCRIPTIONS, RunConfig, build_scenario,
                     load_config)
from .diagnostics import assemble_report
from .errors import (ConfigError, FormulationError, InadmissibleStateError,
                     IntegrationFailure, ModelValidationError, VarthermError)
from .export import (export_csv, export_fluid_csv, export_report, import_csv,
                     import_fluid_csv)
from .integrators import IntegratorConfig
from .models import Scenario
from .nsf1d import FluidScenario, fluid_diagnostics, run_fluid
from .simulate import run_scenario

EXIT_CLEAN = 0
EXIT_LAW_VIOLATION = 2
EXIT_INTEGRATION_FAILURE = 3
EXIT_CONFIG_ERROR = 4

log = logging.getLogger("vartherm")


def _setup_logging() -> None:
    level = os.environ.get("VARTHERM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _apply_overrides(cfg: RunConfig, t_end, dt, integrator) -> RunConfig:
    from dataclasses import replace
    if t_end is not None:
        cfg = replace(cfg, t_end=t_end)
    if dt is not None or integrator is not None:
        base = cfg.integrator or IntegratorConfig()
        kw = {}
        if dt is not None:
            kw["dt"] = dt
        if integrator is not None:
            kw["method"] = integrator
        cfg = replace(cfg, integrator=replace(base, **kw))
    return cfg


def _out_paths(config_path: str, out, report, out_dir):
    stem = Path(config_path).stem
    base = Path(out_dir) if out_dir else Path(".")
    csv_path = Path(out) if out else base / f"{stem}.csv"
    report_path = Path(report) if report else base / f"{stem}.report.json"
    return str(csv_path), str(report_path)


def run_one(config_path: str, *, t_end=None, dt=None, integrator=None,
            out=None, report=None, out_dir=None) -> int:
    """Load, run, export and law-check one config; returns the exit code."""
    try:
        cfg = _apply_overrides(load_config(config_path), t_end, dt, integrator)
        scenario = build_scenario(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG_ERROR

    csv_path, report_path = _out_paths(config_path, out, report, out_dir)
    try:
        if isinstance(scenario, FluidScenario):
            traj = run_fluid(scenario)
            rep = fluid_diagnostics(traj)
            export_fluid_csv(traj, csv_path)
            export_report(rep, report_path, kind="fluid")
            flags = rep["law_flags"]
            clean = all(flags.values())
            summary = (f"{scenario.name}: t_end={traj.times[-1]:g} "
                       f"mass_drift={rep['species_mass_drift']:.2e} "
                       f"energy_drift={rep['energy_drift']:.2e}")
        else:
            traj = run_scenario(scenario)
            rep = assemble_report(traj)
            export_csv(traj, csv_path)
            export_report(rep, report_path, kind="ode")
            flags = rep.law_flags
            clean = rep.clean
            summary = (f"{scenario.name}: t_end={rep.t_end:g} "
                       f"first_law_residual={rep.max_first_law_residual:.2e} "
                       f"min_production={rep.min_internal_production:+.2e}")
    except (IntegrationFailure, InadmissibleStateError, FormulationError) as exc:
        click.echo(f"integration failure: {exc}", err=True)
        return EXIT_INTEGRATION_FAILURE

    click.echo(summary)
    click.echo(f"wrote {csv_path} and {report_path}")
    if not clean:
        bad = sorted(name for name, ok in flags.items() if not ok)
        click.echo(f"law violation: failed checks {bad}", err=True)
        return EXIT_LAW_VIOLATION
    return EXIT_CLEAN


def _run_one_star(args) -> int:
    path, kw = args
    return run_one(path, **kw)


@click.group()
def main() -> None:
    """Thermodynamic-system simulator with built-in law verification."""
    _setup_logging()


@main.command("run")
@click.argument("configs", nargs=-1, required=True,
                type=click.Path(exists=False, dir_okay=False))
@click.option("--out", default=None, help="trajectory CSV path (single config only)")
@click.option("--report", default=None, help="report JSON path (single config only)")
@click.option("--out-dir", default=None, help="directory for derived output names")
@click.option("--t-end", type=float, default=None, help="override run length")
@click.option("--dt", type=float, default=None, help="override (initial) step size")
@click.option("--integrator", default=None,
              type=click.Choice(["rk4", "dopri45", "implicit_midpoint"]),
              help="override integration method")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="run multiple configs in parallel processes")
def run_command(configs, out, report, out_dir, t_end, dt, integrator, jobs):
    """Integrate scenario CONFIGS and write trajectories plus law reports."""
    if len(configs) > 1 and (out or report):
        click.echo("--out/--report apply to a single config; use --out-dir", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    kw = dict(t_end=t_end, dt=dt, integrator=integrator, out=out,
              report=report, out_dir=out_dir)
    if len(configs) == 1 or jobs <= 1:
        codes = [run_one(c, **kw) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_run_one_star, [(c, kw) for c in configs]))
    sys.exit(max(codes))


@main.command("list-scenarios")
def list_scenarios() -> None:
    """List available scenario names."""
    for name, desc in SCENARIO_DESCRIPTIONS.items():
        click.echo(f"{name:18s} {desc}")


@main.command("validate")
@click.argument("config", type=click.Path(dir_okay=False))
def validate_command(config) -> None:
    """Validate a config file and its scenario without running it."""
    try:
        cfg = load_config(config)
        build_scenario(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    click.echo(f"{config}: valid ({cfg.scenario})")
    sys.exit(EXIT_CLEAN)


@main.command("check")
@click.argument("trajectory", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_config", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="config that produced the trajectory")
@click.option("--report", default=None, help="write the recomputed report here")
def check_command(trajectory, scenario_config, report) -> None:
    """Re-ingest an exported CSV and recompute the diagnostics report."""
    try:
        cfg = load_config(scenario_config)
        scenario = build_scenario(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    try:
        if isinstance(scenario, FluidScenario):
            traj = import_fluid_csv(trajectory, scenario)
            rep = fluid_diagnostics(traj)
            flags = rep["law_flags"]
            doc = rep
            kind = "fluid"
        else:
            traj = import_csv(trajectory, scenario)
            rep = assemble_report(traj)
            flags = rep.law_flags
            doc = rep.to_dict()
            kind = "ode"
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)
    except (IntegrationFailure, InadmissibleStateError, FormulationError,
            VarthermError) as exc:
        click.echo(f"check failure: {exc}", err=True)
        sys.exit(EXIT_INTEGRATION_FAILURE)
    if report:
        export_report(rep, report, kind=kind)
    click.echo(json.dumps(doc, indent=2, sort_keys=True, default=float))
    sys.exit(EXIT_CLEAN if all(flags.values()) else EXIT_LAW_VIOLATION)


if __name__ == "__main__":
    main()
