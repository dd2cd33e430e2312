"""Trajectory and report serialization: delimited text plus JSON reports.

Floating-point values are written with 17 significant digits so a re-read
CSV reproduces the exact binary values.
"""

from __future__ import annotations

import csv
import json
from typing import List, Tuple

import numpy as np

from .diagnostics import (PROCESSES, DiagnosticsReport, energy_series,
                          internal_entropy_production)
from .errors import ConfigError
from .models import Scenario
from .nsf1d import Fluid1DState, FluidScenario, FluidTrajectory
from .simulate import Trajectory, trajectory_from_states
from .state import ThermoState


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trajectory_header(scenario: Scenario) -> List[str]:
    top = scenario.topology
    cols = ["t"]
    cols += [f"q{i}" for i in range(top.n_mech)]
    cols += [f"v{i}" for i in range(top.n_mech)]
    cols += [f"S{a}" for a in range(top.P)]
    cols += [f"N{k}" for k in range(top.K)]
    cols += [f"Gamma{a}" for a in range(top.P)]
    cols += [f"W{k}" for k in range(top.K)]
    cols += [f"Sigma{a}" for a in range(top.P)]
    cols += ["E", "I"]
    cols += [f"I_{name}" for name in PROCESSES]
    return cols


def export_csv(traj: Trajectory, path: str) -> None:
    """Write a sampled trajectory: state columns, energy, entropy production
    total and per-process columns. Empty trajectories yield a header-only file."""
    E = energy_series(traj) if traj.n_samples else np.zeros(0)
    I, buckets, _ = internal_entropy_production(traj)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(trajectory_header(traj.scenario))
        for i, (t, x, _r, _f) in enumerate(traj):
            row = [t, *x.q, *x.v, *x.S, *x.N, *x.Gamma, *x.W, *x.Sigma,
                   E[i], I[i], *(buckets[name][i] for name in PROCESSES)]
            w.writerow(_fmt(v) for v in row)


def import_csv(path: str, scenario: Scenario) -> Trajectory:
    """Re-ingest an exported CSV: rebuild states, re-evaluate rates and fluxes."""
    top = scenario.topology
    expected = trajectory_header(scenario)
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != expected:
            raise ConfigError(
                f"CSV header does not match scenario {scenario.name!r}")
        times = []
        states = []
        n, P, K = top.n_mech, top.P, top.K
        for row in reader:
            vals = [float(v) for v in row]
            t = vals[0]
            idx = 1
            segs = {}
            for name, size in (("q", n), ("v", n), ("S", P), ("N", K),
                               ("Gamma", P), ("W", K), ("Sigma", P)):
                segs[name] = np.array(vals[idx:idx + size])
                idx += size
            times.append(t)
            states.append(ThermoState(t=t, nu=np.zeros(top.n_reactions), **segs))
    return trajectory_from_states(scenario, times, states)


def export_report(report, path: str, kind: str = "ode") -> None:
    doc = {
        "format": "vartherm-report/1",
        "kind": kind,
        "report": report.to_dict() if isinstance(report, DiagnosticsReport) else dict(report),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def fluid_header(scenario: FluidScenario) -> List[str]:
    P = scenario.eos.n_species
    return ["t", "cell", "x"] + [f"rho{a}" for a in range(P)] + ["v", "s"]


def export_fluid_csv(traj: FluidTrajectory, path: str) -> None:
    """One row per cell per sample time."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(fluid_header(traj.scenario))
        for t, st in zip(traj.times, traj.states):
            xs = st.x
            for c in range(st.n_cells):
                row = [t, c, xs[c], *st.rho[:, c], st.vel[c], st.s[c]]
                w.writerow([_fmt(row[0]), str(c)] + [_fmt(v) for v in row[2:]])


def import_fluid_csv(path: str, scenario: FluidScenario) -> FluidTrajectory:
    expected = fluid_header(scenario)
    ref = scenario.initial_state
    P = ref.n_species
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != expected:
            raise ConfigError("fluid CSV header does not match the scenario")
        rows = [(float(r[0]), int(r[1]), [float(v) for v in r[3:]]) for r in reader]
    times = sorted({t for t, _c, _v in rows})
    t_index = {t: i for i, t in enumerate(times)}
    M = ref.n_cells
    rho = np.zeros((len(times), P, M))
    vel = np.zeros((len(times), M))
    s = np.zeros((len(times), M))
    for t, c, vals in rows:
        i = t_index[t]
        rho[i, :, c] = vals[:P]
        vel[i, c] = vals[P]
        s[i, c] = vals[P + 1]
    states: Tuple[Fluid1DState, ...] = tuple(
        Fluid1DState(length=ref.length, rho=rho[i], vel=vel[i], s=s[i])
        for i in range(len(times)))
    return FluidTrajectory(scenario=scenario, times=np.array(times), states=states)
