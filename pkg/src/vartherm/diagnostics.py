"""First-law and second-law verification over sampled trajectories.

The energy rate is assembled analytically from the sampled StateRate (never
by finite-differencing E(t)), so the first-law residual isolates
formulation and assembly errors from time-integration error:

    dE/dt = <F_fr + F_ext, v> + sum_A T^A dS_A + sum_k mu^k dN_k

with T^A and mu^k read from the displacement rates (dGamma, dW). External
power terms are recomputed independently from the scenario's force and
port/source profiles, not from the flux snapshot.

The internal entropy production I(t) = sum_A dSigma_A is decomposed into
per-process buckets; for compliant phenomenology every bucket is a
quadratic form and must be pointwise nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import UnsupportedDecompositionError
from .evolution import external_force
from .reactions import affinity
from .simulate import Trajectory

PROCESSES = ("friction", "heat_conduction", "matter_transfer",
             "mixing", "heating", "reaction")

#: relative tolerance for pointwise production / bucket nonnegativity
PRODUCTION_REL_TOL = 1e-12

#: steady-state threshold on the componentwise-scaled rate norm [1/s]
STEADY_THRESHOLD = 1e-8


@dataclass(frozen=True)
class DiagnosticsReport:
    """Law-check summary for one trajectory."""

    scenario: str
    family: str
    t_end: float
    n_samples: int
    max_first_law_residual: float          # relative
    min_internal_production: float         # W/K
    production_by_process: Dict[str, float]  # integrated entropy [J/K]
    law_flags: Dict[str, bool]
    first_violation_time: Optional[float]
    equilibrium: Dict[str, object]

    @property
    def clean(self) -> bool:
        return all(self.law_flags.values())

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "family": self.family,
            "t_end": self.t_end,
            "n_samples": self.n_samples,
            "max_first_law_residual": self.max_first_law_residual,
            "min_internal_production": self.min_internal_production,
            "production_by_process": dict(self.production_by_process),
            "law_flags": dict(self.law_flags),
            "first_violation_time": self.first_violation_time,
            "equilibrium": dict(self.equilibrium),
        }


def _total_external_force(traj: Trajectory, x):
    sc = traj.scenario
    n = sc.topology.n_mech
    if sc.external_forces_per_subsystem is not None:
        total = np.zeros(n)
        for f in sc.external_forces_per_subsystem:
            total += external_force(f, x, n)
        return total
    return external_force(sc.external_force, x, n)


def external_power_series(traj: Trajectory):
    """(P_W, P_H, P_M) per sample, recomputed from the scenario profiles."""
    sc = traj.scenario
    P_W = np.zeros(traj.n_samples)
    P_H = np.zeros(traj.n_samples)
    P_M = np.zeros(traj.n_samples)
    for i, (t, x, _r, _f) in enumerate(traj):
        P_W[i] = float(np.dot(_total_external_force(traj, x), x.v))
        for src in sc.topology.heat_sources:
            P_H[i] += src.entropy_rate(t) * src.temperature(t)
        for port in sc.topology.ports:
            ms = port.molar_state(t)
            P_M[i] += port.flow_rate(t) * ms.H   # J (mu + T S) = J H
    return P_W, P_H, P_M


def energy_rate_series(traj: Trajectory) -> np.ndarray:
    """dE/dt per sample, assembled from the sampled rates (analytic chain rule)."""
    out = np.zeros(traj.n_samples)
    for i, (t, x, r, f) in enumerate(traj):
        fr_power = float(np.sum(f.F_fr @ x.v)) if x.q.size else 0.0
        ext_power = float(np.dot(_total_external_force(traj, x), x.v))
        out[i] = (fr_power + ext_power + float(np.dot(r.dGamma, r.dS))
                  + float(np.dot(r.dW, r.dN)))
    return out


def first_law_residual(traj: Trajectory) -> np.ndarray:
    """Relative residual dE/dt - P_W - P_H - P_M per sample."""
    dE = energy_rate_series(traj)
    P_W, P_H, P_M = external_power_series(traj)
    resid = dE - P_W - P_H - P_M
    t_span = max(traj.times[-1] - traj.times[0], 1e-30)
    E0 = abs(energy_series(traj)[0])
    scale = max(float(np.max(np.abs(P_W) + np.abs(P_H) + np.abs(P_M))),
                float(np.max(np.abs(dE))), E0 / t_span, 1e-30)
    return resid / scale


def energy_series(traj: Trajectory) -> np.ndarray:
    from .lagrangian import energy
    return np.array([energy(traj.scenario.lagrangian, x) for x in traj.states])


def total_entropy_series(traj: Trajectory) -> np.ndarray:
    return np.array([float(np.sum(x.S)) for x in traj.states])


def production_buckets(traj: Trajectory, i: int) -> Dict[str, float]:
    """Per-process entropy production rates [W/K] at sample i."""
    sc = traj.scenario
    x, r, f = traj.states[i], traj.rates[i], traj.fluxes[i]
    T = r.dGamma          # temperatures, by the displacement condition
    mu = r.dW
    out = {name: 0.0 for name in PROCESSES}

    if x.q.size and f.F_fr.size:
        out["friction"] = -float(np.sum((f.F_fr @ x.v) / T))
    P = T.size
    for A in range(P):
        for B in range(A + 1, P):
            JAB = f.J_heat[A, B]
            if JAB != 0.0:
                out["heat_conduction"] += JAB * (1.0 / T[B] - 1.0 / T[A]) * (T[B] - T[A])
    K = mu.size
    if K and f.J_matter.size:
        owner = sc.topology.compartment_owner
        for k in range(K):
            for l in range(k + 1, K):
                Jlk = f.J_matter[l, k]
                if Jlk != 0.0:
                    # same-temperature pairs use the difference-first form to
                    # avoid cancellation in mu/T for nearly equal mu
                    if owner[l] == owner[k]:
                        out["matter_transfer"] += Jlk * (mu[l] - mu[k]) / T[owner[k]]
                    else:
                        out["matter_transfer"] += Jlk * (mu[l] / T[owner[l]]
                                                         - mu[k] / T[owner[k]])
    if f.J_ports:
        acc = 0.0
        for pf in f.J_ports:
            acc += pf.J * (pf.mu - mu[0]) + pf.J_S * (pf.T - T[0])
        out["mixing"] = acc / T[0]
    if f.J_sources:
        out["heating"] = sum(sf.J_S * (sf.T - T[0]) for sf in f.J_sources) / T[0]
    if f.J_reactions.size:
        aff = affinity(sc.topology.reactions, mu)
        out["reaction"] = float(np.dot(f.J_reactions, aff)) / T[0]
    return out


def internal_entropy_production(traj: Trajectory):
    """(I, buckets, gross): production series, per-process series, gross scale.

    I(t) = sum_A dSigma_A; buckets must add up to I within
    PRODUCTION_REL_TOL of the gross term scale.
    """
    n = traj.n_samples
    I = np.array([float(np.sum(r.dSigma)) for r in traj.rates])
    buckets = {name: np.zeros(n) for name in PROCESSES}
    gross = np.zeros(n)
    for i in range(n):
        vals = production_buckets(traj, i)
        for name, v in vals.items():
            buckets[name][i] = v
        gross[i] = sum(abs(v) for v in vals.values()) + abs(I[i]) \
            + float(np.sum(np.abs(traj.rates[i].dS)))
    return I, buckets, gross


def decomposition_complete(traj: Trajectory) -> bool:
    I, buckets, gross = internal_entropy_production(traj)
    total = sum(buckets.values())
    return bool(np.all(np.abs(total - I) <= PRODUCTION_REL_TOL * np.maximum(gross, 1e-30)))


def second_law_check(traj: Trajectory, tol: Optional[float] = None
                     ) -> Tuple[bool, Optional[float]]:
    """True iff I(t) >= -tol pointwise; closed scenarios also need total S
    non-decreasing (up to an integrator-noise allowance). Returns the first
    violation time when the check fails."""
    I, _buckets, gross = internal_entropy_production(traj)
    tol_eff = np.full_like(I, tol) if tol is not None \
        else PRODUCTION_REL_TOL * np.maximum(gross, 1.0e-30)
    bad = I < -tol_eff
    if np.any(bad):
        return False, float(traj.times[int(np.argmax(bad))])
    if traj.scenario.adiabatically_closed and traj.n_samples > 1:
        S = total_entropy_series(traj)
        cfg = traj.scenario.integrator
        S_scale = float(np.max(np.abs(S))) + 1.0
        allowance = max(PRODUCTION_REL_TOL * S_scale,
                        5.0 * (cfg.abs_tol + cfg.rel_tol * S_scale))
        drops = np.diff(S) < -allowance
        if np.any(drops):
            return False, float(traj.times[int(np.argmax(drops)) + 1])
    return True, None


def buckets_nonnegative(traj: Trajectory) -> Tuple[bool, Optional[float]]:
    I, buckets, gross = internal_entropy_production(traj)
    floor = -PRODUCTION_REL_TOL * np.maximum(gross, 1e-30)
    for name, series in buckets.items():
        bad = series < floor
        if np.any(bad):
            return False, float(traj.times[int(np.argmax(bad))])
    return True, None


def detailed_energy_balance(traj: Trajectory, A: int) -> Dict[str, np.ndarray]:
    """Per-subsystem power series for subsystem A.

    Requires the scenario Lagrangian to decompose as a sum of subsystem
    pieces. Returns P_W_ext (external work on A), P_W_int (work by the other
    subsystems on A), P_H_in (heat power into A) and dE_A (energy rate of A).
    """
    sc = traj.scenario
    pieces = sc.subsystem_lagrangians
    if not pieces:
        raise UnsupportedDecompositionError(
            f"scenario {sc.name!r} has no per-subsystem Lagrangian decomposition")
    LA = pieces[A]
    n = traj.n_samples
    out = {k: np.zeros(n) for k in ("P_W_ext", "P_W_int", "P_H_in", "dE_A")}
    for i, (t, x, r, f) in enumerate(traj):
        T = r.dGamma
        fe_A = np.zeros(sc.topology.n_mech)
        if sc.external_forces_per_subsystem is not None:
            fe_A = external_force(sc.external_forces_per_subsystem[A], x,
                                  sc.topology.n_mech)
        P_H = float(np.dot(f.J_heat[A], T[A] - T))
        # momentum rate of the piece; exact for separable kinetic energies
        if x.q.size:
            dpdt = np.asarray(LA.mass_matrix(x.q, x.S, x.N), dtype=float) @ r.dv
            F_int = dpdt - LA.d_q(x.q, x.v, x.S, x.N) - f.F_fr[A] - fe_A
            P_W_int = float(np.dot(F_int, x.v))
            fr_power = float(np.dot(f.F_fr[A], x.v))
            P_W_ext = float(np.dot(fe_A, x.v))
        else:
            P_W_int = P_W_ext = fr_power = 0.0
        dS_A = float(r.dS[A])
        dLdN_A = LA.d_N(x.q, x.v, x.S, x.N)
        mu_dN = -float(np.dot(dLdN_A, r.dN)) if r.dN.size else 0.0
        out["P_W_ext"][i] = P_W_ext
        out["P_W_int"][i] = P_W_int
        out["P_H_in"][i] = P_H
        out["dE_A"][i] = fr_power + P_W_ext + P_W_int + T[A] * dS_A + mu_dN
    return out


def equilibrium_summary(traj: Trajectory) -> Dict[str, object]:
    """Final-state gap report: rate norm, temperature / chemical / force gaps."""
    x = traj.states[-1]
    r = traj.rates[-1]
    rate_vec = np.concatenate([r.dq, r.dv, r.dS, r.dN])
    state_vec = np.concatenate([x.q, x.v, x.S, x.N])
    scale = np.maximum(np.abs(state_vec), 1.0)
    rate_norm = float(np.max(np.abs(rate_vec) / scale)) if rate_vec.size else 0.0

    T = r.dGamma
    mu = r.dW
    owner = traj.scenario.topology.compartment_owner
    out: Dict[str, object] = {
        "steady": bool(rate_norm < STEADY_THRESHOLD),
        "rate_norm": rate_norm,
        "max_temperature_gap": float(np.max(T) - np.min(T)) if T.size > 1 else 0.0,
    }
    if mu.size > 1:
        out["max_chemical_potential_gap"] = float(np.max(mu) - np.min(mu))
        ratios = np.array([mu[k] / T[owner[k]] for k in range(mu.size)])
        out["max_mu_over_T_gap"] = float(np.max(ratios) - np.min(ratios))
    else:
        out["max_chemical_potential_gap"] = 0.0
        out["max_mu_over_T_gap"] = 0.0
    if traj.scenario.force_balance_gap is not None:
        out["force_balance_gap"] = float(traj.scenario.force_balance_gap(x))
    return out


def assemble_report(traj: Trajectory, first_law_tol: float = 1e-8) -> DiagnosticsReport:
    resid = first_law_residual(traj)
    I, buckets, _gross = internal_entropy_production(traj)
    ok2, t_bad = second_law_check(traj)
    okb, t_badb = buckets_nonnegative(traj)
    integrated = {
        name: float(np.trapezoid(series, traj.times)) if traj.n_samples > 1 else 0.0
        for name, series in buckets.items()
    }
    max_resid = float(np.max(np.abs(resid)))
    flags = {
        "first_law": bool(max_resid <= first_law_tol),
        "second_law": bool(ok2),
        "production_buckets_nonnegative": bool(okb),
        "decomposition_complete": decomposition_complete(traj),
    }
    violation = t_bad if t_bad is not None else t_badb
    return DiagnosticsReport(
        scenario=traj.scenario.name,
        family=traj.scenario.family,
        t_end=float(traj.times[-1]),
        n_samples=traj.n_samples,
        max_first_law_residual=max_resid,
        min_internal_production=float(np.min(I)),
        production_by_process=integrated,
        law_flags=flags,
        first_violation_time=violation,
        equilibrium=equilibrium_summary(traj),
    )
