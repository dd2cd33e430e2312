"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines; every tolerance is pinned here.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from vartherm._numerics import central_gradient, relative_error
from vartherm.diagnostics import (buckets_nonnegative, energy_series,
                                  first_law_residual,
                                  internal_entropy_production,
                                  second_law_check, total_entropy_series)
from vartherm.eos import GAS_CONSTANT, IdealGasEOS
from vartherm.general_form import (trajectory_constraint_residuals,
                                   trajectory_multipliers)
from vartherm.integrators import IntegratorConfig, integrate
from vartherm.models import (make_adiabatic_piston, make_membrane,
                             make_open_piston, make_piston,
                             make_reaction_cell, make_two_compartment)
from vartherm.nsf1d import (argon_like_eos, fluid_totals, make_nsf_scenario,
                            nsf_rhs, run_fluid)
from vartherm.simulate import ThermoSystem, run_scenario


def report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def adiabatic_run():
    sc = make_adiabatic_piston()
    t0 = time.perf_counter()
    traj = run_scenario(sc)
    elapsed = time.perf_counter() - t0
    return sc, traj, elapsed


@pytest.fixture(scope="module")
def zoo_runs(adiabatic_run):
    sc_a, traj_a, _ = adiabatic_run
    runs = [(sc_a, traj_a)]
    for make in (make_piston, make_membrane, make_two_compartment,
                 make_open_piston, make_reaction_cell):
        sc = make()
        runs.append((sc, run_scenario(sc)))
    return runs


@pytest.fixture(scope="module")
def dense_zoo_runs():
    spec = [
        (make_piston, dict(t_end=0.4, sample_every=4e-4)),
        (make_adiabatic_piston, dict(t_end=0.4, sample_every=4e-4)),
        (make_membrane, dict(t_end=0.4, sample_every=1e-3)),
        (make_two_compartment, dict(t_end=0.4, sample_every=1e-3)),
        (make_open_piston, dict(t_end=0.4, sample_every=4e-4)),
        (make_reaction_cell, dict(t_end=0.4, sample_every=1e-3)),
    ]
    return [(make(), run_scenario(make(), **kw)) for make, kw in spec]


def test_criterion_1_isolated_energy_conservation(adiabatic_run):
    sc, traj, elapsed = adiabatic_run
    assert sc.integrator.rel_tol == 1e-10
    E = energy_series(traj)
    drift = float(np.max(np.abs(E - E[0])) / abs(E[0]))
    ok = drift <= 1e-8 and elapsed < 10.0
    report("C1 isolated-system energy conservation", ok,
           f"|dE|/E = {drift:.3e} (<= 1e-8), runtime = {elapsed:.2f} s (< 10 s)")


def test_criterion_2_second_law(zoo_runs):
    worst = np.inf
    names = []
    for sc, traj in zoo_runs:
        I, _buckets, gross = internal_entropy_production(traj)
        margin = np.min(I + 1e-12 * np.maximum(gross, 1e-30))
        worst = min(worst, float(margin))
        ok2, _ = second_law_check(traj)
        okb, _ = buckets_nonnegative(traj)
        if not (ok2 and okb):
            names.append(sc.name)
    bad = make_adiabatic_piston(kappa=-2.0)
    bad = replace(bad, phenomenology=replace(bad.phenomenology, compliant=False))
    bad_traj = run_scenario(bad, t_end=0.4, sample_every=0.01)
    flagged, when = second_law_check(bad_traj)
    ok = not names and worst >= 0.0 and flagged is False and when is not None
    report("C2 second law across the zoo", ok,
           f"violations = {names or 'none'}, worst margin = {worst:.2e}, "
           f"negative-kappa fixture flagged at t = {when}")


def test_criterion_3_equilibrium_structure(adiabatic_run):
    sc, traj, _ = adiabatic_run
    T = traj.rates[-1].dGamma
    gap_rel = abs(T[0] - T[1]) / T[0]
    force_gap = sc.force_balance_gap(traj.states[-1])
    ad = run_scenario(make_adiabatic_piston(kappa=0.0))
    T_ad = ad.rates[-1].dGamma
    gap_ad = abs(T_ad[0] - T_ad[1])
    ok = gap_rel <= 1e-6 and force_gap <= 1e-6 and gap_ad > 0.1
    report("C3 equilibrium structure", ok,
           f"kappa>0: |T1-T2|/T1 = {gap_rel:.2e}, force gap = {force_gap:.2e}; "
           f"kappa=0: |T1-T2| = {gap_ad:.3f} K (> 0.1 K)")


def test_criterion_4_conservation_by_construction():
    mem = run_scenario(make_membrane())
    N_tot = np.array([float(np.sum(x.N)) for x in mem.states])
    n_drift = float(np.max(np.abs(N_tot - N_tot[0])) / N_tot[0])
    U = energy_series(mem)
    u_drift = float(np.max(np.abs(U - U[0])) / abs(U[0]))
    cell = run_scenario(make_reaction_cell())
    m = cell.scenario.topology.reactions.molecular_mass
    mass = np.array([float(np.dot(m, x.N)) for x in cell.states])
    m_drift = float(np.max(np.abs(mass - mass[0])) / mass[0])
    ok = n_drift <= 1e-12 and u_drift <= 1e-12 and m_drift <= 1e-12
    report("C4 conservation by construction", ok,
           f"membrane: dN = {n_drift:.2e}, dU = {u_drift:.2e}; "
           f"reaction: d(total mass) = {m_drift:.2e} (all <= 1e-12)")


def test_criterion_5_abstract_form_oracle(dense_zoo_runs):
    max_resid = 0.0
    max_fit = 0.0
    lam_simple = None
    for sc, traj in dense_zoo_runs:
        max_resid = max(max_resid, float(np.max(
            trajectory_constraint_residuals(traj))))
        _ts, lams, fit, _b = trajectory_multipliers(traj)
        max_fit = max(max_fit, float(np.max(fit)))
        if sc.name == "piston":
            lam_simple = lams[:, 0]
    lam_err = float(np.max(np.abs(lam_simple + 1.0)))
    ok = max_resid <= 1e-9 and max_fit <= 1e-6 and lam_err <= 1e-4
    report("C5 abstract-form oracle", ok,
           f"constraint residual = {max_resid:.2e} (<= 1e-9), "
           f"fit residual = {max_fit:.2e} (<= 1e-6), "
           f"|lambda + 1| = {lam_err:.2e} (<= 1e-4)")


def test_criterion_6_closed_limit_bitwise():
    cfg = IntegratorConfig(method="dopri45", dt=1e-3)
    closed = run_scenario(make_piston(integrator=cfg),
                          t_end=1.5, sample_every=0.01)
    opened = run_scenario(make_open_piston(ports=(), sources=(),
                                           integrator=cfg),
                          t_end=1.5, sample_every=0.01)
    same = all(
        a.q[0] == b.q[0] and a.v[0] == b.v[0] and a.S[0] == b.S[0]
        and a.Gamma[0] == b.Gamma[0] and a.Sigma[0] == b.Sigma[0]
        for a, b in zip(closed.states, opened.states))
    report("C6 closed-limit equivalence", same,
           f"{closed.n_samples} samples identical on (q, v, S, Gamma, Sigma)")


def test_criterion_7_reversible_limit():
    sc = make_piston(lam=0.0,
                     integrator=IntegratorConfig(method="implicit_midpoint",
                                                 dt=5e-3, newton_tol=1e-12))
    n_steps = 10000
    traj = run_scenario(sc, t_end=n_steps * 5e-3, sample_every=0.25)
    S = np.array([x.S[0] for x in traj.states])
    s_const = bool(np.all(S == S[0]))
    q = np.array([x.q[0] for x in traj.states])
    E_eff = energy_series(traj) + 1.0e5 * 0.01 * q
    dev = np.abs(E_eff - E_eff[0]) / abs(E_eff[0])
    half = len(dev) // 2
    bounded = float(np.max(dev)) < 1e-4 and \
        float(np.max(dev[half:])) <= 2.0 * float(np.max(dev[:half])) + 1e-12
    ok = s_const and bounded
    report("C7 reversible limit", ok,
           f"S bitwise constant = {s_const}, energy oscillation "
           f"max = {np.max(dev):.2e} (bounded, no drift), {n_steps} steps")


def _gradient_gap(value_fn, x, analytic, step=1e-6):
    """Worst relative gap between analytic and central-FD gradients.

    The comparison allows the oracle's own roundoff floor eps |f| / h per
    component (a central difference cannot resolve below it).
    """
    fd = central_gradient(value_fn, x, rel_step=step)
    h = step * np.maximum(1.0, np.abs(x))
    noise = 8.0 * np.finfo(float).eps * (1.0 + abs(float(value_fn(x)))) / h
    gap = np.abs(np.asarray(analytic) - fd) - noise
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-30)
    return float(np.max(np.maximum(gap, 0.0) / scale))


def test_criterion_8_gradient_checks(rng):
    checked = 0
    worst = 0.0
    eos = IdealGasEOS(c_v=1.5 * GAS_CONSTANT)
    for _ in range(40):
        T = rng.uniform(150.0, 600.0)
        V = rng.uniform(1e-3, 1.0)
        N = rng.uniform(0.1, 10.0)
        S = float(eos.entropy(T, V, N))
        analytic = np.array([eos.temperature(S, V, N),
                             -eos.pressure(S, V, N),
                             eos.chemical_potential(S, V, N)])
        worst = max(worst, _gradient_gap(
            lambda z: eos.internal_energy(z[0], z[1], z[2]),
            np.array([S, V, N]), analytic))
        checked += 1
    for make in (make_piston, make_adiabatic_piston, make_membrane,
                 make_two_compartment, make_open_piston, make_reaction_cell):
        sc = make()
        L = sc.lagrangian
        x0 = sc.initial_state
        for _ in range(12):
            q = x0.q * rng.uniform(0.9, 1.1, x0.q.size)
            v = x0.v + rng.uniform(-1.0, 1.0, x0.v.size)
            S = x0.S * rng.uniform(0.95, 1.05, x0.S.size)
            N = x0.N * rng.uniform(0.8, 1.2, x0.N.size)
            args = (q, v, S, N)
            for i, name in enumerate(("d_q", "d_v", "d_S", "d_N")):
                if args[i].size == 0:
                    continue
                analytic = getattr(L, name)(*args)

                def val(z, i=i):
                    probe = list(args)
                    probe[i] = z
                    return L.value(*probe)

                worst = max(worst, _gradient_gap(val, args[i], analytic))
                checked += 1
    ok = worst <= 1e-6 and checked >= 100
    report("C8 gradient checks", ok,
           f"{checked} randomized states, worst relative gap = {worst:.2e} (<= 1e-6)")


def test_criterion_9_integrator_orders():
    sc = make_piston()
    system = ThermoSystem(sc)
    y0 = system.pack(sc.initial_state)
    t_end = 0.4
    ref = integrate(system.rhs, 0.0, y0, t_end,
                    IntegratorConfig(dt=1e-3, rel_tol=1e-13, abs_tol=1e-13),
                    mask=system.error_mask).ys[-1]
    mask = system.error_mask

    def err(method, dt):
        sol = integrate(system.rhs, 0.0, y0, t_end,
                        IntegratorConfig(method=method, dt=dt))
        scale = np.abs(ref) + 1.0
        return float(np.max(np.abs((sol.ys[-1] - ref) / scale)[mask]))

    e_rk = [err("rk4", dt) for dt in (4e-3, 2e-3, 1e-3)]
    orders_rk = [np.log2(e_rk[i] / e_rk[i + 1]) for i in range(2)]
    ratio = e_rk[0] / e_rk[1]
    e_im = [err("implicit_midpoint", dt) for dt in (4e-3, 2e-3)]
    order_im = np.log2(e_im[0] / e_im[1])
    ok = min(orders_rk) >= 3.8 and order_im >= 1.9 and 12.8 <= ratio <= 19.2
    report("C9 integrator orders", ok,
           f"rk4 orders = {[round(o, 2) for o in orders_rk]} (>= 3.8), halving "
           f"ratio = {ratio:.1f} (16 +- 20%), midpoint order = {order_im:.2f} (>= 1.9)")


def test_criterion_10_nsf1d():
    t0 = time.perf_counter()
    uni = make_nsf_scenario("uniform", n_cells=256)
    drho, dvel, ds = nsf_rhs(uni.initial_state, uni.eos, uni.transport)
    fixed = bool(np.all(drho == 0.0) and np.all(dvel == 0.0)
                 and np.all(ds == 0.0))

    eos = argon_like_eos()
    ac = make_nsf_scenario("acoustic", n_cells=256)
    c_pred = float(eos.sound_speed(ac.initial_state.rho, ac.initial_state.s)[0])
    period = ac.initial_state.length / c_pred
    traj = run_fluid(ac, t_end=3.0 * period, sample_every=period / 40.0)
    L = ac.initial_state.length
    proj = np.array([2.0 / 256 * np.sum(st.vel * np.sin(2 * np.pi * st.x / L))
                     for st in traj.states])
    crossings = []
    for i in np.where(np.diff(np.sign(proj)) != 0)[0]:
        ta, tb = traj.times[i], traj.times[i + 1]
        fa, fb = proj[i], proj[i + 1]
        crossings.append(ta - fa * (tb - ta) / (fb - fa))
    c_meas = L / (2.0 * float(np.mean(np.diff(crossings))))
    c_err = abs(c_meas - c_pred) / c_pred

    vis = make_nsf_scenario("viscous_relaxation", n_cells=256)
    vtraj = run_fluid(vis)
    masses, _energy, entropy = fluid_totals(vtraj)
    mass_drift = float(np.max(np.abs(masses - masses[0])
                              / np.maximum(np.abs(masses[0]), 1e-30)))
    s_scale = float(np.max(np.abs(entropy)))
    min_step = float(np.min(np.diff(entropy)))
    elapsed = time.perf_counter() - t0
    ok = (fixed and c_err < 0.02 and mass_drift <= 1e-10
          and min_step >= -1e-12 * s_scale and elapsed < 60.0)
    report("C10 NSF1D", ok,
           f"uniform fixed point = {fixed}, sound speed error = {c_err:.2%} "
           f"(< 2%), mass drift = {mass_drift:.1e} (<= 1e-10), min entropy step "
           f"= {min_step:.2e} (>= {-1e-12 * s_scale:.1e}), "
           f"runtime = {elapsed:.1f} s (< 60 s, M = 256)")


def test_criterion_11_open_system_first_law():
    sc = make_open_piston()
    assert sc.topology.ports and sc.topology.heat_sources
    traj = run_scenario(sc)
    resid = float(np.max(np.abs(first_law_residual(traj))))
    ok = resid <= 1e-8
    report("C11 open-system first law", ok,
           f"max relative residual = {resid:.2e} (<= 1e-8), "
           f"P_M recomputed from port profiles")
