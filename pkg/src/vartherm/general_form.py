"""Constrained-system oracle: an independent check of the reduced equations.

Every family can be written as one constrained Euler-Lagrange system on an
extended configuration x (coordinates, entropies, mole numbers and their
displacement partners):

    d/dt (dLag/dxdot) - dLag/dx - F_ext = lambda_alpha A^alpha(t, x, xdot)
    A^alpha(t, x, xdot) . xdot + B^alpha(t, x, xdot) = 0

with one constraint per entropy-production slot (plus one per reaction for
the chemical displacement conditions). Solutions produced by the reduced
right-hand sides must satisfy the constraints identically, admit multiplier
recovery by least squares (lambda = -1 on the canonical normalization where
the production slot carries the coefficient dL/dS_alpha), and satisfy the
abstract energy balance

    dE/dt = <F_ext, xdot> - lambda_alpha B^alpha - dLag/dt.

The fluxes entering the constraint rows are recomputed here directly from
the phenomenological laws, independently of the flux assembly in the
reduced right-hand sides.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ._numerics import FD_STEP
from .errors import DimensionMismatchError
from .evolution import EQUAL_T_REL, StateRate, external_force
from .models import Scenario
from .reactions import affinity
from .simulate import Trajectory
from .state import ThermoState

log = logging.getLogger("vartherm.general_form")


@dataclass(frozen=True)
class ConstraintSet:
    """Constraint covectors A^alpha and affine offsets B^alpha."""

    count: int
    rows: Callable[[float, np.ndarray, np.ndarray], np.ndarray]     # (k, dim)
    offsets: Callable[[float, np.ndarray, np.ndarray], np.ndarray]  # (k,)
    production_slots: Tuple[int, ...]   # x-index of the designated entropy slot
    labels: Tuple[str, ...]


@dataclass(frozen=True)
class AbstractLagrangian:
    """Extended Lagrangian with analytic first derivatives.

    d_x_gross gives the per-slot gross magnitude of d_x (absolute values of
    its summands before cancellation), used to scale least-squares rows.
    """

    dim: int
    value: Callable[[float, np.ndarray, np.ndarray], float]
    d_xdot: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    d_x: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    d_x_gross: Optional[Callable[[float, np.ndarray, np.ndarray], np.ndarray]] = None

    def d_t(self, t, x, xdot) -> float:
        return 0.0


@dataclass(frozen=True)
class AbstractThermoSystem:
    scenario: Scenario
    dim: int
    layout: Dict[str, slice]
    lag: AbstractLagrangian
    constraints: ConstraintSet
    f_ext: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    pack_state: Callable[[ThermoState], np.ndarray]
    pack_rate: Callable[[StateRate], np.ndarray]


def constraint_residual(cs: ConstraintSet, t: float, x, xdot) -> np.ndarray:
    """r_alpha = A^alpha . xdot + B^alpha."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    return cs.rows(t, x, xdot) @ xdot + cs.offsets(t, x, xdot)


def constraint_residual_scaled(cs: ConstraintSet, t: float, x, xdot) -> np.ndarray:
    """Residuals divided by the gross magnitude of their terms."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    A = cs.rows(t, x, xdot)
    B = cs.offsets(t, x, xdot)
    resid = A @ xdot + B
    scale = np.sum(np.abs(A * xdot[None, :]), axis=1) + np.abs(B)
    return resid / np.maximum(scale, 1e-30)


def _el_terms(lag: AbstractLagrangian, cs: ConstraintSet, F_ext,
              t: float, x, xdot, xddot):
    """Euler-Lagrange covector, constraint rows and per-slot scales at a point."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    xddot = np.asarray(xddot, dtype=float)

    scale = 1.0 + max(float(np.max(np.abs(x))), float(np.max(np.abs(xdot))))
    h = FD_STEP * scale / (1.0 + max(float(np.max(np.abs(xdot))),
                                     float(np.max(np.abs(xddot)))))
    p_plus = lag.d_xdot(t + h, x + h * xdot, xdot + h * xddot)
    p_minus = lag.d_xdot(t - h, x - h * xdot, xdot - h * xddot)
    dpdt = (p_plus - p_minus) / (2.0 * h)

    g = lag.d_x(t, x, xdot)
    fe = np.asarray(F_ext(t, x, xdot), dtype=float) if callable(F_ext) \
        else (np.zeros(lag.dim) if F_ext is None else np.asarray(F_ext, dtype=float))
    EL = dpdt - g - fe

    A = cs.rows(t, x, xdot)            # (k, dim)
    g_scale = np.abs(lag.d_x_gross(t, x, xdot)) if lag.d_x_gross is not None \
        else np.abs(g)
    row_scale = np.maximum.reduce([
        np.abs(dpdt), g_scale, np.abs(fe), np.max(np.abs(A), axis=0)])
    return EL, A, row_scale


def _solve_multipliers(EL, A, row_scale, count, t):
    D = 1.0 / np.maximum(row_scale, 1e-30)
    design = (A * D[None, :]).T        # (dim, k)
    target = EL * D
    lam, _res, rank, _sv = np.linalg.lstsq(design, target, rcond=None)
    if rank < count:
        log.warning("constraint stack rank-deficient (%d < %d) at t = %g",
                    rank, count, t)
    resid = (EL - A.T @ lam) * D
    return lam, float(np.max(np.abs(resid)))


def multiplier_recovery(lag: AbstractLagrangian, cs: ConstraintSet, F_ext,
                        t: float, x, xdot, xddot) -> Tuple[np.ndarray, float]:
    """Least-squares recovery of the constraint multipliers at one point.

    The momentum rate d/dt dLag/dxdot is a directional central difference of
    the analytic momentum map along (xdot, xddot); xddot typically comes from
    finite-differencing a densely sampled trajectory. Returns (lambda,
    scaled post-fit residual max-norm). Rank deficiency is reported through
    the module logger, not raised.
    """
    EL, A, row_scale = _el_terms(lag, cs, F_ext, t, x, xdot, xddot)
    return _solve_multipliers(EL, A, row_scale, cs.count, t)


def abstract_energy_balance(lag: AbstractLagrangian, cs: ConstraintSet, F_ext,
                            t: float, x, xdot, lam, xddot) -> float:
    """dE/dt - <F_ext, xdot> + lambda_alpha B^alpha + dLag/dt; zero on solutions."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    xddot = np.asarray(xddot, dtype=float)
    scale = 1.0 + max(float(np.max(np.abs(x))), float(np.max(np.abs(xdot))))
    h = FD_STEP * scale / (1.0 + max(float(np.max(np.abs(xdot))),
                                     float(np.max(np.abs(xddot)))))
    dpdt = (lag.d_xdot(t + h, x + h * xdot, xdot + h * xddot)
            - lag.d_xdot(t - h, x - h * xdot, xdot - h * xddot)) / (2.0 * h)
    g = lag.d_x(t, x, xdot)
    dE = float(np.dot(dpdt, xdot) - np.dot(g, xdot)) - lag.d_t(t, x, xdot)
    fe = np.asarray(F_ext(t, x, xdot), dtype=float) if callable(F_ext) \
        else (np.zeros(lag.dim) if F_ext is None else np.asarray(F_ext, dtype=float))
    B = cs.offsets(t, x, xdot)
    return dE - float(np.dot(fe, xdot)) + float(np.dot(np.asarray(lam), B)) \
        + lag.d_t(t, x, xdot)


# -- construction from a scenario ---------------------------------------------

def _layout_for(scenario: Scenario) -> Dict[str, slice]:
    top = scenario.topology
    fam = scenario.family
    n, P, K, r = top.n_mech, top.P, top.K, top.n_reactions
    blocks = []
    if fam == "simple":
        blocks = [("q", n), ("S", P)]
    elif fam == "simple_diffusion":
        blocks = [("q", n), ("S", P), ("N", K), ("W", K)]
    elif fam == "nonsimple_heat":
        blocks = [("q", n), ("S", P), ("Gamma", P), ("Sigma", P)]
    elif fam == "nonsimple_heat_mass":
        blocks = [("q", n), ("S", P), ("N", K), ("W", K), ("Gamma", P), ("Sigma", P)]
    elif fam == "open":
        blocks = [("q", n), ("S", P), ("N", K), ("W", K), ("Gamma", P), ("Sigma", P)]
    elif fam == "reaction":
        blocks = [("S", P), ("N", K), ("W", K), ("nu", r)]
    else:
        raise DimensionMismatchError(f"unknown family {fam!r}")
    layout = {}
    start = 0
    for name, size in blocks:
        layout[name] = slice(start, start + size)
        start += size
    layout["__dim__"] = slice(0, start)
    return layout


def _state_from_x(scenario: Scenario, t, x, layout) -> ThermoState:
    top = scenario.topology

    def get(name, size):
        if name in layout:
            return x[layout[name]]
        return np.zeros(size)

    return ThermoState(
        t=t,
        q=get("q", top.n_mech), v=np.zeros(top.n_mech),
        S=get("S", top.P), N=get("N", top.K),
        Gamma=get("Gamma", top.P), W=get("W", top.K),
        Sigma=get("Sigma", top.P), nu=get("nu", top.n_reactions))


def abstract_system(scenario: Scenario) -> AbstractThermoSystem:
    """Build the extended Lagrangian, constraints and packers for a scenario."""
    L = scenario.lagrangian
    top = scenario.topology
    fam = scenario.family
    layout = _layout_for(scenario)
    dim = layout["__dim__"].stop
    n = top.n_mech

    def split(x, xdot):
        state_args = {}
        for name in ("q", "S", "N", "W", "Gamma", "Sigma", "nu"):
            if name in layout:
                state_args[name] = (x[layout[name]], xdot[layout[name]])
        return state_args

    def v_of(xdot):
        return xdot[layout["q"]] if "q" in layout else np.zeros(0)

    def qSN(x):
        q = x[layout["q"]] if "q" in layout else np.zeros(0)
        S = x[layout["S"]]
        N = x[layout["N"]] if "N" in layout else np.zeros(0)
        return q, S, N

    def lag_value(t, x, xdot):
        q, S, N = qSN(x)
        val = L.value(q, v_of(xdot), S, N)
        if "W" in layout:
            val += float(np.dot(xdot[layout["W"]], x[layout["N"]]))
        if "Gamma" in layout:
            val += float(np.dot(xdot[layout["Gamma"]],
                                x[layout["S"]] - x[layout["Sigma"]]))
        return val

    def lag_d_xdot(t, x, xdot):
        q, S, N = qSN(x)
        p = np.zeros(dim)
        if n:
            p[layout["q"]] = L.d_v(q, v_of(xdot), S, N)
        if "W" in layout:
            p[layout["W"]] = x[layout["N"]]
        if "Gamma" in layout:
            p[layout["Gamma"]] = x[layout["S"]] - x[layout["Sigma"]]
        return p

    def lag_d_x(t, x, xdot):
        q, S, N = qSN(x)
        v = v_of(xdot)
        g = np.zeros(dim)
        if n:
            g[layout["q"]] = L.d_q(q, v, S, N)
        dLdS = L.d_S(q, v, S, N)
        if "Gamma" in layout:
            g[layout["S"]] = dLdS + xdot[layout["Gamma"]]
            g[layout["Sigma"]] = -xdot[layout["Gamma"]]
        else:
            g[layout["S"]] = dLdS
        if "N" in layout:
            g[layout["N"]] = L.d_N(q, v, S, N) + xdot[layout["W"]]
        return g

    def lag_d_x_gross(t, x, xdot):
        q, S, N = qSN(x)
        v = v_of(xdot)
        g = np.zeros(dim)
        if n:
            g[layout["q"]] = np.abs(L.d_q(q, v, S, N))
        dLdS = np.abs(L.d_S(q, v, S, N))
        if "Gamma" in layout:
            g[layout["S"]] = dLdS + np.abs(xdot[layout["Gamma"]])
            g[layout["Sigma"]] = np.abs(xdot[layout["Gamma"]])
        else:
            g[layout["S"]] = dLdS
        if "N" in layout:
            g[layout["N"]] = np.abs(L.d_N(q, v, S, N)) + np.abs(xdot[layout["W"]])
        return g

    lag = AbstractLagrangian(dim=dim, value=lag_value, d_xdot=lag_d_xdot,
                             d_x=lag_d_x, d_x_gross=lag_d_x_gross)

    phen = scenario.phenomenology
    P, K = top.P, top.K
    r = top.n_reactions

    def fluxes_at(t, x, xdot):
        """Friction, heat and matter fluxes straight from the phenomenology."""
        state = _state_from_x(scenario, t, x, layout).replace(v=v_of(xdot))
        F_fr = np.zeros((P, n))
        if phen.friction is not None and n:
            for A in range(P):
                lam_m = np.asarray(phen.friction(state, A), dtype=float).reshape(n, n)
                F_fr[A] = -(lam_m @ state.v)
        J = np.zeros((P, P))
        Jm = np.zeros((K, K))
        q, S, N = qSN(x)
        dLdS = L.d_S(q, state.v, S, N)
        T = -dLdS
        if fam == "nonsimple_heat" and phen.kappa is not None:
            kap = np.asarray(phen.kappa(state), dtype=float).reshape(P, P)
            J = -kap.copy()
            np.fill_diagonal(J, 0.0)
            np.fill_diagonal(J, -J.sum(axis=1))
        if fam == "simple_diffusion" and phen.G is not None:
            mu = -L.d_N(q, state.v, S, N)
            G = np.asarray(phen.G(state), dtype=float).reshape(K, K)
            Jm = G * (mu[:, None] - mu[None, :])
        if fam == "nonsimple_heat_mass" and phen.onsager is not None:
            mu = -L.d_N(q, state.v, S, N)
            for A in range(P):
                for B in range(A + 1, P):
                    blk = np.asarray(phen.onsager(state, A, B), dtype=float).reshape(2, 2)
                    force = np.array([T[B] - T[A], mu[B] / T[B] - mu[A] / T[A]])
                    Y_H, Jab = blk @ force
                    if abs(T[A] - T[B]) > EQUAL_T_REL * T[A]:
                        J[A, B] = J[B, A] = Y_H * T[A] * T[B] / (T[A] - T[B])
                    else:
                        J[A, B] = J[B, A] = -blk[0, 0] * T[A] * T[B]
                    Jm[B, A] = Jab
                    Jm[A, B] = -Jab
            np.fill_diagonal(J, -J.sum(axis=1))
        return state, F_fr, J, Jm, dLdS, T

    if fam == "reaction":
        net = top.reactions

        def rows(t, x, xdot):
            q, S, N = qSN(x)
            mu = -L.d_N(q, np.zeros(0), S, N)
            state = _state_from_x(scenario, t, x, layout)
            aff = affinity(net, mu)
            Jr = np.asarray(phen.reaction_flux(state, aff), dtype=float).reshape(r)
            A = np.zeros((1 + r, dim))
            A[0, layout["S"]] = L.d_S(q, np.zeros(0), S, N)
            A[0, layout["nu"]] = -Jr
            for a in range(r):
                A[1 + a, layout["nu"].start + a] = 1.0
                A[1 + a, layout["W"]] = -net.nu[a]
            return A

        def offsets(t, x, xdot):
            return np.zeros(1 + r)

        cs = ConstraintSet(count=1 + r, rows=rows, offsets=offsets,
                           production_slots=(layout["S"].start,) + (-1,) * r,
                           labels=("thermal",) + tuple(f"reaction_{a}" for a in range(r)))

        def f_ext(t, x, xdot):
            return np.zeros(dim)

    else:
        def rows(t, x, xdot):
            state, F_fr, J, Jm, dLdS, T = fluxes_at(t, x, xdot)
            A = np.zeros((P, dim))
            for alpha in range(P):
                if n:
                    A[alpha, layout["q"]] = -F_fr[alpha]
                if fam in ("simple", "simple_diffusion"):
                    A[alpha, layout["S"].start + alpha] = dLdS[alpha]
                else:
                    A[alpha, layout["Sigma"].start + alpha] = dLdS[alpha]
                if fam == "simple_diffusion":
                    A[alpha, layout["W"]] = -Jm.sum(axis=0)
                if fam == "nonsimple_heat_mass":
                    A[alpha, layout["W"].start + alpha] = -Jm[:, alpha].sum()
                if fam in ("nonsimple_heat", "nonsimple_heat_mass"):
                    A[alpha, layout["Gamma"]] = -J[alpha]
                if fam == "open":
                    from .evolution import evaluate_ports, evaluate_sources
                    pfs = evaluate_ports(top.ports, t)
                    sfs = evaluate_sources(top.heat_sources, t)
                    A[alpha, layout["W"]] = -sum(pf.J for pf in pfs)
                    A[alpha, layout["Gamma"]] = -(sum(pf.J_S for pf in pfs)
                                                  + sum(sf.J_S for sf in sfs))
            return A

        def offsets(t, x, xdot):
            if fam != "open":
                return np.zeros(P)
            from .evolution import evaluate_ports, evaluate_sources
            pfs = evaluate_ports(top.ports, t)
            sfs = evaluate_sources(top.heat_sources, t)
            B = sum(pf.J * pf.mu + pf.J_S * pf.T for pf in pfs) \
                + sum(sf.J_S * sf.T for sf in sfs)
            return np.array([B])

        slot_name = "S" if fam in ("simple", "simple_diffusion") else "Sigma"
        cs = ConstraintSet(
            count=P, rows=rows, offsets=offsets,
            production_slots=tuple(layout[slot_name].start + a for a in range(P)),
            labels=tuple(f"production_{a}" for a in range(P)))

        def f_ext(t, x, xdot):
            out = np.zeros(dim)
            if n:
                state = _state_from_x(scenario, t, x, layout).replace(v=v_of(xdot))
                if scenario.external_forces_per_subsystem is not None:
                    total = np.zeros(n)
                    for fsub in scenario.external_forces_per_subsystem:
                        total += external_force(fsub, state, n)
                else:
                    total = external_force(scenario.external_force, state, n)
                out[layout["q"]] = total
            return out

    def pack_state(xs: ThermoState) -> np.ndarray:
        out = np.zeros(dim)
        for name in ("q", "S", "N", "W", "Gamma", "Sigma", "nu"):
            if name in layout:
                out[layout[name]] = getattr(xs, name)
        return out

    def pack_rate(rt: StateRate) -> np.ndarray:
        out = np.zeros(dim)
        mapping = {"q": "dq", "S": "dS", "N": "dN", "W": "dW",
                   "Gamma": "dGamma", "Sigma": "dSigma", "nu": "dnu"}
        for name, rname in mapping.items():
            if name in layout:
                out[layout[name]] = getattr(rt, rname)
        return out

    layout_public = {k: v for k, v in layout.items() if k != "__dim__"}
    return AbstractThermoSystem(scenario=scenario, dim=dim, layout=layout_public,
                                lag=lag, constraints=cs, f_ext=f_ext,
                                pack_state=pack_state, pack_rate=pack_rate)


# -- trajectory-level oracle ---------------------------------------------------

def trajectory_constraint_residuals(traj: Trajectory) -> np.ndarray:
    """Max scaled constraint residual per sample."""
    sys = abstract_system(traj.scenario)
    out = np.zeros(traj.n_samples)
    for i, (t, xs, rt, _f) in enumerate(traj):
        x = sys.pack_state(xs)
        xd = sys.pack_rate(rt)
        res = constraint_residual_scaled(sys.constraints, float(t), x, xd)
        out[i] = float(np.max(np.abs(res))) if res.size else 0.0
    return out


def trajectory_multipliers(traj: Trajectory):
    """Multiplier recovery along a uniformly sampled trajectory.

    The second derivative of x at interior samples comes from a 4th-order
    central difference of the sampled rates. Post-fit residuals are scaled
    by trajectory-wide per-slot term magnitudes (the force scale), so
    instants where a force crosses zero do not inflate the relative
    residual. Returns (times, lambdas, residual_norms, balances) over the
    interior samples.
    """
    sys = abstract_system(traj.scenario)
    ts = traj.times
    if traj.n_samples < 5:
        raise DimensionMismatchError("need at least 5 uniform samples")
    h = float(ts[1] - ts[0])
    xs = np.array([sys.pack_state(s) for s in traj.states])
    xds = np.array([sys.pack_rate(r) for r in traj.rates])

    terms = []
    run_scale = np.zeros(sys.dim)
    for i in range(2, traj.n_samples - 2):
        xdd = (-xds[i + 2] + 8.0 * xds[i + 1] - 8.0 * xds[i - 1] + xds[i - 2]) / (12.0 * h)
        EL, A, scale = _el_terms(sys.lag, sys.constraints, sys.f_ext,
                                 float(ts[i]), xs[i], xds[i], xdd)
        terms.append((float(ts[i]), i, EL, A, xdd))
        run_scale = np.maximum(run_scale, scale)

    times, lams, resids, balances = [], [], [], []
    for t, i, EL, A, xdd in terms:
        lam, resid = _solve_multipliers(EL, A, run_scale, sys.constraints.count, t)
        bal = abstract_energy_balance(sys.lag, sys.constraints, sys.f_ext,
                                      t, xs[i], xds[i], lam, xdd)
        times.append(t)
        lams.append(lam)
        resids.append(resid)
        balances.append(bal)
    return (np.array(times), np.array(lams), np.array(resids), np.array(balances))
