"""Right-hand sides of the reduced evolution-equation families.

Each family assembles the time derivative of a ThermoState from the
Lagrangian partials and the phenomenological fluxes:

    simple               one entropy, friction only
    simple_diffusion     one entropy, K compartments exchanging matter
    nonsimple_heat       P entropies, friction + heat conduction
    nonsimple_heat_mass  P entropies, one compartment each, coupled
                         heat/matter transfer through 2x2 transport blocks
    open                 one entropy / one compartment, matter ports and
                         heat sources
    reaction             R species in one compartment, r reactions

Structural identities are enforced on every call: the energy rate assembled
from the returned rates must match the external power supplied to the
system (first law at the level of the equations), and for adiabatically
closed families with compliant phenomenology the total entropy rate must be
nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ._numerics import directional_derivative
from .errors import (DimensionMismatchError, FormulationError,
                     InadmissibleStateError, SingularMassMatrixError)
from .lagrangian import LagrangianModel
from .phenomenology import PhenomenologyModel
from .reactions import ReactionNetwork, affinity
from .state import (HeatSourceSpec, PortSpec, ThermoState, check_mole_floor,
                    evaluate_profile)

#: relative temperature gap below which the coupled-block heat flux falls
#: back to the direct kappa parameterization (the rescale is singular there)
EQUAL_T_REL = 1e-12

#: relative tolerance of the per-call first-law assembly check
ENERGY_IDENTITY_RTOL = 1e-10

#: tolerance of the per-call entropy-production sign check
PRODUCTION_TOL = 1e-12


@dataclass(frozen=True)
class StateRate:
    """Time derivative of a ThermoState (same field layout, d-prefixed)."""

    dq: np.ndarray
    dv: np.ndarray
    dS: np.ndarray
    dN: np.ndarray
    dGamma: np.ndarray
    dW: np.ndarray
    dSigma: np.ndarray
    dnu: np.ndarray = field(default_factory=lambda: np.zeros(0))


class PortFlow(NamedTuple):
    """Evaluated port quantities at one instant."""

    J: float      # molar flow rate into the system [mol/s]
    J_S: float    # entropy flow rate J * S_molar [W/K]
    T: float      # stream temperature [K]
    p: float      # stream pressure [Pa]
    mu: float     # stream chemical potential [J/mol]
    S_molar: float
    H_molar: float


class SourceFlow(NamedTuple):
    J_S: float    # entropy flow rate [W/K]
    T: float      # source temperature [K]


@dataclass(frozen=True)
class FluxSnapshot:
    """Phenomenological fluxes evaluated at one state.

    F_fr:    (P, n) friction covectors per subsystem
    J_heat:  (P, P) heat fluxes, J_AB = J_BA for A != B and
             J_AA = -sum_{B != A} J_AB, so columns sum to zero
    J_matter:(K, K) molar flow rates, entry [k, l] is the flux from
             compartment k into compartment l (antisymmetric)
    J_ports: evaluated PortFlow per port
    J_sources: evaluated SourceFlow per heat source
    J_reactions: (r,) reaction rates
    """

    F_fr: np.ndarray
    J_heat: np.ndarray
    J_matter: np.ndarray
    J_ports: Tuple[PortFlow, ...] = ()
    J_sources: Tuple[SourceFlow, ...] = ()
    J_reactions: np.ndarray = field(default_factory=lambda: np.zeros(0))


def external_force(F_ext, x: ThermoState, n: int) -> np.ndarray:
    """Evaluate an external-force specification: None, constant, or f(t, q, v)."""
    if F_ext is None:
        return np.zeros(n)
    if callable(F_ext):
        return np.asarray(F_ext(x.t, x.q, x.v), dtype=float).reshape(n)
    return np.broadcast_to(np.asarray(F_ext, dtype=float), (n,)).astype(float)


def solve_accelerations(L: LagrangianModel, x: ThermoState, total_force,
                        dS=None, dN=None, d_q_value=None) -> np.ndarray:
    """Solve the expanded mechanical equation for dv.

    (ddL/dvdv) dv = dL/dq + total_force - (ddL/dvdq) v - (ddL/dvdS) dS
                    - (ddL/dvdN) dN

    The mixed second derivatives are evaluated as directional central
    differences of dL/dv and vanish for separable kinetic energies.
    d_q_value optionally supplies a precomputed dL/dq.
    """
    n = L.n_mech
    if n == 0:
        return np.zeros(0)
    total_force = np.asarray(total_force, dtype=float).reshape(n)
    M = np.asarray(L.mass_matrix(x.q, x.S, x.N), dtype=float).reshape(n, n)

    rhs = (d_q_value if d_q_value is not None else L.d_q(x.q, x.v, x.S, x.N)) + total_force
    if not L.separable_kinetic:
        p_of = L.d_v
        if np.any(x.v):
            rhs = rhs - directional_derivative(
                lambda q_: p_of(q_, x.v, x.S, x.N), x.q, x.v)
        if dS is not None and np.any(dS):
            rhs = rhs - directional_derivative(
                lambda S_: p_of(x.q, x.v, S_, x.N), x.S, dS)
        if dN is not None and np.any(dN):
            rhs = rhs - directional_derivative(
                lambda N_: p_of(x.q, x.v, x.S, N_), x.N, dN)

    if n == 1:
        m = M[0, 0]
        if not m > 0.0:
            raise SingularMassMatrixError(f"mass matrix not SPD at t = {x.t}")
        return rhs / m
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise SingularMassMatrixError(f"mass matrix not SPD at t = {x.t}") from exc
    return np.linalg.solve(M, rhs)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DimensionMismatchError(message)


def _temps(dLdS: np.ndarray, t: float) -> np.ndarray:
    """Temperatures -dL/dS with the positivity guard."""
    T = -np.asarray(dLdS, dtype=float)
    if T.size and not np.all(T > 0.0):
        raise InadmissibleStateError(
            f"non-positive temperature among T = {T.tolist()} at t = {t}")
    return T


def _check_energy_identity(terms_lhs: float, expected: float, scale: float) -> None:
    gap = abs(terms_lhs - expected)
    if gap > ENERGY_IDENTITY_RTOL * max(scale, 1e-30):
        raise FormulationError(
            f"first-law assembly violated: |dE/dt - P_ext| = {gap:.3e} (scale {scale:.3e})")


def _check_production(total: float, gross: float, compliant: bool) -> None:
    if compliant and total < -PRODUCTION_TOL * max(gross, 1e-30):
        raise FormulationError(
            f"negative total entropy production {total:.3e} from compliant phenomenology")


# -- simple systems (P = 1, K = 0) ------------------------------------------

def simple_rates(x: ThermoState, L: LagrangianModel, phen: PhenomenologyModel,
                 F_ext=None) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P == 1 and L.K == 0, "simple family requires P = 1, K = 0")
    n = L.n_mech
    dLdq, _, dLdS, _ = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)
    lam = np.asarray(phen.friction(x, 0), dtype=float).reshape(n, n) if phen.friction else np.zeros((n, n))
    F_fr = -(lam @ x.v)
    Fe = external_force(F_ext, x, n)

    fr_power = float(np.dot(F_fr, x.v))
    dS = np.array([fr_power / dLdS[0]])
    dv = solve_accelerations(L, x, F_fr + Fe, dS=dS, d_q_value=dLdq)

    rate = StateRate(dq=x.v.copy(), dv=dv, dS=dS, dN=np.zeros(0),
                     dGamma=T.copy(), dW=np.zeros(0), dSigma=dS.copy())
    flux = FluxSnapshot(F_fr=F_fr.reshape(1, n), J_heat=np.zeros((1, 1)),
                        J_matter=np.zeros((0, 0)))

    scale = abs(fr_power) + abs(T[0] * dS[0])
    _check_energy_identity(fr_power + T[0] * dS[0], 0.0, scale)
    _check_production(float(dS[0]), abs(fr_power / T[0]), phen.compliant)
    return rate, flux


def rhs_simple(x, L, phen, F_ext=None) -> StateRate:
    return simple_rates(x, L, phen, F_ext)[0]


# -- simple systems with internal mass transfer (P = 1, K >= 2) -------------

def simple_diffusion_rates(x: ThermoState, L: LagrangianModel,
                           phen: PhenomenologyModel, F_ext=None
                           ) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P == 1 and L.K >= 2, "diffusion family requires P = 1, K >= 2")
    check_mole_floor(x.N)
    n, K = L.n_mech, L.K
    dLdq, _, dLdS, dLdN = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)
    mu = -dLdN

    lam = np.asarray(phen.friction(x, 0), dtype=float).reshape(n, n) if phen.friction else np.zeros((n, n))
    F_fr = -(lam @ x.v)
    Fe = external_force(F_ext, x, n)
    fr_power = float(np.dot(F_fr, x.v))

    G = np.asarray(phen.G(x), dtype=float).reshape(K, K)
    # J_matter[k, l] = G^{kl} (mu^k - mu^l): molar flow from k into l
    J_matter = G * (mu[:, None] - mu[None, :])
    dN = J_matter.sum(axis=0)

    # sum_{k<l} J^{l->k} (dL/dN_k - dL/dN_l), with dL/dN_k - dL/dN_l = mu_l - mu_k
    transfer = 0.0
    for k in range(K):
        for l in range(k + 1, K):
            transfer += J_matter[l, k] * (mu[l] - mu[k])
    dS = np.array([(fr_power - transfer) / dLdS[0]])

    dv = solve_accelerations(L, x, F_fr + Fe, dS=dS, dN=dN, d_q_value=dLdq)
    rate = StateRate(dq=x.v.copy(), dv=dv, dS=dS, dN=dN,
                     dGamma=T.copy(), dW=mu.copy(), dSigma=dS.copy())
    flux = FluxSnapshot(F_fr=F_fr.reshape(1, n), J_heat=np.zeros((1, 1)),
                        J_matter=J_matter)

    mu_dN = float(np.dot(mu, dN))
    scale = abs(fr_power) + abs(T[0] * dS[0]) + float(np.sum(np.abs(mu * dN)))
    _check_energy_identity(fr_power + T[0] * dS[0] + mu_dN, 0.0, scale)
    gross = abs(fr_power / T[0]) + abs(transfer / T[0])
    _check_production(float(dS[0]), gross, phen.compliant)
    return rate, flux


def rhs_simple_diffusion(x, L, phen, F_ext=None) -> StateRate:
    return simple_diffusion_rates(x, L, phen, F_ext)[0]


# -- non-simple systems: friction + heat conduction (P >= 2, K = 0) ---------

def _friction_stack(phen, x, n, P):
    F = np.zeros((P, n))
    if phen.friction is not None:
        for A in range(P):
            lam = np.asarray(phen.friction(x, A), dtype=float).reshape(n, n)
            F[A] = -(lam @ x.v)
    return F


def _heat_flux_matrix(offdiag: np.ndarray) -> np.ndarray:
    """Fill the diagonal so that every column of J sums to zero."""
    J = offdiag.copy()
    np.fill_diagonal(J, 0.0)
    np.fill_diagonal(J, -J.sum(axis=1))
    return J


def nonsimple_heat_rates(x: ThermoState, L: LagrangianModel,
                         phen: PhenomenologyModel, F_ext_per_subsystem=None,
                         ) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P >= 2 and L.K == 0, "heat-conduction family requires P >= 2, K = 0")
    n, P = L.n_mech, L.P
    dLdq, _, dLdS, _ = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)

    F_fr = _friction_stack(phen, x, n, P)
    Fe = _total_external(F_ext_per_subsystem, x, n)

    kappa = np.asarray(phen.kappa(x), dtype=float).reshape(P, P) if phen.kappa else np.zeros((P, P))
    J = _heat_flux_matrix(-kappa)

    fr_power = F_fr @ x.v
    # sum_B J_AB (dL/dS_B - dL/dS_A); equals the heat power into A,
    # sum_B J_AB (T^A - T^B)
    heat_in = np.array([np.dot(J[A], dLdS - dLdS[A]) for A in range(P)])
    dS = (fr_power - heat_in) / dLdS

    dv = solve_accelerations(L, x, F_fr.sum(axis=0) + Fe, dS=dS, d_q_value=dLdq)
    rate = StateRate(dq=x.v.copy(), dv=dv, dS=dS, dN=np.zeros(0),
                     dGamma=T.copy(), dW=np.zeros(0), dSigma=dS.copy())
    flux = FluxSnapshot(F_fr=F_fr, J_heat=J, J_matter=np.zeros((0, 0)))

    TdS = float(np.dot(T, dS))
    scale = float(np.sum(np.abs(fr_power)) + np.sum(np.abs(T * dS)))
    _check_energy_identity(float(np.sum(fr_power)) + TdS, 0.0, scale)
    gross = float(np.sum(np.abs(fr_power / T)) + np.sum(np.abs(heat_in / T)))
    _check_production(float(np.sum(dS)), gross, phen.compliant)
    return rate, flux


def rhs_nonsimple_heat(x, L, phen, F_ext_per_subsystem=None) -> StateRate:
    return nonsimple_heat_rates(x, L, phen, F_ext_per_subsystem)[0]


def _total_external(F_ext_per_subsystem, x, n):
    if F_ext_per_subsystem is None:
        return np.zeros(n)
    if callable(F_ext_per_subsystem) or isinstance(F_ext_per_subsystem, (int, float, np.ndarray)):
        return external_force(F_ext_per_subsystem, x, n)
    total = np.zeros(n)
    for f in F_ext_per_subsystem:
        total += external_force(f, x, n)
    return total


# -- non-simple systems with heat conduction and mass transfer (K = P) ------

def nonsimple_heat_mass_rates(x: ThermoState, L: LagrangianModel,
                              phen: PhenomenologyModel, F_ext=None,
                              ) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P >= 2 and L.K == L.P,
             "coupled family requires P >= 2 with one compartment per subsystem")
    check_mole_floor(x.N)
    n, P = L.n_mech, L.P
    dLdq, _, dLdS, dLdN = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)
    mu = -dLdN

    F_fr = _friction_stack(phen, x, n, P)
    Fe = _total_external(F_ext, x, n)

    J = np.zeros((P, P))
    J_matter = np.zeros((P, P))
    for A in range(P):
        for B in range(A + 1, P):
            blk = np.asarray(phen.onsager(x, A, B), dtype=float).reshape(2, 2)
            force = np.array([T[B] - T[A], mu[B] / T[B] - mu[A] / T[A]])
            Y_H, Jm = blk @ force
            if abs(T[A] - T[B]) > EQUAL_T_REL * T[A]:
                J_AB = Y_H * T[A] * T[B] / (T[A] - T[B])
            else:
                # block form is singular at equal temperatures; use the
                # equivalent direct parameterization J_AB = -kappa_AB
                J_AB = -blk[0, 0] * T[A] * T[B]
            J[A, B] = J[B, A] = J_AB
            J_matter[B, A] = Jm   # molar flow from B into A
            J_matter[A, B] = -Jm
    J = _heat_flux_matrix(J)

    dN = J_matter.sum(axis=0)
    fr_power = F_fr @ x.v
    heat_term = np.array([np.dot(J[A], dLdS - dLdS[A]) for A in range(P)])
    dS = (fr_power - heat_term - dN * dLdN) / dLdS

    dv = solve_accelerations(L, x, F_fr.sum(axis=0) + Fe, dS=dS, dN=dN,
                             d_q_value=dLdq)
    rate = StateRate(dq=x.v.copy(), dv=dv, dS=dS, dN=dN,
                     dGamma=T.copy(), dW=mu.copy(), dSigma=dS.copy())
    flux = FluxSnapshot(F_fr=F_fr, J_heat=J, J_matter=J_matter)

    TdS = float(np.dot(T, dS))
    mu_dN = float(np.dot(mu, dN))
    scale = float(np.sum(np.abs(fr_power)) + np.sum(np.abs(T * dS)) + np.sum(np.abs(mu * dN)))
    _check_energy_identity(float(np.sum(fr_power)) + TdS + mu_dN, 0.0, scale)
    gross = float(np.sum(np.abs(fr_power / T)) + np.sum(np.abs(heat_term / T))
                  + np.sum(np.abs(mu * dN / T)))
    _check_production(float(np.sum(dS)), gross, phen.compliant)
    return rate, flux


def rhs_nonsimple_heat_mass(x, L, phen, F_ext=None) -> StateRate:
    return nonsimple_heat_mass_rates(x, L, phen, F_ext)[0]


# -- open systems (P = 1, K = 1) ---------------------------------------------

def evaluate_ports(ports: Sequence[PortSpec], t: float) -> Tuple[PortFlow, ...]:
    flows = []
    for port in ports:
        ms = port.molar_state(t)
        Ja = port.flow_rate(t)
        flows.append(PortFlow(J=Ja, J_S=Ja * ms.S, T=evaluate_profile(port.T, t),
                              p=evaluate_profile(port.p, t), mu=ms.mu,
                              S_molar=ms.S, H_molar=ms.H))
    return tuple(flows)


def evaluate_sources(sources: Sequence[HeatSourceSpec], t: float) -> Tuple[SourceFlow, ...]:
    return tuple(SourceFlow(J_S=s.entropy_rate(t), T=s.temperature(t)) for s in sources)


def open_rates(x: ThermoState, L: LagrangianModel, phen: PhenomenologyModel,
               ports: Sequence[PortSpec] = (), sources: Sequence[HeatSourceSpec] = (),
               F_ext=None) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P == 1 and L.K == 1, "open family requires P = 1, K = 1")
    check_mole_floor(x.N)
    n = L.n_mech
    dLdq, _, dLdS, dLdN = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)
    mu = -dLdN

    lam = np.asarray(phen.friction(x, 0), dtype=float).reshape(n, n) if phen.friction else np.zeros((n, n))
    F_fr = -(lam @ x.v)
    Fe = external_force(F_ext, x, n)
    fr_power = float(np.dot(F_fr, x.v))

    port_flows = evaluate_ports(ports, x.t)
    source_flows = evaluate_sources(sources, x.t)

    # internal entropy production I = dSigma/dt
    I = -fr_power / T[0]
    for pf in port_flows:
        I += (pf.J * (pf.mu - mu[0]) + pf.J_S * (pf.T - T[0])) / T[0]
    for sf in source_flows:
        I += sf.J_S * (sf.T - T[0]) / T[0]

    inflow = 0.0
    dN_val = 0.0
    for pf in port_flows:
        inflow += pf.J_S
        dN_val += pf.J
    for sf in source_flows:
        inflow += sf.J_S

    dS = np.array([I + inflow])
    dN = np.array([dN_val])
    dv = solve_accelerations(L, x, F_fr + Fe, dS=dS, dN=dN, d_q_value=dLdq)
    rate = StateRate(dq=x.v.copy(), dv=dv, dS=dS, dN=dN,
                     dGamma=T.copy(), dW=mu.copy(), dSigma=np.array([I]))
    flux = FluxSnapshot(F_fr=F_fr.reshape(1, n), J_heat=np.zeros((1, 1)),
                        J_matter=np.zeros((1, 1)), J_ports=port_flows,
                        J_sources=source_flows)

    P_H = sum(sf.J_S * sf.T for sf in source_flows)
    P_M = sum(pf.J * pf.mu + pf.J_S * pf.T for pf in port_flows)
    lhs = fr_power + T[0] * dS[0] + mu[0] * dN[0]
    scale = (abs(fr_power) + abs(T[0] * dS[0]) + abs(mu[0] * dN[0])
             + sum(abs(pf.J * pf.mu) + abs(pf.J_S * pf.T) for pf in port_flows)
             + sum(abs(sf.J_S * sf.T) for sf in source_flows))
    _check_energy_identity(lhs, P_H + P_M, scale)
    return rate, flux


def rhs_open(x, L, phen, ports=(), sources=(), F_ext=None) -> StateRate:
    return open_rates(x, L, phen, ports, sources, F_ext)[0]


# -- chemical reactions ------------------------------------------------------

def reaction_rates(x: ThermoState, L: LagrangianModel, net: ReactionNetwork,
                   phen: PhenomenologyModel) -> Tuple[StateRate, FluxSnapshot]:
    L.check_state(x)
    _require(L.P == 1 and L.K == net.n_species,
             "reaction family requires one entropy slot and one compartment per species")
    _require(L.n_mech == 0, "reaction family carries no mechanical coordinates")
    check_mole_floor(x.N)
    _, _, dLdS, dLdN = L.partials(x.q, x.v, x.S, x.N)
    T = _temps(dLdS, x.t)
    mu = -dLdN

    aff = affinity(net, mu)
    Jr = np.asarray(phen.reaction_flux(x, aff), dtype=float).reshape(net.n_reactions)
    dN = net.nu.T @ Jr
    power = float(np.dot(Jr, aff))
    dS = np.array([power / T[0]])

    rate = StateRate(dq=np.zeros(0), dv=np.zeros(0), dS=dS, dN=dN,
                     dGamma=T.copy(), dW=mu.copy(), dSigma=dS.copy(),
                     dnu=-aff)
    flux = FluxSnapshot(F_fr=np.zeros((1, 0)), J_heat=np.zeros((1, 1)),
                        J_matter=np.zeros((net.n_species, net.n_species)),
                        J_reactions=Jr)

    mu_dN = float(np.dot(mu, dN))
    scale = abs(T[0] * dS[0]) + float(np.sum(np.abs(mu * dN)))
    _check_energy_identity(T[0] * dS[0] + mu_dN, 0.0, scale)
    gross = float(np.sum(np.abs(Jr * aff))) / T[0]
    _check_production(float(dS[0]), gross, phen.compliant)
    return rate, flux


def rhs_reaction(x, L, net, phen) -> StateRate:
    return reaction_rates(x, L, net, phen)[0]
