"""Scenario zoo: ready-to-run bindings of topology, Lagrangian, phenomenology
and initial state for each supported system family.

Default parameter sets use SI values of order unity (kilogram-scale masses,
300 K, mole-scale inventories) so conditioning stays benign; every
constructor documents its knobs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .eos import IdealGasEOS, mixture_properties
from .errors import (DomainError, GeometryError, InadmissibleStateError,
                     ModelValidationError)
from .evolution import (FluxSnapshot, StateRate, nonsimple_heat_mass_rates,
                        nonsimple_heat_rates, open_rates, reaction_rates,
                        simple_diffusion_rates, simple_rates)
from .integrators import IntegratorConfig
from .lagrangian import LagrangianModel, temperatures
from .phenomenology import (PhenomenologyModel, constant_phenomenology,
                            validate_phenomenology)
from .reactions import ReactionNetwork, lavoisier_check
from .state import (HeatSourceSpec, PortSpec, SystemTopology, ThermoState,
                    validate_state)

FAMILIES = ("simple", "simple_diffusion", "nonsimple_heat",
            "nonsimple_heat_mass", "open", "reaction")


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one system: models, initial data, settings."""

    name: str
    family: str
    topology: SystemTopology
    lagrangian: LagrangianModel
    phenomenology: PhenomenologyModel
    initial_state: ThermoState
    integrator: IntegratorConfig
    t_end: float
    sample_every: float
    external_force: object = None          # total force, or per-subsystem sequence
    eos: object = None                     # principal gas model (reporting)
    note: str = ""
    subsystem_lagrangians: Tuple[LagrangianModel, ...] = ()
    external_forces_per_subsystem: Optional[Tuple[object, ...]] = None
    state_guard: Optional[Callable[[ThermoState], None]] = None
    force_balance_gap: Optional[Callable[[ThermoState], float]] = None

    def rates(self, x: ThermoState) -> Tuple[StateRate, FluxSnapshot]:
        """Evaluate the family right-hand side at a state."""
        if self.state_guard is not None:
            self.state_guard(x)
        try:
            if self.family == "simple":
                return simple_rates(x, self.lagrangian, self.phenomenology,
                                    self.external_force)
            if self.family == "simple_diffusion":
                return simple_diffusion_rates(x, self.lagrangian, self.phenomenology,
                                              self.external_force)
            if self.family == "nonsimple_heat":
                fext = self.external_forces_per_subsystem or self.external_force
                return nonsimple_heat_rates(x, self.lagrangian, self.phenomenology, fext)
            if self.family == "nonsimple_heat_mass":
                fext = self.external_forces_per_subsystem or self.external_force
                return nonsimple_heat_mass_rates(x, self.lagrangian, self.phenomenology, fext)
            if self.family == "open":
                return open_rates(x, self.lagrangian, self.phenomenology,
                                  self.topology.ports, self.topology.heat_sources,
                                  self.external_force)
            if self.family == "reaction":
                return reaction_rates(x, self.lagrangian, self.topology.reactions,
                                      self.phenomenology)
        except DomainError as exc:
            raise InadmissibleStateError(str(exc)) from exc
        raise ModelValidationError(f"unknown family {self.family!r}")

    def with_settings(self, *, t_end=None, sample_every=None, integrator=None) -> "Scenario":
        return replace(self,
                       t_end=self.t_end if t_end is None else t_end,
                       sample_every=self.sample_every if sample_every is None else sample_every,
                       integrator=self.integrator if integrator is None else integrator)

    @property
    def adiabatically_closed(self) -> bool:
        return not self.topology.is_open


def validate_scenario(scenario: Scenario, n_probes: int = 20) -> None:
    """Eager admissibility checks; raises ModelValidationError."""
    validate_state(scenario.topology, scenario.initial_state)
    if scenario.family not in FAMILIES:
        raise ModelValidationError(f"unknown family {scenario.family!r}", field_path="family")
    try:
        T = temperatures(scenario.lagrangian, scenario.initial_state)
    except InadmissibleStateError as exc:
        raise ModelValidationError(f"initial state inadmissible: {exc}",
                                   field_path="initial_state") from exc
    if scenario.topology.P and np.min(T) <= 0.0:
        raise ModelValidationError("initial temperatures must be positive",
                                   field_path="initial_state")
    net = scenario.topology.reactions
    if net is not None and not lavoisier_check(net):
        raise ModelValidationError(
            "reaction network violates mass conservation (Lavoisier law)",
            field_path="reactions")
    validate_phenomenology(scenario.phenomenology, scenario.topology,
                           scenario.initial_state, n_probes=n_probes)


# -- helpers -----------------------------------------------------------------

def _gas_lagrangian_1d(m: float, area: float, eos: IdealGasEOS,
                       moles: Optional[float]) -> LagrangianModel:
    """Piston Lagrangian L = m v^2 / 2 - U(S, area q, N).

    moles fixes N when the mole number is not a state variable (closed
    piston, K = 0); moles = None reads N from the state (open piston, K = 1).
    """
    K = 0 if moles is not None else 1

    def N_of(N):
        return moles if moles is not None else N[0]

    def value(q, v, S, N):
        return 0.5 * m * v[0] ** 2 - eos.internal_energy(S[0], area * q[0], N_of(N))

    def d_q(q, v, S, N):
        p = eos.pressure(S[0], area * q[0], N_of(N))
        return np.array([p * area])

    def d_v(q, v, S, N):
        return np.array([m * v[0]])

    def d_S(q, v, S, N):
        return np.array([-eos.temperature(S[0], area * q[0], N_of(N))])

    def d_N(q, v, S, N):
        if K == 0:
            return np.zeros(0)
        return np.array([-eos.chemical_potential(S[0], area * q[0], N[0])])

    def partials(q, v, S, N):
        _, T, p, mu = eos.properties(S[0], area * q[0], N_of(N))
        d_N_val = np.zeros(0) if K == 0 else np.array([-mu])
        return (np.array([p * area]), np.array([m * v[0]]),
                np.array([-T]), d_N_val)

    return LagrangianModel(n_mech=1, P=1, K=K, value=value, d_q=d_q, d_v=d_v,
                           d_S=d_S, d_N=d_N,
                           mass_matrix=lambda q, S, N: np.array([[m]]),
                           separable_kinetic=True, partials=partials)


def constant_load(force: float):
    """Constant external force [N] as a (t, q, v) profile."""
    return lambda t, q, v: np.array([force])


# -- piston (simple system with friction) ------------------------------------

def make_piston(m: float = 2.0, alpha: float = 0.01, N0: float = 1.0,
                eos: Optional[IdealGasEOS] = None, lam: float = 4.0,
                F_ext: object = None, *, q0: float = 2.0, v0: float = 0.0,
                T0: float = 300.0, load_pressure: Optional[float] = 1.0e5,
                t_end: float = 10.0, sample_every: float = 0.01,
                integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Gas-filled cylinder closed by a piston of mass m [kg].

    The gas (N0 moles) occupies V = alpha q; friction coefficient lam
    [kg/s] acts on the piston; F_ext overrides the default constant load
    -load_pressure * alpha (an external pressure pushing back).
    """
    eos = eos or IdealGasEOS(c_v=1.5 * IdealGasEOS.__dataclass_fields__["R"].default)
    topology = SystemTopology(n_mech=1, P=1, K=0)
    L = _gas_lagrangian_1d(m, alpha, eos, moles=N0)
    phen = constant_phenomenology(topology, friction=[lam])
    S0 = float(eos.entropy(T0, alpha * q0, N0))
    x0 = ThermoState.initial(topology, q=[q0], v=[v0], S=[S0])
    if F_ext is None and load_pressure is not None:
        F_ext = constant_load(-load_pressure * alpha)

    def guard(x: ThermoState) -> None:
        if x.q[0] <= 0.0:
            raise GeometryError(f"piston position must stay positive (q = {x.q[0]})")

    def balance_gap(x: ThermoState) -> float:
        p_gas = float(eos.pressure(x.S[0], alpha * x.q[0], N0)) * alpha
        f_ext = 0.0 if F_ext is None else float(np.asarray(F_ext(x.t, x.q, x.v))[0])
        return abs(p_gas + f_ext) / abs(p_gas)

    return Scenario(
        name="piston", family="simple", topology=topology, lagrangian=L,
        phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-3),
        t_end=t_end, sample_every=sample_every, external_force=F_ext, eos=eos,
        note="single gas cylinder with piston friction",
        state_guard=guard, force_balance_gap=balance_gap)


# -- adiabatic piston (two cylinders, heat-conducting connector) -------------

def make_adiabatic_piston(m1: float = 1.0, m2: float = 1.0, m3: float = 2.0,
                          alpha1: float = 0.01, alpha2: float = 0.01,
                          D: float = 3.0, ell: float = 1.0,
                          N1: float = 1.0, N2: float = 1.0,
                          eos: Optional[IdealGasEOS] = None,
                          lam1: float = 25.0, lam2: float = 25.0,
                          kappa: float = 5.0, *,
                          q0: float = 0.8, v0: float = 0.0,
                          T1_0: float = 250.0, T2_0: float = 350.0,
                          t_end: float = 30.0, sample_every: float = 0.02,
                          integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Isolated two-cylinder device: pistons of masses m1, m2 joined by a rod
    of mass m3; gas volumes V1 = alpha1 q and V2 = alpha2 (D - ell - q).

    kappa [W/K^2-free units, see phenomenology] couples the two gas
    entropies through the rod; kappa = 0 is the adiabatic-piston limit in
    which the temperature gap survives mechanical equilibration.
    """
    eos = eos or IdealGasEOS(c_v=1.5 * IdealGasEOS.__dataclass_fields__["R"].default)
    M = m1 + m2 + m3
    topology = SystemTopology(n_mech=1, P=2, K=0)
    span = D - ell

    def vols(q):
        return alpha1 * q[0], alpha2 * (span - q[0])

    def value(q, v, S, N):
        V1, V2 = vols(q)
        return (0.5 * M * v[0] ** 2
                - eos.internal_energy(S[0], V1, N1)
                - eos.internal_energy(S[1], V2, N2))

    def d_q(q, v, S, N):
        V1, V2 = vols(q)
        p1 = eos.pressure(S[0], V1, N1)
        p2 = eos.pressure(S[1], V2, N2)
        return np.array([p1 * alpha1 - p2 * alpha2])

    def d_v(q, v, S, N):
        return np.array([M * v[0]])

    def d_S(q, v, S, N):
        V1, V2 = vols(q)
        return np.array([-eos.temperature(S[0], V1, N1),
                         -eos.temperature(S[1], V2, N2)])

    _NN = np.array([N1, N2])

    def partials(q, v, S, N):
        V = np.array([alpha1 * q[0], alpha2 * (span - q[0])])
        _, T, p, _ = eos.properties(S, V, _NN)
        return (np.array([p[0] * alpha1 - p[1] * alpha2]),
                np.array([M * v[0]]), -T, np.zeros(0))

    L = LagrangianModel(n_mech=1, P=2, K=0, value=value, d_q=d_q, d_v=d_v,
                        d_S=d_S, d_N=lambda q, v, S, N: np.zeros(0),
                        mass_matrix=lambda q, S, N: np.array([[M]]),
                        separable_kinetic=True, partials=partials)

    def _piece(sign: int, ms: float) -> LagrangianModel:
        # subsystem piece: half the rod mass assigned to each side
        idx = 0 if sign > 0 else 1

        def pv(q, v, S, N):
            V1, V2 = vols(q)
            V = V1 if idx == 0 else V2
            return 0.5 * ms * v[0] ** 2 - eos.internal_energy(S[idx], V, (N1, N2)[idx])

        def pd_q(q, v, S, N):
            V1, V2 = vols(q)
            if idx == 0:
                return np.array([eos.pressure(S[0], V1, N1) * alpha1])
            return np.array([-eos.pressure(S[1], V2, N2) * alpha2])

        def pd_S(q, v, S, N):
            V1, V2 = vols(q)
            out = np.zeros(2)
            out[idx] = -eos.temperature(S[idx], (V1, V2)[idx], (N1, N2)[idx])
            return out

        return LagrangianModel(n_mech=1, P=2, K=0, value=pv, d_q=pd_q,
                               d_v=lambda q, v, S, N: np.array([ms * v[0]]),
                               d_S=pd_S, d_N=lambda q, v, S, N: np.zeros(0),
                               mass_matrix=lambda q, S, N: np.array([[ms]]),
                               separable_kinetic=True)

    phen = constant_phenomenology(topology, friction=[lam1, lam2], kappa=kappa)
    S1_0 = float(eos.entropy(T1_0, alpha1 * q0, N1))
    S2_0 = float(eos.entropy(T2_0, alpha2 * (span - q0), N2))
    x0 = ThermoState.initial(topology, q=[q0], v=[v0], S=[S1_0, S2_0])

    def guard(x: ThermoState) -> None:
        if not (0.0 < x.q[0] < span):
            raise GeometryError(
                f"piston left the cylinder: q = {x.q[0]}, admissible (0, {span})")

    def balance_gap(x: ThermoState) -> float:
        V1, V2 = vols(x.q)
        f1 = float(eos.pressure(x.S[0], V1, N1)) * alpha1
        f2 = float(eos.pressure(x.S[1], V2, N2)) * alpha2
        return abs(f1 - f2) / abs(f1)

    return Scenario(
        name="adiabatic_piston", family="nonsimple_heat", topology=topology,
        lagrangian=L, phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-3),
        t_end=t_end, sample_every=sample_every, eos=eos,
        note="isolated two-cylinder device; kappa = 0 recovers the adiabatic piston",
        subsystem_lagrangians=(_piece(+1, m1 + 0.5 * m3), _piece(-1, m2 + 0.5 * m3)),
        state_guard=guard, force_balance_gap=balance_gap)


# -- membrane (internal mass transfer, single entropy) ------------------------

def make_membrane(eoses: Optional[Sequence[IdealGasEOS]] = None,
                  G_1m: float = 3.0e-4, G_m2: float = 3.0e-4,
                  N_init: Sequence[float] = (1.5, 0.1, 0.5),
                  volumes: Sequence[float] = (1.0e-3, 1.0e-4, 1.0e-3),
                  T0: float = 300.0, *,
                  t_end: float = 40.0, sample_every: float = 0.05,
                  integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Diffusion of one species through a membrane between two reservoirs.

    Compartment order is (reservoir 1, membrane, reservoir 2); matter flows
    only along the pairs (1, m) and (m, 2). A single entropy describes the
    whole isolated system, so all compartments share one temperature.
    """
    if eoses is None:
        e = IdealGasEOS(c_v=1.5 * 8.314462618)
        eoses = (e, e, e)
    eoses = tuple(eoses)
    volumes = np.asarray(volumes, dtype=float)
    topology = SystemTopology(n_mech=0, P=1, K=3, compartment_owner=(0, 0, 0))

    def value(q, v, S, N):
        U, _, _ = mixture_properties(eoses, S[0], volumes, N)
        return -U

    def d_S(q, v, S, N):
        _, T, _ = mixture_properties(eoses, S[0], volumes, N)
        return np.array([-T])

    def d_N(q, v, S, N):
        _, _, mu = mixture_properties(eoses, S[0], volumes, N)
        return -mu

    L = LagrangianModel(n_mech=0, P=1, K=3, value=value,
                        d_q=lambda q, v, S, N: np.zeros(0),
                        d_v=lambda q, v, S, N: np.zeros(0),
                        d_S=d_S, d_N=d_N,
                        mass_matrix=lambda q, S, N: np.zeros((0, 0)),
                        separable_kinetic=True)

    G = np.zeros((3, 3))
    G[0, 1] = G[1, 0] = G_1m
    G[1, 2] = G[2, 1] = G_m2
    phen = constant_phenomenology(topology, G=G)

    N0 = np.asarray(N_init, dtype=float)
    S0 = float(sum(e.entropy(T0, V, n) for e, V, n in zip(eoses, volumes, N0)))
    x0 = ThermoState.initial(topology, S=[S0], N=N0)
    return Scenario(
        name="membrane", family="simple_diffusion", topology=topology,
        lagrangian=L, phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-2),
        t_end=t_end, sample_every=sample_every, eos=eoses[0],
        note="nonelectrolyte diffusion through a homogeneous membrane; isolated")


# -- two compartments with coupled heat and matter transfer -------------------

def make_two_compartment(eoses: Optional[Sequence[IdealGasEOS]] = None,
                         onsager_block=None,
                         N_init: Sequence[float] = (1.2, 0.8),
                         volumes: Sequence[float] = (1.0e-3, 1.0e-3),
                         T_init: Sequence[float] = (250.0, 350.0), *,
                         t_end: float = 30.0, sample_every: float = 0.05,
                         integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Closed pair of compartments exchanging heat and a single species.

    onsager_block is the 2x2 coupled transport block; the default is
    diagonal (pure conduction plus pure diffusion, no cross effects).
    """
    if eoses is None:
        e = IdealGasEOS(c_v=1.5 * 8.314462618)
        eoses = (e, e)
    eoses = tuple(eoses)
    volumes = np.asarray(volumes, dtype=float)
    topology = SystemTopology(n_mech=0, P=2, K=2, compartment_owner=(0, 1))

    def value(q, v, S, N):
        return -sum(float(e.internal_energy(S[i], volumes[i], N[i]))
                    for i, e in enumerate(eoses))

    def d_S(q, v, S, N):
        return np.array([-float(e.temperature(S[i], volumes[i], N[i]))
                         for i, e in enumerate(eoses)])

    def d_N(q, v, S, N):
        return np.array([-float(e.chemical_potential(S[i], volumes[i], N[i]))
                         for i, e in enumerate(eoses)])

    L = LagrangianModel(n_mech=0, P=2, K=2, value=value,
                        d_q=lambda q, v, S, N: np.zeros(0),
                        d_v=lambda q, v, S, N: np.zeros(0),
                        d_S=d_S, d_N=d_N,
                        mass_matrix=lambda q, S, N: np.zeros((0, 0)),
                        separable_kinetic=True)

    if onsager_block is None:
        onsager_block = np.array([[2.0e-4, 0.0], [0.0, 6.0e-2]])
    phen = constant_phenomenology(topology, onsager=onsager_block)

    N0 = np.asarray(N_init, dtype=float)
    S0 = [float(e.entropy(T, V, n))
          for e, T, V, n in zip(eoses, T_init, volumes, N0)]
    x0 = ThermoState.initial(topology, S=S0, N=N0)

    def _pieces():
        out = []
        for idx in range(2):
            def pv(q, v, S, N, i=idx):
                return -float(eoses[i].internal_energy(S[i], volumes[i], N[i]))

            def pd_S(q, v, S, N, i=idx):
                g = np.zeros(2)
                g[i] = -float(eoses[i].temperature(S[i], volumes[i], N[i]))
                return g

            def pd_N(q, v, S, N, i=idx):
                g = np.zeros(2)
                g[i] = -float(eoses[i].chemical_potential(S[i], volumes[i], N[i]))
                return g

            out.append(LagrangianModel(
                n_mech=0, P=2, K=2, value=pv,
                d_q=lambda q, v, S, N: np.zeros(0),
                d_v=lambda q, v, S, N: np.zeros(0),
                d_S=pd_S, d_N=pd_N,
                mass_matrix=lambda q, S, N: np.zeros((0, 0)),
                separable_kinetic=True))
        return tuple(out)

    return Scenario(
        name="two_compartment", family="nonsimple_heat_mass", topology=topology,
        lagrangian=L, phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-2),
        t_end=t_end, sample_every=sample_every, eos=eoses[0],
        note="heat conduction and diffusion between two closed compartments",
        subsystem_lagrangians=_pieces())


# -- piston with ports and heat sources ---------------------------------------

def make_open_piston(m: float = 2.0, alpha: float = 0.01,
                     eos: Optional[IdealGasEOS] = None,
                     ports: Optional[Sequence[PortSpec]] = None,
                     sources: Optional[Sequence[HeatSourceSpec]] = None,
                     lam: float = 4.0, F_ext: object = None, *,
                     q0: float = 2.0, v0: float = 0.0, T0: float = 300.0,
                     N0: float = 1.0, load_pressure: Optional[float] = 1.0e5,
                     t_end: float = 5.0, sample_every: float = 0.01,
                     integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Piston cylinder exchanging matter through ports and heat with sources.

    Stream conditions at the default ports stay above the interior pressure
    so that injection dissipates (mixes downhill); sources are one hot
    supply and one cold sink receiving entropy.
    """
    eos = eos or IdealGasEOS(c_v=1.5 * 8.314462618)
    if ports is None:
        ports = (PortSpec(eos=eos, T=340.0, p=2.2e5, J=0.05),
                 PortSpec(eos=eos, T=320.0, p=2.0e5, J=0.02))
    if sources is None:
        sources = (HeatSourceSpec(T=400.0, J_S=0.02),
                   HeatSourceSpec(T=280.0, J_S=-0.01))
    topology = SystemTopology(n_mech=1, P=1, K=1, compartment_owner=(0,),
                              ports=tuple(ports), heat_sources=tuple(sources))
    L = _gas_lagrangian_1d(m, alpha, eos, moles=None)
    phen = constant_phenomenology(topology, friction=[lam])
    S0 = float(eos.entropy(T0, alpha * q0, N0))
    x0 = ThermoState.initial(topology, q=[q0], v=[v0], S=[S0], N=[N0])
    if F_ext is None and load_pressure is not None:
        F_ext = constant_load(-load_pressure * alpha)

    def guard(x: ThermoState) -> None:
        if x.q[0] <= 0.0:
            raise GeometryError(f"piston position must stay positive (q = {x.q[0]})")

    return Scenario(
        name="open_piston", family="open", topology=topology, lagrangian=L,
        phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-3),
        t_end=t_end, sample_every=sample_every, external_force=F_ext, eos=eos,
        note="piston device with matter ports and heat sources",
        state_guard=guard)


# -- reaction cell -------------------------------------------------------------

def make_reaction_cell(net: Optional[ReactionNetwork] = None,
                       eoses: Optional[Sequence[IdealGasEOS]] = None,
                       flux_coeffs=None, *,
                       volume: float = 1.0e-3,
                       N_init: Sequence[float] = (1.2, 0.3),
                       T0: float = 300.0,
                       reaction_law: Optional[Callable] = None,
                       t_end: float = 25.0, sample_every: float = 0.05,
                       integrator: Optional[IntegratorConfig] = None) -> Scenario:
    """Isothermal-volume reactor: R species in one compartment, r reactions.

    The default network is the isomerization A <-> B with the linear flux
    law J = ell * affinity (ell PSD). Mass-action kinetics can be supplied
    through reaction_law.
    """
    if net is None:
        net = ReactionNetwork(nu_fwd=[[1.0, 0.0]], nu_bwd=[[0.0, 1.0]],
                              molecular_mass=[0.03, 0.03])
    R = net.n_species
    if eoses is None:
        e = IdealGasEOS(c_v=1.5 * 8.314462618)
        eoses = (e,) * R
    eoses = tuple(eoses)
    if flux_coeffs is None:
        flux_coeffs = 2.0e-4 * np.eye(net.n_reactions)

    topology = SystemTopology(n_mech=0, P=1, K=R,
                              compartment_owner=(0,) * R, reactions=net)
    vols = np.full(R, volume)

    def value(q, v, S, N):
        U, _, _ = mixture_properties(eoses, S[0], vols, N)
        return -U

    def d_S(q, v, S, N):
        _, T, _ = mixture_properties(eoses, S[0], vols, N)
        return np.array([-T])

    def d_N(q, v, S, N):
        _, _, mu = mixture_properties(eoses, S[0], vols, N)
        return -mu

    L = LagrangianModel(n_mech=0, P=1, K=R, value=value,
                        d_q=lambda q, v, S, N: np.zeros(0),
                        d_v=lambda q, v, S, N: np.zeros(0),
                        d_S=d_S, d_N=d_N,
                        mass_matrix=lambda q, S, N: np.zeros((0, 0)),
                        separable_kinetic=True)
    phen = constant_phenomenology(topology, reaction_coeffs=flux_coeffs,
                                  reaction_law=reaction_law)
    N0 = np.asarray(N_init, dtype=float)
    S0 = float(sum(e.entropy(T0, volume, n) for e, n in zip(eoses, N0)))
    x0 = ThermoState.initial(topology, S=[S0], N=N0)
    return Scenario(
        name="reaction_cell", family="reaction", topology=topology,
        lagrangian=L, phenomenology=phen, initial_state=x0,
        integrator=integrator or IntegratorConfig(method="dopri45", dt=1e-2),
        t_end=t_end, sample_every=sample_every, eos=eoses[0],
        note="closed reactor, linear flux law by default")
