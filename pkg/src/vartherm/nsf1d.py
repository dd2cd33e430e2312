"""One-dimensional multicomponent Navier-Stokes-Fourier solver.

Periodic domain [0, L) split into M uniform cells; fields live at cell
centers and all spatial derivatives are 2nd-order central differences with
periodic wrap. Semi-discrete (method-of-lines) form:

    rho (dv/dt + v Dv)           = -Dp + D(sigma),  sigma = (zeta + 4 mu/3) Dv
    drho_A/dt + D(rho_A v + j_A) = 0
    T (ds/dt + D(s v + j_s))     = sigma Dv - j_s DT - sum_A j_A D(mu_A)

The diffusive fluxes follow the linear closure
    -(j_s, j_A) = L_eff (DT, D mu_B)
where L_eff is the user matrix congruence-projected onto the zero-sum
subspace of the species block, so that sum_A j_A = 0 exactly while the
matrix stays symmetric positive semi-definite (pointwise entropy production
stays a nonnegative quadratic form).

The gas mixture is ideal: every species sees the full volume, which gives
the entropy of mixing, a common temperature per cell, and Dalton pressure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .eos import IdealGasEOS
from .errors import (DimensionMismatchError, InadmissibleStateError,
                     ModelValidationError)
from .integrators import IntegratorConfig, hermite_sample, integrate
from .simulate import sample_times


@dataclass(frozen=True)
class FluidSpecies:
    """Ideal-gas component: molar EOS plus molar mass [kg/mol]."""

    eos: IdealGasEOS
    molar_mass: float

    def __post_init__(self):
        if not self.molar_mass > 0.0:
            raise ModelValidationError("molar mass must be positive",
                                       field_path="species.molar_mass")


class CellProperties(NamedTuple):
    T: np.ndarray        # (M,) temperature [K]
    p: np.ndarray        # (M,) pressure [Pa]
    eps: np.ndarray      # (M,) internal energy density [J/m^3]
    mu: np.ndarray       # (P, M) chemical potential per unit mass [J/kg]


@dataclass(frozen=True)
class FluidEOS:
    """Ideal-gas mixture energy density eps(rho_1..rho_P, s)."""

    species: Tuple[FluidSpecies, ...]

    @property
    def n_species(self) -> int:
        return len(self.species)

    def _coef(self):
        c_v = np.array([sp.eos.c_v for sp in self.species])
        R = self.species[0].eos.R
        s_ref = np.array([sp.eos.s_ref for sp in self.species])
        lnT_ref = np.log([sp.eos.T_ref for sp in self.species])
        v_ref = np.array([sp.eos.v_ref for sp in self.species])
        mm = np.array([sp.molar_mass for sp in self.species])
        return c_v, R, s_ref, lnT_ref, v_ref, mm

    def properties(self, rho: np.ndarray, s: np.ndarray) -> CellProperties:
        """Cellwise (T, p, eps, mu) from mass densities (P, M) and entropy
        density (M,). Raises InadmissibleStateError on nonpositive densities."""
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        s = np.asarray(s, dtype=float)
        if np.any(rho <= 0.0):
            raise InadmissibleStateError("species mass densities must be positive")
        c_v, R, s_ref, lnT_ref, v_ref, mm = self._coef()
        n = rho / mm[:, None]                      # molar densities (P, M)
        ln_n = np.log(n * v_ref[:, None])
        C = np.einsum("am,a->m", n, c_v)
        A = np.einsum("am,am->m", n,
                      s_ref[:, None] - R * ln_n - (c_v * lnT_ref)[:, None])
        lnT = (s - A) / C
        T = np.exp(lnT)
        eps = C * T
        s_molar = s_ref[:, None] + c_v[:, None] * (lnT[None, :] - lnT_ref[:, None]) \
            - R * ln_n
        mu_molar = (c_v + R)[:, None] * T[None, :] - T[None, :] * s_molar
        p = np.einsum("am->m", n) * R * T
        return CellProperties(T=T, p=p, eps=eps, mu=mu_molar / mm[:, None])

    def entropy_density(self, T, rho) -> np.ndarray:
        """Invert the temperature relation cellwise: s(T, rho)."""
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        T = np.broadcast_to(np.asarray(T, dtype=float), rho.shape[1:]).astype(float)
        c_v, R, s_ref, lnT_ref, v_ref, mm = self._coef()
        n = rho / mm[:, None]
        s_molar = s_ref[:, None] + c_v[:, None] * (np.log(T)[None, :] - lnT_ref[:, None]) \
            - R * np.log(n * v_ref[:, None])
        return np.einsum("am,am->m", n, s_molar)

    def sound_speed(self, rho, s) -> np.ndarray:
        """Isentropic sound speed sqrt(gamma p / rho) (exact for one species)."""
        props = self.properties(rho, s)
        rho = np.atleast_2d(np.asarray(rho, dtype=float))
        c_v, R, *_ = self._coef()
        gamma = np.mean((c_v + R) / c_v)
        return np.sqrt(gamma * props.p / rho.sum(axis=0))


@dataclass(frozen=True)
class TransportCoefficients:
    """Viscosities and the (P+1) x (P+1) heat/diffusion coupling matrix.

    Row/column 0 couples to DT, rows/columns 1..P to D mu_A. The matrix must
    be symmetric positive semi-definite; it is congruence-projected so the
    species fluxes sum to zero.
    """

    mu_shear: float
    zeta: float
    L_matrix: np.ndarray

    def __post_init__(self):
        Lm = np.array(self.L_matrix, dtype=float)
        object.__setattr__(self, "L_matrix", Lm)
        if self.mu_shear < 0.0 or self.zeta < 0.0:
            raise ModelValidationError("viscosities must be nonnegative",
                                       field_path="transport")
        if Lm.ndim != 2 or Lm.shape[0] != Lm.shape[1]:
            raise ModelValidationError("L_matrix must be square",
                                       field_path="transport.L_matrix")
        scale = max(float(np.max(np.abs(Lm))), 1e-30)
        if np.max(np.abs(Lm - Lm.T)) > 1e-12 * scale:
            raise ModelValidationError("L_matrix must be symmetric",
                                       field_path="transport.L_matrix")
        if np.min(np.linalg.eigvalsh(0.5 * (Lm + Lm.T))) < -1e-12 * scale:
            raise ModelValidationError("L_matrix must be positive semi-definite",
                                       field_path="transport.L_matrix")
        P = Lm.shape[0] - 1
        proj = np.eye(P + 1)
        if P > 0:
            proj[1:, 1:] -= np.full((P, P), 1.0 / P)
        object.__setattr__(self, "L_eff", proj @ Lm @ proj)

    @property
    def combined_viscosity(self) -> float:
        """1D longitudinal coefficient zeta + 4 mu / 3."""
        return self.zeta + 4.0 * self.mu_shear / 3.0


@dataclass(frozen=True)
class Fluid1DState:
    """Periodic fields: rho (P, M) [kg/m^3], vel (M,) [m/s], s (M,) [J/(K m^3)]."""

    length: float
    rho: np.ndarray
    vel: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        rho = np.atleast_2d(np.array(self.rho, dtype=float))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "vel", np.array(self.vel, dtype=float))
        object.__setattr__(self, "s", np.array(self.s, dtype=float))
        if self.vel.shape != self.s.shape or rho.shape[1] != self.vel.size:
            raise DimensionMismatchError("field shapes disagree")
        if not self.length > 0.0:
            raise DimensionMismatchError("domain length must be positive")

    @property
    def n_cells(self) -> int:
        return self.vel.size

    @property
    def n_species(self) -> int:
        return self.rho.shape[0]

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    def pack(self) -> np.ndarray:
        return np.concatenate([self.rho.ravel(), self.vel, self.s])

    def unpack(self, y: np.ndarray) -> "Fluid1DState":
        P, M = self.rho.shape
        rho = y[:P * M].reshape(P, M)
        return replace(self, rho=rho, vel=y[P * M:P * M + M], s=y[P * M + M:])


def ddx(w: np.ndarray, dx: float) -> np.ndarray:
    """2nd-order central difference along the last axis, periodic wrap."""
    out = np.empty_like(np.asarray(w, dtype=float))
    out[..., 1:-1] = w[..., 2:] - w[..., :-2]
    out[..., 0] = w[..., 1] - w[..., -1]
    out[..., -1] = w[..., 0] - w[..., -2]
    out /= 2.0 * dx
    return out


def _gradients_and_fluxes(state: Fluid1DState, props: CellProperties,
                          transport: TransportCoefficients):
    dx = state.dx
    dT = ddx(props.T, dx)
    dmu = ddx(props.mu, dx)
    dv = ddx(state.vel, dx)
    forces = np.concatenate([dT[None, :], dmu], axis=0)
    fluxes = -(transport.L_eff @ forces)
    sigma = transport.combined_viscosity * dv
    return dT, dmu, dv, fluxes[0], fluxes[1:], sigma


def linear_fluxes(state: Fluid1DState, eos: FluidEOS,
                  transport: TransportCoefficients,
                  props: Optional[CellProperties] = None):
    """(j_s, j_A, sigma_fr) from the linear closure at the given state."""
    props = props or eos.properties(state.rho, state.s)
    _dT, _dmu, _dv, j_s, j_A, sigma = _gradients_and_fluxes(state, props, transport)
    return j_s, j_A, sigma


def nsf_rhs(state: Fluid1DState, eos: FluidEOS,
            transport: TransportCoefficients):
    """Semi-discrete time derivatives (drho, dvel, ds)."""
    props = eos.properties(state.rho, state.s)
    dx = state.dx
    v = state.vel
    dT, dmu, dv, j_s, j_A, sigma = _gradients_and_fluxes(state, props, transport)

    drho = -ddx(state.rho * v[None, :] + j_A, dx)
    rho_tot = state.rho.sum(axis=0)
    dvel = -v * dv - (ddx(props.p, dx) - ddx(sigma, dx)) / rho_tot
    production = sigma * dv - j_s * dT - np.einsum("am,am->m", j_A, dmu)
    ds = -ddx(state.s * v + j_s, dx) + production / props.T
    return drho, dvel, ds


def production_density(state: Fluid1DState, eos: FluidEOS,
                       transport: TransportCoefficients) -> np.ndarray:
    """Pointwise entropy production rate density [W/(K m^3)]."""
    props = eos.properties(state.rho, state.s)
    dx = state.dx
    j_s, j_A, sigma = linear_fluxes(state, eos, transport, props)
    num = sigma * ddx(state.vel, dx) - j_s * ddx(props.T, dx) \
        - np.einsum("am,am->m", j_A, ddx(props.mu, dx))
    return num / props.T


@dataclass(frozen=True)
class FluidScenario:
    name: str
    eos: FluidEOS
    transport: TransportCoefficients
    initial_state: Fluid1DState
    integrator: IntegratorConfig
    t_end: float
    sample_every: float
    note: str = ""


@dataclass(frozen=True)
class FluidTrajectory:
    scenario: FluidScenario
    times: np.ndarray
    states: Tuple[Fluid1DState, ...]


def run_fluid(scenario: FluidScenario, *, t_end: Optional[float] = None,
              sample_every: Optional[float] = None,
              integrator: Optional[IntegratorConfig] = None) -> FluidTrajectory:
    """Method-of-lines integration of the fluid scenario."""
    t_end = scenario.t_end if t_end is None else t_end
    sample_every = scenario.sample_every if sample_every is None else sample_every
    cfg = integrator or scenario.integrator
    x0 = scenario.initial_state

    def rhs(t, y):
        st = x0.unpack(y)
        drho, dvel, ds = nsf_rhs(st, scenario.eos, scenario.transport)
        return np.concatenate([drho.ravel(), dvel, ds])

    times = sample_times(t_end, sample_every)
    sol = integrate(rhs, 0.0, x0.pack(), t_end, cfg, boundaries=times)
    ys = hermite_sample(sol, times)
    states = tuple(x0.unpack(y) for y in ys)
    return FluidTrajectory(scenario=scenario, times=times, states=states)


def fluid_totals(traj: FluidTrajectory):
    """Per-sample conserved totals: species masses, energy, entropy."""
    eos = traj.scenario.eos
    n = len(traj.states)
    P = traj.states[0].n_species
    masses = np.zeros((n, P))
    energy = np.zeros(n)
    entropy = np.zeros(n)
    for i, st in enumerate(traj.states):
        dxv = st.dx
        props = eos.properties(st.rho, st.s)
        masses[i] = st.rho.sum(axis=1) * dxv
        rho_tot = st.rho.sum(axis=0)
        energy[i] = float(np.sum(0.5 * rho_tot * st.vel ** 2 + props.eps) * dxv)
        entropy[i] = float(np.sum(st.s) * dxv)
    return masses, energy, entropy


def fluid_diagnostics(traj: FluidTrajectory, production_tol: float = 1e-12) -> dict:
    """Law-check report over a fluid trajectory."""
    masses, energy, entropy = fluid_totals(traj)
    min_prod = np.inf
    prod_scale = 0.0
    for st in traj.states:
        dens = production_density(st, traj.scenario.eos, traj.scenario.transport)
        min_prod = min(min_prod, float(np.min(dens)))
        prod_scale = max(prod_scale, float(np.max(np.abs(dens))))
    mass_drift = float(np.max(np.abs(masses - masses[0]) /
                              np.maximum(np.abs(masses[0]), 1e-30)))
    energy_drift = float(np.max(np.abs(energy - energy[0]) / max(abs(energy[0]), 1e-30)))
    s_scale = float(np.max(np.abs(entropy))) + 1e-30
    entropy_decrease = float(np.min(np.diff(entropy))) if len(entropy) > 1 else 0.0
    flags = {
        "species_mass_conserved": bool(mass_drift <= 1e-10),
        "entropy_nondecreasing": bool(entropy_decrease >= -1e-12 * s_scale),
        "production_nonnegative": bool(min_prod >= -production_tol * max(prod_scale, 1e-30)),
    }
    return {
        "scenario": traj.scenario.name,
        "n_cells": traj.states[0].n_cells,
        "n_species": traj.states[0].n_species,
        "t_end": float(traj.times[-1]),
        "n_samples": len(traj.states),
        "species_mass_drift": mass_drift,
        "energy_drift": energy_drift,
        "total_entropy_change": float(entropy[-1] - entropy[0]),
        "min_entropy_step": entropy_decrease,
        "min_production_density": float(min_prod),
        "law_flags": flags,
    }


# -- initial conditions --------------------------------------------------------

def argon_like_eos() -> FluidEOS:
    e = IdealGasEOS(c_v=1.5 * 8.314462618)
    return FluidEOS(species=(FluidSpecies(eos=e, molar_mass=0.04),))


def uniform_state(eos: FluidEOS, n_cells: int = 256, length: float = 1.0,
                  T0: float = 300.0, molar_density=40.0) -> Fluid1DState:
    """Spatially uniform rest state (exact fixed point of the dynamics)."""
    nd = np.broadcast_to(np.atleast_1d(np.asarray(molar_density, dtype=float)),
                         (eos.n_species,))
    mm = np.array([sp.molar_mass for sp in eos.species])
    rho = np.repeat((nd * mm)[:, None], n_cells, axis=1)
    s = eos.entropy_density(np.full(n_cells, T0), rho)
    return Fluid1DState(length=length, rho=rho, vel=np.zeros(n_cells), s=s)


def velocity_sine_state(eos: FluidEOS, amplitude: float = 2.0, modes: int = 1,
                        n_cells: int = 256, length: float = 1.0,
                        T0: float = 300.0, molar_density=40.0) -> Fluid1DState:
    """Uniform thermodynamics with a sinusoidal velocity field."""
    st = uniform_state(eos, n_cells, length, T0, molar_density)
    vel = amplitude * np.sin(2.0 * np.pi * modes * st.x / length)
    return replace(st, vel=vel)


def make_nsf_scenario(kind: str = "viscous_relaxation", *, n_cells: int = 256,
                      length: float = 1.0, T0: float = 300.0,
                      molar_density=40.0, amplitude: float = 2.0,
                      mu_shear: float = 0.2, zeta: float = 0.05,
                      L_thermal: float = 2.0e-2,
                      eos: Optional[FluidEOS] = None,
                      t_end: Optional[float] = None,
                      sample_every: Optional[float] = None,
                      integrator: Optional[IntegratorConfig] = None) -> FluidScenario:
    """Canonical fluid scenarios.

    kind = "uniform" (fixed point), "acoustic" (zero transport, standing
    wave) or "viscous_relaxation" (decaying velocity wave, dissipative).
    """
    eos = eos or argon_like_eos()
    P = eos.n_species
    if kind == "uniform":
        state = uniform_state(eos, n_cells, length, T0, molar_density)
        transport = TransportCoefficients(mu_shear=mu_shear, zeta=zeta,
                                          L_matrix=_thermal_matrix(P, L_thermal))
        t_end = 0.01 if t_end is None else t_end
    elif kind == "acoustic":
        state = velocity_sine_state(eos, 0.1 * amplitude, 1, n_cells, length,
                                    T0, molar_density)
        transport = TransportCoefficients(mu_shear=0.0, zeta=0.0,
                                          L_matrix=np.zeros((P + 1, P + 1)))
        t_end = 0.01 if t_end is None else t_end
    elif kind == "viscous_relaxation":
        state = velocity_sine_state(eos, amplitude, 1, n_cells, length,
                                    T0, molar_density)
        transport = TransportCoefficients(mu_shear=mu_shear, zeta=zeta,
                                          L_matrix=_thermal_matrix(P, L_thermal))
        t_end = 0.12 if t_end is None else t_end
    else:
        raise ModelValidationError(f"unknown fluid scenario kind {kind!r}",
                                   field_path="params.kind")
    cfg = integrator or IntegratorConfig(method="dopri45", dt=1e-6,
                                         rel_tol=1e-10, abs_tol=1e-10)
    return FluidScenario(name=f"nsf1d_{kind}", eos=eos, transport=transport,
                         initial_state=state, integrator=cfg, t_end=t_end,
                         sample_every=sample_every or t_end / 40.0,
                         note=f"1D periodic multicomponent NSF, kind = {kind}")


def _thermal_matrix(P: int, L_thermal: float) -> np.ndarray:
    Lm = np.zeros((P + 1, P + 1))
    Lm[0, 0] = L_thermal
    return Lm
