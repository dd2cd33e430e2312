"""Run orchestration: flattening states, integrating, uniform sampling.

The integrators operate on flat vectors; ThermoSystem provides the packing
for a scenario. Gauge slots (Gamma, W, Sigma, nu) are excluded from the
adaptive error norm so trajectories of the physical variables do not depend
on gauge offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .evolution import FluxSnapshot, StateRate
from .integrators import (IntegratorConfig, Solution, adaptive_step,
                          hermite_sample, implicit_midpoint_step, integrate,
                          rk4_step)
from .models import Scenario
from .state import ThermoState


@dataclass(frozen=True)
class ThermoSystem:
    """Flat-vector adapter for one scenario."""

    scenario: Scenario

    @property
    def dims(self) -> Tuple[int, int, int, int]:
        top = self.scenario.topology
        return top.n_mech, top.P, top.K, top.n_reactions

    @property
    def size(self) -> int:
        n, P, K, r = self.dims
        return 2 * n + 3 * P + 2 * K + r

    @property
    def error_mask(self) -> np.ndarray:
        """True on physical slots (q, v, S, N); gauge slots are uncontrolled."""
        n, P, K, r = self.dims
        return np.concatenate([
            np.ones(2 * n + P + K, dtype=bool),
            np.zeros(P + K + P + r, dtype=bool),
        ])

    def pack(self, x: ThermoState) -> np.ndarray:
        return np.concatenate([x.q, x.v, x.S, x.N, x.Gamma, x.W, x.Sigma, x.nu])

    def pack_rate(self, r: StateRate) -> np.ndarray:
        return np.concatenate([r.dq, r.dv, r.dS, r.dN, r.dGamma, r.dW, r.dSigma, r.dnu])

    def unpack(self, t: float, y: np.ndarray) -> ThermoState:
        n, P, K, _r = self.dims
        q, v, S, N, Gamma, W, Sigma, nu = np.split(
            y, np.cumsum([n, n, P, K, P, K, P]))
        return ThermoState(t=t, q=q, v=v, S=S, N=N, Gamma=Gamma, W=W,
                           Sigma=Sigma, nu=nu)

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        rate, _ = self.scenario.rates(self.unpack(t, y))
        return self.pack_rate(rate)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run: states with rates and fluxes re-evaluated at
    every sample, so diagnostics see rates exactly consistent with states."""

    scenario: Scenario
    times: np.ndarray
    states: Tuple[ThermoState, ...]
    rates: Tuple[StateRate, ...]
    fluxes: Tuple[FluxSnapshot, ...]

    @property
    def n_samples(self) -> int:
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.states, self.rates, self.fluxes))


def sample_times(t_end: float, sample_every: float) -> np.ndarray:
    """Uniform grid 0, h, 2h, ..., t_end (t_end always included)."""
    if t_end == 0.0:
        return np.array([0.0])
    n = int(np.floor(t_end / sample_every + 1e-9))
    times = np.arange(n + 1) * sample_every
    if times[-1] < t_end * (1.0 - 1e-12):
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def run_scenario(scenario: Scenario, *, t_end: Optional[float] = None,
                 sample_every: Optional[float] = None,
                 integrator: Optional[IntegratorConfig] = None) -> Trajectory:
    """Integrate a scenario and sample it uniformly."""
    scenario = scenario.with_settings(t_end=t_end, sample_every=sample_every,
                                      integrator=integrator)
    system = ThermoSystem(scenario)
    y0 = system.pack(scenario.initial_state.replace(t=0.0))
    times = sample_times(scenario.t_end, scenario.sample_every)
    sol = integrate(system.rhs, 0.0, y0, scenario.t_end, scenario.integrator,
                    mask=system.error_mask, boundaries=times)
    ys = hermite_sample(sol, times)
    states: List[ThermoState] = []
    rates = []
    fluxes = []
    for t, y in zip(times, ys):
        x = system.unpack(float(t), y)
        rate, flux = scenario.rates(x)
        states.append(x)
        rates.append(rate)
        fluxes.append(flux)
    return Trajectory(scenario=scenario, times=times, states=tuple(states),
                      rates=tuple(rates), fluxes=tuple(fluxes))


def trajectory_from_states(scenario: Scenario, times, states) -> Trajectory:
    """Rebuild a Trajectory (rates, fluxes) from bare sampled states."""
    rates = []
    fluxes = []
    for x in states:
        rate, flux = scenario.rates(x)
        rates.append(rate)
        fluxes.append(flux)
    return Trajectory(scenario=scenario, times=np.asarray(times, dtype=float),
                      states=tuple(states), rates=tuple(rates), fluxes=tuple(fluxes))


# -- single-step interfaces on ThermoState ------------------------------------

def step_rk4(scenario: Scenario, x: ThermoState, dt: float) -> ThermoState:
    """One classical RK4 step of a scenario state."""
    system = ThermoSystem(scenario)
    y1 = rk4_step(system.rhs, x.t, system.pack(x), dt)
    return system.unpack(x.t + dt, y1)


def step_adaptive(scenario: Scenario, x: ThermoState, dt: float,
                  cfg: Optional[IntegratorConfig] = None
                  ) -> Tuple[ThermoState, float, float]:
    """One accepted Dormand-Prince 5(4) step; returns (state, next_dt, error)."""
    cfg = cfg or scenario.integrator
    system = ThermoSystem(scenario)
    t1, y1, _f1, dt_next, err, _ = adaptive_step(
        system.rhs, x.t, system.pack(x), dt, cfg, mask=system.error_mask)
    return system.unpack(t1, y1), dt_next, err


def step_implicit_midpoint(scenario: Scenario, x: ThermoState, dt: float,
                           cfg: Optional[IntegratorConfig] = None) -> ThermoState:
    """One implicit midpoint step (Newton with finite-difference Jacobian)."""
    cfg = cfg or scenario.integrator
    system = ThermoSystem(scenario)
    y1 = implicit_midpoint_step(system.rhs, x.t, system.pack(x), dt,
                                cfg.newton_tol, cfg.newton_max_iter)
    return system.unpack(x.t + dt, y1)
