"""System topology and instantaneous state containers.

A finite-dimensional system is a collection of P interacting simple
subsystems, each carrying one entropy slot S_A; compartments hold mole
numbers N_k and each belongs to one subsystem. Mechanical configuration is
shared: n_mech generalized coordinates q with velocities v.

Gauge variables ride along with the physical state: Gamma (thermal
displacements, dGamma/dt = T^A), W (chemical displacements, dW/dt = mu^k)
and Sigma (accumulated internal entropy production, dSigma/dt = I_A). Only
their rates are observable; they are initialized to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np

from .errors import DimensionMismatchError, NegativeMolesError
from .reactions import ReactionNetwork

Profile = Union[float, Callable[[float], float]]


def evaluate_profile(p: Profile, t: float) -> float:
    return float(p(t)) if callable(p) else float(p)


def _frozen_array(x, n=None) -> np.ndarray:
    a = np.array(x, dtype=float, copy=True).reshape(-1)
    if n is not None and a.size != n:
        raise DimensionMismatchError(f"expected length {n}, got {a.size}")
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class PortSpec:
    """Matter port: prescribed stream conditions and molar flow rate.

    T, p: stream temperature [K] and pressure [Pa]; J: molar flow rate into
    the system [mol/s] (negative for outflow). Each may be a constant or a
    callable of time. The stream molar entropy, enthalpy and chemical
    potential follow from (T, p) through the port's gas model, and the
    entropy flow rate is J_S = J * S_molar.
    """

    eos: "object"
    T: Profile
    p: Profile
    J: Profile
    compartment: int = 0

    def molar_state(self, t: float):
        return self.eos.molar_state(evaluate_profile(self.T, t), evaluate_profile(self.p, t))

    def flow_rate(self, t: float) -> float:
        return evaluate_profile(self.J, t)


@dataclass(frozen=True)
class HeatSourceSpec:
    """External heat source: temperature T [K] and entropy flow rate J_S [W/K]."""

    T: Profile
    J_S: Profile

    def temperature(self, t: float) -> float:
        return evaluate_profile(self.T, t)

    def entropy_rate(self, t: float) -> float:
        return evaluate_profile(self.J_S, t)


@dataclass(frozen=True)
class SystemTopology:
    """Shape of a finite-dimensional system.

    n_mech: number of mechanical coordinates
    P:      number of subsystems (entropy slots)
    K:      number of compartments (mole-number slots)
    compartment_owner: subsystem index owning each compartment
    """

    n_mech: int
    P: int
    K: int
    compartment_owner: Tuple[int, ...] = ()
    ports: Tuple[PortSpec, ...] = ()
    heat_sources: Tuple[HeatSourceSpec, ...] = ()
    reactions: Optional[ReactionNetwork] = None

    def __post_init__(self):
        if self.n_mech < 0 or self.P < 0 or self.K < 0:
            raise DimensionMismatchError("n_mech, P, K must be nonnegative")
        if len(self.compartment_owner) != self.K:
            raise DimensionMismatchError("compartment_owner must list one subsystem per compartment")
        if any(not (0 <= a < self.P) for a in self.compartment_owner):
            raise DimensionMismatchError("compartment_owner entries must be valid subsystem indices")
        if any(not (0 <= p.compartment < self.K) for p in self.ports):
            raise DimensionMismatchError("port compartment index out of range")

    @property
    def n_reactions(self) -> int:
        return 0 if self.reactions is None else self.reactions.n_reactions

    @property
    def is_open(self) -> bool:
        """Open systems exchange matter or heat through ports / heat sources."""
        return bool(self.ports) or bool(self.heat_sources)


@dataclass(frozen=True)
class ThermoState:
    """Full instantaneous state.

    t [s]; q [model units], v; S [J/K]; N [mol]; Gamma [K s]; W [J s/mol];
    Sigma [J/K]; nu: reaction displacements [J s/mol], present only when the
    topology carries a reaction network.
    """

    t: float
    q: np.ndarray
    v: np.ndarray
    S: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray
    W: np.ndarray
    Sigma: np.ndarray
    nu: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name in ("q", "v", "S", "N", "Gamma", "W", "Sigma", "nu"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if self.v.size != self.q.size:
            raise DimensionMismatchError("q and v must have equal length")
        if self.Gamma.size != self.S.size or self.Sigma.size != self.S.size:
            raise DimensionMismatchError("Gamma and Sigma must have one slot per entropy")
        if self.W.size != self.N.size:
            raise DimensionMismatchError("W must have one slot per compartment")

    @classmethod
    def initial(cls, topology: SystemTopology, *, q=None, v=None, S=None, N=None, t=0.0):
        """State with zero gauge variables and the given physical coordinates."""
        z = np.zeros
        return cls(
            t=t,
            q=z(topology.n_mech) if q is None else q,
            v=z(topology.n_mech) if v is None else v,
            S=z(topology.P) if S is None else S,
            N=z(topology.K) if N is None else N,
            Gamma=z(topology.P),
            W=z(topology.K),
            Sigma=z(topology.P),
            nu=z(topology.n_reactions),
        )

    def replace(self, **kw) -> "ThermoState":
        return replace(self, **kw)


def validate_state(topology: SystemTopology, x: ThermoState) -> None:
    """Check state array lengths against the topology."""
    expect = {
        "q": topology.n_mech, "v": topology.n_mech,
        "S": topology.P, "Gamma": topology.P, "Sigma": topology.P,
        "N": topology.K, "W": topology.K,
        "nu": topology.n_reactions,
    }
    for name, n in expect.items():
        if getattr(x, name).size != n:
            raise DimensionMismatchError(
                f"state field {name} has length {getattr(x, name).size}, topology requires {n}")


#: relative floor below which a negative mole number aborts the run
MOLE_FLOOR_REL = 1e-9


def check_mole_floor(N: np.ndarray) -> None:
    """Abort on clearly negative mole numbers instead of clamping.

    Tiny negative excursions (within MOLE_FLOOR_REL of the largest mole
    number) are tolerated as integration jitter.
    """
    if N.size == 0:
        return
    floor = -MOLE_FLOOR_REL * max(float(np.max(N)), 1.0)
    if np.any(N < floor):
        raise NegativeMolesError(f"mole numbers below floor: N = {N.tolist()}")
