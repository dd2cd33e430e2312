"""Ideal-gas equation of state in entropy form.

The gas closure used throughout the library is a constant-heat-capacity
ideal gas with the internal energy written explicitly as a function of its
natural variables (S, V, N):

    U(S, V, N) = N c_v T_ref (N v_ref / V)**(R/c_v) exp((S/N - s_ref)/c_v)

which gives the analytic accessors

    T  = dU/dS = U / (N c_v)          [K]
    p  = -dU/dV = N R T / V           [Pa]
    mu = dU/dN = (c_v + R) T - T S/N  [J/mol]

and the entropy inversion

    S(T, V, N) = N (s_ref + c_v ln(T/T_ref) + R ln(V/(N v_ref))).

All quantities are SI: J, K, mol, m^3, Pa. (T_ref, v_ref, s_ref) fix the
entropy gauge; they drop out of every observable difference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError

#: molar gas constant [J/(mol K)], CODATA 2018
GAS_CONSTANT = 8.314462618

#: molar volume of an ideal gas at 300 K and 1 bar [m^3/mol]
_V_REF_DEFAULT = GAS_CONSTANT * 300.0 / 1.0e5


class MolarState(NamedTuple):
    """Molar thermodynamic state of a gas stream at given (T, p)."""

    S: float  # molar entropy        [J/(mol K)]
    V: float  # molar volume         [m^3/mol]
    U: float  # molar internal energy [J/mol]
    H: float  # molar enthalpy       [J/mol]
    mu: float  # chemical potential   [J/mol]


@dataclass(frozen=True)
class IdealGasEOS:
    """Constant-c_v ideal gas, S-form internal energy.

    c_v:   molar heat capacity at constant volume [J/(mol K)]
    R:     gas constant [J/(mol K)]
    T_ref: reference temperature [K]
    v_ref: reference molar volume [m^3/mol]
    s_ref: molar entropy at (T_ref, v_ref) [J/(mol K)]
    """

    c_v: float
    R: float = GAS_CONSTANT
    T_ref: float = 300.0
    v_ref: float = _V_REF_DEFAULT
    s_ref: float = 120.0

    def __post_init__(self):
        for name in ("c_v", "R", "T_ref", "v_ref"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"IdealGasEOS.{name} must be positive")

    @property
    def gamma(self) -> float:
        """Heat capacity ratio c_p / c_v."""
        return (self.c_v + self.R) / self.c_v

    def _check(self, V, N):
        if np.any(np.asarray(V) <= 0.0):
            raise DomainError("volume must be positive")
        if np.any(np.asarray(N) <= 0.0):
            raise DomainError("mole number must be positive")

    def internal_energy(self, S, V, N):
        """U(S, V, N) [J]. Broadcasts over array arguments."""
        self._check(V, N)
        S, V, N = np.asarray(S, float), np.asarray(V, float), np.asarray(N, float)
        comp = (N * self.v_ref / V) ** (self.R / self.c_v)
        return N * self.c_v * self.T_ref * comp * np.exp((S / N - self.s_ref) / self.c_v)

    def temperature(self, S, V, N):
        """T = dU/dS [K]."""
        return self.internal_energy(S, V, N) / (np.asarray(N, float) * self.c_v)

    def pressure(self, S, V, N):
        """p = -dU/dV = N R T / V [Pa]."""
        return np.asarray(N, float) * self.R * self.temperature(S, V, N) / np.asarray(V, float)

    def chemical_potential(self, S, V, N):
        """mu = dU/dN = H_molar - T S_molar [J/mol]."""
        T = self.temperature(S, V, N)
        S, N = np.asarray(S, float), np.asarray(N, float)
        return (self.c_v + self.R) * T - T * S / N

    def properties(self, S, V, N):
        """(U, T, p, mu) in one pass; cheaper than the individual accessors."""
        U = self.internal_energy(S, V, N)
        N = np.asarray(N, float)
        T = U / (N * self.c_v)
        p = N * self.R * T / np.asarray(V, float)
        mu = (self.c_v + self.R) * T - T * np.asarray(S, float) / N
        return U, T, p, mu

    def entropy(self, T, V, N):
        """Invert the temperature relation: S such that temperature(S, V, N) = T."""
        self._check(V, N)
        if np.any(np.asarray(T) <= 0.0):
            raise DomainError("temperature must be positive")
        T, V, N = np.asarray(T, float), np.asarray(V, float), np.asarray(N, float)
        return N * (self.s_ref + self.c_v * np.log(T / self.T_ref)
                    + self.R * np.log(V / (N * self.v_ref)))

    def molar_state(self, T, p) -> MolarState:
        """Molar state of the gas at prescribed temperature and pressure.

        Used for ports: the stream entropy and chemical potential follow from
        (T, p) alone. H = U + p V by definition and mu = H - T S, so the
        identity H = mu + T S holds to rounding by construction.
        """
        if not (T > 0.0 and p > 0.0):
            raise DomainError("port temperature and pressure must be positive")
        V = self.R * T / p
        S = self.s_ref + self.c_v * np.log(T / self.T_ref) + self.R * np.log(V / self.v_ref)
        U = self.c_v * T
        H = U + p * V
        mu = H - T * S
        return MolarState(S=float(S), V=float(V), U=float(U), H=float(H), mu=float(mu))


def mixture_properties(eoses: Sequence[IdealGasEOS], S, volumes, N):
    """Common-temperature closure for several gas compartments sharing one entropy.

    Each compartment k holds N_k moles of an ideal gas (its own c_v and
    reference constants) in a fixed volume V_k; a single entropy S is
    attributed to the whole collection and all compartments share the
    temperature T determined by

        S = sum_k N_k s_k(T, V_k, N_k).

    Returns (U, T, mu) with U the total internal energy [J], T the common
    temperature [K] and mu the array of compartment chemical potentials
    [J/mol]. Also serves, per unit volume, as the energy density of an
    ideal-gas mixture with entropy of mixing (volumes = 1, N = molar
    densities).
    """
    N = np.asarray(N, dtype=float)
    volumes = np.broadcast_to(np.asarray(volumes, dtype=float), N.shape)
    if np.any(N <= 0.0):
        raise DomainError("all compartment mole numbers must be positive")
    if np.any(volumes <= 0.0):
        raise DomainError("all compartment volumes must be positive")
    R = eoses[0].R
    c_v = np.array([e.c_v for e in eoses])
    s_ref = np.array([e.s_ref for e in eoses])
    lnT_ref = np.log([e.T_ref for e in eoses])
    v_ref = np.array([e.v_ref for e in eoses])
    if any(e.R != R for e in eoses):
        raise DomainError("all compartments must use the same gas constant")

    ln_vol = np.log(volumes / (N * v_ref))
    C = np.dot(N, c_v)
    A = np.dot(N, s_ref + R * ln_vol - c_v * lnT_ref)
    lnT = (S - A) / C
    T = np.exp(lnT)
    U = C * T
    s_molar = s_ref + c_v * (lnT - lnT_ref) + R * ln_vol
    mu = (c_v + R) * T - T * s_molar
    return U, T, mu
