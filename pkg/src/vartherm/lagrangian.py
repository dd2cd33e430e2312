"""Lagrangian models and the thermodynamic state functions they induce.

A LagrangianModel evaluates L(q, v, S, N) and its partial derivatives. The
physics of a scenario is read off the derivatives:

    temperature          T^A  = -dL/dS_A   (must be positive)
    chemical potential   mu^k = -dL/dN_k
    total energy         E    = <dL/dv, v> - L

Analytic partials are preferred; any partial not supplied falls back to a
central finite difference of ``value``, and ``analytic_flag`` records which
situation holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._numerics import FD_STEP, central_gradient
from .errors import DimensionMismatchError, InadmissibleStateError
from .state import ThermoState

Array = np.ndarray
PartialFn = Callable[[Array, Array, Array, Array], Array]


@dataclass(frozen=True)
class LagrangianModel:
    """L(q, v, S, N) together with its first derivatives and mass matrix.

    separable_kinetic declares that dL/dv does not depend on (q, S, N), so
    the velocity-coupling corrections in the acceleration solve vanish and
    are skipped. Leave it False for Lagrangians with state-dependent
    kinetic energy (e.g. configuration-dependent mass matrices).
    """

    n_mech: int
    P: int
    K: int
    value: Callable[[Array, Array, Array, Array], float]
    d_q: Optional[PartialFn] = None
    d_v: Optional[PartialFn] = None
    d_S: Optional[PartialFn] = None
    d_N: Optional[PartialFn] = None
    mass_matrix: Optional[Callable[[Array, Array, Array], Array]] = None
    separable_kinetic: bool = False
    partials: Optional[Callable[[Array, Array, Array, Array], tuple]] = None

    def __post_init__(self):
        object.__setattr__(self, "_analytic", all(
            f is not None for f in (self.d_q, self.d_v, self.d_S, self.d_N)))
        d_v_analytic = self.d_v is not None
        if self.d_q is None:
            object.__setattr__(self, "d_q", _fd_partial(self.value, 0))
        if self.d_v is None:
            object.__setattr__(self, "d_v", _fd_partial(self.value, 1))
        if self.d_S is None:
            object.__setattr__(self, "d_S", _fd_partial(self.value, 2))
        if self.d_N is None:
            object.__setattr__(self, "d_N", _fd_partial(self.value, 3))
        if self.mass_matrix is None:
            if d_v_analytic:
                object.__setattr__(self, "mass_matrix",
                                   _fd_mass_matrix(self.d_v, FD_STEP))
            else:
                object.__setattr__(self, "mass_matrix",
                                   _fd_mass_matrix_from_value(self.value))
        if self.partials is None:
            object.__setattr__(self, "partials", self._partials_from_pieces)

    def _partials_from_pieces(self, q, v, S, N):
        return (self.d_q(q, v, S, N), self.d_v(q, v, S, N),
                self.d_S(q, v, S, N), self.d_N(q, v, S, N))

    @property
    def analytic_flag(self) -> bool:
        """True when all four partials were supplied analytically."""
        return self._analytic

    def check_state(self, x: ThermoState) -> None:
        if x.q.size != self.n_mech or x.S.size != self.P or x.N.size != self.K:
            raise DimensionMismatchError(
                f"state dims (n={x.q.size}, P={x.S.size}, K={x.N.size}) do not match "
                f"Lagrangian dims (n={self.n_mech}, P={self.P}, K={self.K})")


def _fd_partial(value, arg_index):
    """Central finite-difference fallback for one partial derivative of L."""

    def partial(q, v, S, N):
        args = [np.asarray(q, float), np.asarray(v, float),
                np.asarray(S, float), np.asarray(N, float)]

        def f(x):
            probe = list(args)
            probe[arg_index] = x
            return value(*probe)

        return central_gradient(f, args[arg_index])

    return partial


def _fd_mass_matrix_from_value(value):
    """Mass matrix by direct second central differences of L.

    The step adapts to the magnitude of L so additive offsets (potential
    terms) do not swamp the curvature of the kinetic part.
    """

    def mass(q, S, N):
        q = np.asarray(q, float)
        n = q.size
        v0 = np.zeros(n)
        L0 = value(q, v0, S, N)
        h = (np.finfo(float).eps * (1.0 + abs(L0))) ** 0.25

        def at(dv):
            return value(q, dv, S, N)

        M = np.zeros((n, n))
        for i in range(n):
            ei = np.zeros(n)
            ei[i] = h
            M[i, i] = (at(ei) - 2.0 * L0 + at(-ei)) / h ** 2
            for j in range(i + 1, n):
                ej = np.zeros(n)
                ej[j] = h
                M[i, j] = M[j, i] = (at(ei + ej) - at(ei - ej)
                                     - at(-ei + ej) + at(-ei - ej)) / (4.0 * h ** 2)
        return M

    return mass


def _fd_mass_matrix(d_v, step):
    """Mass matrix dd L / dv dv by central differences of dL/dv.

    Evaluated at v = 0; the mass matrix is assumed velocity-independent
    (kinetic energy quadratic in v), which its (q, S, N) signature encodes.
    """

    def mass(q, S, N):
        q = np.asarray(q, float)
        n = q.size
        v0 = np.zeros(n)
        M = np.zeros((n, n))
        for j in range(n):
            vp, vm = v0.copy(), v0.copy()
            vp[j] += step
            vm[j] -= step
            M[:, j] = (d_v(q, vp, S, N) - d_v(q, vm, S, N)) / (2.0 * step)
        return 0.5 * (M + M.T)

    return mass


def energy(L: LagrangianModel, x: ThermoState) -> float:
    """Total energy E = <dL/dv, v> - L(q, v, S, N) [J]."""
    L.check_state(x)
    p = L.d_v(x.q, x.v, x.S, x.N)
    return float(np.dot(p, x.v) - L.value(x.q, x.v, x.S, x.N))


def temperature(L: LagrangianModel, x: ThermoState, A: int) -> float:
    """Temperature of subsystem A: T^A = -dL/dS_A [K]. Positive on admissible states."""
    L.check_state(x)
    if not (0 <= A < L.P):
        raise DimensionMismatchError(f"subsystem index {A} out of range [0, {L.P})")
    T = -float(L.d_S(x.q, x.v, x.S, x.N)[A])
    if not T > 0.0:
        raise InadmissibleStateError(f"non-positive temperature T^{A} = {T} at t = {x.t}")
    return T


def temperatures(L: LagrangianModel, x: ThermoState) -> np.ndarray:
    """All subsystem temperatures; raises if any is non-positive."""
    L.check_state(x)
    T = -L.d_S(x.q, x.v, x.S, x.N)
    if x.S.size and not np.all(T > 0.0):
        raise InadmissibleStateError(f"non-positive temperature among T = {T.tolist()} at t = {x.t}")
    return T


def chemical_potential(L: LagrangianModel, x: ThermoState, k: int) -> float:
    """Chemical potential of compartment k: mu^k = -dL/dN_k [J/mol]."""
    L.check_state(x)
    if not (0 <= k < L.K):
        raise DimensionMismatchError(f"compartment index {k} out of range [0, {L.K})")
    return -float(L.d_N(x.q, x.v, x.S, x.N)[k])


def chemical_potentials(L: LagrangianModel, x: ThermoState) -> np.ndarray:
    L.check_state(x)
    return -L.d_N(x.q, x.v, x.S, x.N)
