import numpy as np
import pytest

from vartherm.eos import GAS_CONSTANT, IdealGasEOS
from vartherm.lagrangian import LagrangianModel
from vartherm.state import SystemTopology, ThermoState


@pytest.fixture
def eos():
    return IdealGasEOS(c_v=1.5 * GAS_CONSTANT)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def linear_lagrangian(n_mech=0, mass=1.0, temperatures=(300.0,), mus=()):
    """Toy Lagrangian with constant temperatures and chemical potentials:
    L = m v^2 / 2 - sum_A T_A S_A - sum_k mu_k N_k. Makes hand-computed
    right-hand-side values exact."""
    T0 = np.asarray(temperatures, dtype=float)
    mu0 = np.asarray(mus, dtype=float)

    def value(q, v, S, N):
        kin = 0.5 * mass * float(np.dot(v, v)) if n_mech else 0.0
        return kin - float(np.dot(T0, S)) - float(np.dot(mu0, N))

    return LagrangianModel(
        n_mech=n_mech, P=T0.size, K=mu0.size, value=value,
        d_q=lambda q, v, S, N: np.zeros(n_mech),
        d_v=lambda q, v, S, N: mass * v,
        d_S=lambda q, v, S, N: -T0,
        d_N=lambda q, v, S, N: -mu0,
        mass_matrix=lambda q, S, N: mass * np.eye(n_mech),
        separable_kinetic=True)


def state_for(L, q=(), v=(), S=None, N=None, t=0.0):
    top = SystemTopology(n_mech=L.n_mech, P=L.P, K=L.K,
                         compartment_owner=(0,) * L.K)
    return ThermoState.initial(
        top,
        q=np.asarray(q, dtype=float) if len(q) else None,
        v=np.asarray(v, dtype=float) if len(v) else None,
        S=np.asarray(S, dtype=float) if S is not None else None,
        N=np.asarray(N, dtype=float) if N is not None else None,
        t=t)
