import numpy as np
import numpy.testing as npt
import pytest

from conftest import linear_lagrangian, state_for
from vartherm._numerics import relative_error
from vartherm.eos import GAS_CONSTANT, IdealGasEOS
from vartherm.errors import DimensionMismatchError, InadmissibleStateError
from vartherm.lagrangian import (LagrangianModel, chemical_potential, energy,
                                 temperature)
from vartherm.models import make_piston


def test_energy_reduces_to_internal_energy_at_rest(eos):
    sc = make_piston(eos=eos, v0=0.0)
    x = sc.initial_state
    U = float(eos.internal_energy(x.S[0], 0.01 * x.q[0], 1.0))
    npt.assert_allclose(energy(sc.lagrangian, x), U, rtol=1e-14)


def test_energy_quadratic_kinetic():
    # L = (1/2) * 2 * v^2, v = 3  ->  E = <dL/dv, v> - L = 18 - 9 = 9 J
    L = linear_lagrangian(n_mech=1, mass=2.0, temperatures=(300.0,))
    x = state_for(L, q=[0.0], v=[3.0], S=[0.0])
    npt.assert_allclose(energy(L, x) - 300.0 * 0.0, 9.0)


def test_piston_energy_is_kinetic_plus_internal(eos):
    sc = make_piston(eos=eos, q0=1.5, v0=2.5)
    x = sc.initial_state
    U = float(eos.internal_energy(x.S[0], 0.01 * 1.5, 1.0))
    npt.assert_allclose(energy(sc.lagrangian, x), 0.5 * 2.0 * 2.5 ** 2 + U,
                        rtol=1e-14)


def test_temperature_linear_lagrangian():
    L = linear_lagrangian(temperatures=(215.0,))
    x = state_for(L, S=[4.0])
    assert temperature(L, x, 0) == 215.0


def test_temperature_reference_point(eos):
    # S = N s_ref and V = N v_ref is the EOS reference state
    N = 1.7
    sc = make_piston(eos=eos, N0=N, q0=N * eos.v_ref / 0.01, T0=eos.T_ref)
    npt.assert_allclose(temperature(sc.lagrangian, sc.initial_state, 0),
                        eos.T_ref, rtol=1e-12)


def test_temperature_positivity_enforced():
    L = linear_lagrangian(temperatures=(-10.0,))
    x = state_for(L, S=[1.0])
    with pytest.raises(InadmissibleStateError):
        temperature(L, x, 0)
    with pytest.raises(DimensionMismatchError):
        temperature(L, x, 3)


def test_chemical_potential_linear_and_symmetric():
    L = linear_lagrangian(temperatures=(300.0,), mus=(11.0, 11.0))
    x = state_for(L, S=[1.0], N=[2.0, 2.0])
    assert chemical_potential(L, x, 0) == 11.0
    assert chemical_potential(L, x, 0) == chemical_potential(L, x, 1)


def test_chemical_potential_matches_finite_difference(eos, rng):
    # mu = -dL/dN against a central difference of the gas Lagrangian
    sc = make_piston(eos=eos)   # K = 0; use open piston for an N slot
    from vartherm.models import make_open_piston
    sc = make_open_piston(eos=eos, ports=(), sources=())
    L = sc.lagrangian
    for _ in range(10):
        x = sc.initial_state.replace(
            S=sc.initial_state.S * rng.uniform(0.9, 1.1),
            N=sc.initial_state.N * rng.uniform(0.7, 1.3))
        h = 1e-6 * x.N[0]
        up = L.value(x.q, x.v, x.S, x.N + h)
        dn = L.value(x.q, x.v, x.S, x.N - h)
        fd = -(up - dn) / (2 * h)
        assert relative_error(chemical_potential(L, x, 0), fd) < 1e-6


def test_finite_difference_fallback_matches_analytic(eos, rng):
    sc = make_piston(eos=eos)
    analytic = sc.lagrangian
    fallback = LagrangianModel(n_mech=1, P=1, K=0, value=analytic.value)
    assert analytic.analytic_flag and not fallback.analytic_flag
    for _ in range(20):
        q = np.array([rng.uniform(1.0, 3.0)])
        v = np.array([rng.uniform(-3.0, 3.0)])
        S = sc.initial_state.S * rng.uniform(0.9, 1.1)
        N = np.zeros(0)
        for name in ("d_q", "d_v", "d_S"):
            a = getattr(analytic, name)(q, v, S, N)
            b = getattr(fallback, name)(q, v, S, N)
            assert relative_error(a, b, floor=1e-9) < 1e-6
        npt.assert_allclose(fallback.mass_matrix(q, S, N),
                            analytic.mass_matrix(q, S, N), rtol=1e-5)


def test_mass_matrix_fallback_is_symmetric(rng):
    def value(q, v, S, N):
        M = np.array([[2.0 + q[0] ** 2, 0.3], [0.3, 1.0 + 0.1 * q[1] ** 2]])
        return 0.5 * float(v @ M @ v) - 100.0 * S[0]

    L = LagrangianModel(n_mech=2, P=1, K=0, value=value)
    M = L.mass_matrix(np.array([1.0, 2.0]), np.array([1.0]), np.zeros(0))
    npt.assert_allclose(M, M.T)
    npt.assert_allclose(M, [[3.0, 0.3], [0.3, 1.4]], rtol=1e-5, atol=1e-6)

    def d_v(q, v, S, N):
        Mq = np.array([[2.0 + q[0] ** 2, 0.3], [0.3, 1.0 + 0.1 * q[1] ** 2]])
        return Mq @ v

    L2 = LagrangianModel(n_mech=2, P=1, K=0, value=value, d_v=d_v)
    M2 = L2.mass_matrix(np.array([1.0, 2.0]), np.array([1.0]), np.zeros(0))
    npt.assert_allclose(M2, [[3.0, 0.3], [0.3, 1.4]], rtol=1e-9, atol=1e-9)
