import numpy as np
import numpy.testing as npt
import pytest

from vartherm.errors import (InadmissibleStateError, IntegrationFailure,
                             MaxStepsExceeded, StiffnessFailure)
from vartherm.integrators import (IntegratorConfig, Solution, adaptive_step,
                                  hermite_sample, implicit_midpoint_step,
                                  integrate, rk4_step)


def test_zero_rhs_is_fixed_point():
    y0 = np.array([1.0, -2.0, 3.0])
    f = lambda t, y: np.zeros_like(y)
    npt.assert_array_equal(rk4_step(f, 0.0, y0, 0.1), y0)
    npt.assert_array_equal(implicit_midpoint_step(f, 0.0, y0, 0.1), y0)
    t1, y1, _f1, dt_next, err, _ = adaptive_step(f, 0.0, y0, 0.1,
                                                 IntegratorConfig())
    npt.assert_array_equal(y1, y0)
    assert err == 0.0 and dt_next > 0.1   # step grows


def test_rk4_local_order_on_exponential():
    f = lambda t, y: -y
    y0 = np.array([1.0])
    errs = []
    for dt in (0.1, 0.05):
        y1 = rk4_step(f, 0.0, y0, dt)
        errs.append(abs(y1[0] - np.exp(-dt)))
    # local error O(dt^5): halving dt shrinks it ~32x
    ratio = errs[0] / errs[1]
    assert 24.0 < ratio < 40.0


def test_rk4_global_convergence_on_oscillator():
    # y'' = -y integrated as a system; global error O(dt^4)
    f = lambda t, y: np.array([y[1], -y[0]])
    y0 = np.array([1.0, 0.0])
    T = 2.0

    def run(dt):
        y = y0.copy()
        t = 0.0
        while t < T - 1e-12:
            y = rk4_step(f, t, y, dt)
            t += dt
        return y

    exact = np.array([np.cos(T), -np.sin(T)])
    e1 = np.max(np.abs(run(0.02) - exact))
    e2 = np.max(np.abs(run(0.01) - exact))
    order = np.log2(e1 / e2)
    assert order > 3.8


def test_midpoint_exact_on_linear_problem():
    # y' = A y: implicit midpoint equals the exact Pade(1,1) update
    A = np.array([[0.0, 1.0], [-4.0, -0.5]])
    f = lambda t, y: A @ y
    y0 = np.array([1.0, 0.5])
    dt = 0.05
    y1 = implicit_midpoint_step(f, 0.0, y0, dt, newton_tol=1e-14)
    expected = np.linalg.solve(np.eye(2) - 0.5 * dt * A,
                               (np.eye(2) + 0.5 * dt * A) @ y0)
    npt.assert_allclose(y1, expected, rtol=1e-11)


def test_midpoint_no_secular_energy_drift():
    f = lambda t, y: np.array([y[1], -y[0]])
    y = np.array([1.0, 0.0])
    energies = []
    for k in range(10000):
        y = implicit_midpoint_step(f, 0.0, y, 0.05, newton_tol=1e-13)
        if k % 100 == 0:
            energies.append(0.5 * (y[0] ** 2 + y[1] ** 2))
    energies = np.array(energies)
    dev = np.abs(energies - 0.5)
    assert np.max(dev) < 1e-3
    # bounded oscillation: late deviations no larger than early ones
    assert np.max(dev[50:]) <= 2.0 * np.max(dev[:50]) + 1e-12


def test_midpoint_order_two():
    f = lambda t, y: np.array([y[1], -np.sin(y[0])])
    y0 = np.array([1.2, 0.0])
    T = 1.0

    def run(dt):
        y = y0.copy()
        for _ in range(int(round(T / dt))):
            y = implicit_midpoint_step(f, 0.0, y, dt, newton_tol=1e-14)
        return y

    ref = run(1.0 / 1024.0)
    e1 = np.max(np.abs(run(1.0 / 32.0) - ref))
    e2 = np.max(np.abs(run(1.0 / 64.0) - ref))
    assert np.log2(e1 / e2) > 1.9


def test_adaptive_error_controlled_and_proportional():
    f = lambda t, y: np.array([y[1], -np.sin(y[0]) - 0.1 * y[1]])
    y0 = np.array([1.0, 0.0])
    ref = integrate(f, 0.0, y0, 5.0,
                    IntegratorConfig(dt=1e-3, rel_tol=1e-13, abs_tol=1e-13))
    out = {}
    for rtol in (1e-6, 1e-7):
        sol = integrate(f, 0.0, y0, 5.0,
                        IntegratorConfig(dt=1e-3, rel_tol=rtol, abs_tol=1e-14))
        out[rtol] = np.max(np.abs(sol.ys[-1] - ref.ys[-1]))
    ratio = out[1e-6] / out[1e-7]
    assert 2.0 < ratio < 60.0   # tightening 10x shrinks error roughly 10x


def test_adaptive_rejects_on_inadmissible_and_underflows():
    def f(t, y):
        raise InadmissibleStateError("always bad")

    with pytest.raises(StiffnessFailure):
        adaptive_step(f, 0.0, np.array([1.0]), 0.1, IntegratorConfig(),
                      f0=np.array([0.0]))


def test_fixed_step_failure_on_inadmissible():
    def f(t, y):
        if t > 0.0:
            raise InadmissibleStateError("bad interior stage")
        return -y

    with pytest.raises(IntegrationFailure):
        integrate(f, 0.0, np.array([1.0]), 1.0,
                  IntegratorConfig(method="rk4", dt=0.1))


def test_max_steps_enforced():
    f = lambda t, y: -y
    with pytest.raises(MaxStepsExceeded):
        integrate(f, 0.0, np.array([1.0]), 10.0,
                  IntegratorConfig(method="rk4", dt=1e-4, max_steps=100))


def test_determinism_bitwise():
    f = lambda t, y: np.array([y[1], -np.sin(y[0]) - 0.05 * y[1] ** 3])
    y0 = np.array([0.7, -0.2])
    cfg = IntegratorConfig(dt=1e-3, rel_tol=1e-9, abs_tol=1e-12)
    a = integrate(f, 0.0, y0, 3.0, cfg)
    b = integrate(f, 0.0, y0, 3.0, cfg)
    assert a.ts.shape == b.ts.shape
    assert np.array_equal(a.ys, b.ys)
    assert np.array_equal(a.ts, b.ts)


def test_integrate_reaches_t_end_exactly():
    f = lambda t, y: -y
    for method, rtol in (("rk4", 1e-6), ("dopri45", 1e-8),
                         ("implicit_midpoint", 1e-3)):
        sol = integrate(f, 0.0, np.array([1.0]), 1.0,
                        IntegratorConfig(method=method, dt=0.03))
        assert sol.ts[-1] == 1.0
        npt.assert_allclose(sol.ys[-1, 0], np.exp(-1.0), rtol=rtol)


def test_zero_span_returns_initial_sample():
    f = lambda t, y: -y
    sol = integrate(f, 0.0, np.array([2.0]), 0.0, IntegratorConfig())
    assert len(sol.ts) == 1 and sol.ys[0, 0] == 2.0


def test_hermite_sample_nodes_exact_and_cubic_accurate():
    ts = np.linspace(0.0, 1.0, 11)
    ys = np.sin(2.0 * ts)[:, None]
    fs = 2.0 * np.cos(2.0 * ts)[:, None]
    sol = Solution(ts=ts, ys=ys, fs=fs)
    at_nodes = hermite_sample(sol, ts)
    assert np.array_equal(at_nodes, ys)
    mid = np.linspace(0.05, 0.95, 10)
    approx = hermite_sample(sol, mid)[:, 0]
    # cubic Hermite error bound: h^4 max|f''''| / 384 ~ 4.2e-6
    npt.assert_allclose(approx, np.sin(2.0 * mid), atol=5e-6)
