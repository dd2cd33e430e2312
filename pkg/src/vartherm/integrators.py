"""Time integration on flat state vectors.

Three methods, all deterministic: classical RK4, an embedded Dormand-Prince
5(4) pair with PI step control, and the implicit midpoint rule with a
simplified (frozen-Jacobian) Newton iteration.

The right-hand side is any callable f(t, y) -> dy/dt on 1-D arrays; it may
raise InadmissibleStateError to veto a trial state, which the adaptive
driver treats as a step rejection. Components excluded from the adaptive
error norm (gauge variables) are flagged through ``error_mask``; this keeps
trajectories bitwise independent of gauge offsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np

from ._numerics import jacobian_fd
from .errors import (InadmissibleStateError, IntegrationFailure,
                     MaxStepsExceeded, NewtonFailure, StiffnessFailure)

Rhs = Callable[[float, np.ndarray], np.ndarray]

METHODS = ("rk4", "dopri45", "implicit_midpoint")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "dopri45"
    dt: float = 1e-3                 # fixed step, or initial step for dopri45
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    newton_tol: float = 1e-11
    newton_max_iter: int = 30
    max_steps: int = 2_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not (self.abs_tol > 0.0 and self.rel_tol > 0.0 and self.newton_tol > 0.0):
            raise ValueError("tolerances must be positive")


# -- Dormand-Prince 5(4) tableau --------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                   187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0
_DT_UNDERFLOW_REL = 1e-14


def rk4_step(f: Rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical 4-stage Runge-Kutta step."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _dopri_attempt(f: Rhs, t: float, y: np.ndarray, dt: float, f0: np.ndarray):
    """One trial Dormand-Prince step. Returns (y5, err_vec, f_new)."""
    k = [f0]
    for i in range(1, 7):
        yi = y + dt * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
        k.append(f(t + _DP_C[i] * dt, yi))
    y5 = y + dt * sum(b * k[i] for i, b in enumerate(_DP_B5) if b != 0.0)
    err = dt * sum(e * k[i] for i, e in enumerate(_DP_E) if e != 0.0)
    return y5, err, k[6]   # FSAL: k7 = f(t + dt, y5)


def _error_norm(err_vec, y0, y1, abs_tol, rel_tol, mask):
    scale = abs_tol + rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    ratio = np.abs(err_vec) / scale
    if mask is not None:
        ratio = ratio[mask]
    return float(np.max(ratio)) if ratio.size else 0.0


def implicit_midpoint_step(f: Rhs, t: float, y: np.ndarray, dt: float,
                           newton_tol: float = 1e-11, max_iter: int = 30) -> np.ndarray:
    """One implicit midpoint step, simplified Newton with frozen FD Jacobian."""
    if y.size == 0:
        return y.copy()
    f0 = f(t, y)
    y1 = y + dt * f0
    t_mid = t + 0.5 * dt
    G = y1 - y - dt * f(t_mid, 0.5 * (y + y1))
    tol_scale = newton_tol * (1.0 + float(np.max(np.abs(y1 - y))))
    if float(np.max(np.abs(G))) <= tol_scale:
        return y1
    J = jacobian_fd(lambda z: f(t_mid, z), 0.5 * (y + y1))
    A = np.eye(y.size) - 0.5 * dt * J
    for _ in range(max_iter):
        y1 = y1 + np.linalg.solve(A, -G)
        G = y1 - y - dt * f(t_mid, 0.5 * (y + y1))
        tol_scale = newton_tol * (1.0 + float(np.max(np.abs(y1 - y))))
        if float(np.max(np.abs(G))) <= tol_scale:
            return y1
    raise NewtonFailure(
        f"implicit midpoint Newton stalled at t = {t} (residual {np.max(np.abs(G)):.3e})")


def adaptive_step(f: Rhs, t: float, y: np.ndarray, dt: float,
                  cfg: IntegratorConfig, mask: Optional[np.ndarray] = None,
                  f0: Optional[np.ndarray] = None, err_prev: float = 1.0):
    """Attempt Dormand-Prince steps until one is accepted.

    Returns (t1, y1, f1, dt_next, error_estimate, err_prev_next). dt may
    shrink during rejections; underflow raises StiffnessFailure.
    """
    if f0 is None:
        f0 = f(t, y)
    dt_floor = _DT_UNDERFLOW_REL * max(abs(t), abs(dt), 1e-30)
    last_reason = ""
    while True:
        if dt < dt_floor:
            raise StiffnessFailure(
                f"step size underflow at t = {t} (dt = {dt:.3e}){': ' + last_reason if last_reason else ''}")
        try:
            y1, err_vec, f1 = _dopri_attempt(f, t, y, dt, f0)
            err = _error_norm(err_vec, y, y1, cfg.abs_tol, cfg.rel_tol, mask)
        except InadmissibleStateError as exc:
            last_reason = str(exc)
            dt *= 0.5
            continue
        if err <= 1.0:
            if err == 0.0:
                factor = _MAX_FACTOR
            else:
                factor = _SAFETY * err ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
            dt_next = dt * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            return t + dt, y1, f1, dt_next, err, max(err, 1e-10)
        factor = _SAFETY * err ** (-0.2)
        dt *= min(1.0, max(_MIN_FACTOR, factor))


@dataclass
class Solution:
    """Accepted integration nodes with their derivatives."""

    ts: np.ndarray
    ys: np.ndarray   # (n_nodes, dim)
    fs: np.ndarray   # (n_nodes, dim)

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])


def integrate(f: Rhs, t0: float, y0, t_end: float, cfg: IntegratorConfig,
              mask: Optional[np.ndarray] = None,
              boundaries: Optional[Sequence[float]] = None) -> Solution:
    """Integrate y' = f(t, y) from t0 to t_end per the configured method.

    Adaptive steps never straddle a time in ``boundaries`` (typically the
    uniform sampling grid), so sampled states are integrator nodes rather
    than interpolants whenever the natural step is coarser than the grid.
    """
    y = np.asarray(y0, dtype=float).copy()
    ts: List[float] = [t0]
    ys: List[np.ndarray] = [y.copy()]
    fs: List[np.ndarray] = [np.asarray(f(t0, y), dtype=float)]
    if t_end == t0:
        return Solution(np.array(ts), np.array(ys), np.array(fs))
    if t_end < t0:
        raise IntegrationFailure("t_end must not precede the initial time")

    t = t0
    steps = 0
    if cfg.method in ("rk4", "implicit_midpoint"):
        while t < t_end - 1e-15 * max(1.0, abs(t_end)):
            dt = min(cfg.dt, t_end - t)
            steps += 1
            if steps > cfg.max_steps:
                raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t = {t}")
            try:
                if cfg.method == "rk4":
                    y = rk4_step(f, t, y, dt)
                else:
                    y = implicit_midpoint_step(f, t, y, dt, cfg.newton_tol,
                                               cfg.newton_max_iter)
            except InadmissibleStateError as exc:
                raise IntegrationFailure(
                    f"inadmissible state in fixed-step {cfg.method} at t = {t}: {exc}") from exc
            t = t + dt
            if abs(t - t_end) < 1e-12 * max(1.0, abs(t_end)):
                t = t_end
            ts.append(t)
            ys.append(y.copy())
            fs.append(np.asarray(f(t, y), dtype=float))
        return Solution(np.array(ts), np.array(ys), np.array(fs))

    # dopri45
    marks = np.asarray(boundaries, dtype=float) if boundaries is not None else None
    dt = min(cfg.dt, t_end - t0)
    f_curr = fs[0]
    err_prev = 1.0
    while t < t_end - 1e-15 * max(1.0, abs(t_end)):
        dt_cap = t_end - t
        if marks is not None:
            j = int(np.searchsorted(marks, t * (1.0 + 1e-14) + 1e-300, side="right"))
            if j < marks.size:
                dt_cap = min(dt_cap, marks[j] - t)
        dt_try = min(dt, dt_cap)
        steps += 1
        if steps > cfg.max_steps:
            raise MaxStepsExceeded(f"exceeded {cfg.max_steps} steps at t = {t}")
        t, y, f_curr, dt_next, _err, err_prev = adaptive_step(
            f, t, y, dt_try, cfg, mask=mask, f0=f_curr, err_prev=err_prev)
        if dt_try < dt and dt_next >= dt_try:
            # boundary-clipped step: keep the natural step proposal alive
            dt = max(dt, dt_next)
        else:
            dt = dt_next
        if abs(t - t_end) < 1e-12 * max(1.0, abs(t_end)):
            t = t_end
        elif marks is not None and j < marks.size \
                and abs(t - marks[j]) < 1e-12 * max(1.0, abs(marks[j])):
            t = float(marks[j])
        ts.append(t)
        ys.append(y.copy())
        fs.append(f_curr.copy())
    return Solution(np.array(ts), np.array(ys), np.array(fs))


def hermite_sample(sol: Solution, times: Sequence[float]) -> np.ndarray:
    """Evaluate the solution on a time grid by cubic Hermite interpolation.

    Node times are returned exactly, and the interpolant is written in
    increment form y0 + h01 (y1 - y0) + h (h10 f0 + h11 f1), so components
    with equal endpoint values and zero derivatives (conserved or gauge
    slots) pass through bitwise unchanged.
    """
    out = np.empty((len(times), sol.ys.shape[1]))
    ts = sol.ts
    for m, t in enumerate(times):
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 1)
        if ts[i] == t or i == len(ts) - 1:
            out[m] = sol.ys[i]
            continue
        t0, t1 = ts[i], ts[i + 1]
        h = t1 - t0
        s = (t - t0) / h
        h10 = s * (1.0 - s) ** 2
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0)
        out[m] = sol.ys[i] + h01 * (sol.ys[i + 1] - sol.ys[i]) \
            + h * (h10 * sol.fs[i] + h11 * sol.fs[i + 1])
    return out
