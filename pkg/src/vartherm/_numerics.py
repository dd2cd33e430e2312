"""Small shared numerical helpers: finite differences and matrix probes."""

from __future__ import annotations

import numpy as np

#: default relative step for central differences of smooth functions
FD_STEP = float(np.cbrt(np.finfo(float).eps))


def central_gradient(f, x, rel_step=FD_STEP):
    """Central-difference gradient of scalar f with respect to array x.

    Per-component step rel_step * max(1, |x_i|).
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        h = rel_step * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (xp[i] - xm[i])
    return g


def directional_derivative(f, x, d, rel_step=FD_STEP):
    """Central-difference derivative of f(x + eps*d) at eps = 0.

    f may return a scalar or an array; d is a direction in the x space.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    dn = np.max(np.abs(d)) if d.size else 0.0
    if dn == 0.0:
        probe = np.asarray(f(x), dtype=float)
        return np.zeros_like(probe)
    h = rel_step * (1.0 + np.max(np.abs(x)) if x.size else 1.0) / dn
    return (np.asarray(f(x + h * d), dtype=float) - np.asarray(f(x - h * d), dtype=float)) / (2.0 * h)


def jacobian_fd(f, y, f0=None, rel_step=None):
    """Forward-difference Jacobian of f: R^n -> R^n. Used by implicit solvers."""
    y = np.asarray(y, dtype=float)
    if f0 is None:
        f0 = np.asarray(f(y), dtype=float)
    n = y.size
    J = np.zeros((f0.size, n))
    step = rel_step if rel_step is not None else np.sqrt(np.finfo(float).eps)
    for j in range(n):
        h = step * max(1.0, abs(y[j]))
        yp = y.copy()
        yp[j] += h
        J[:, j] = (np.asarray(f(yp), dtype=float) - f0) / (yp[j] - y[j])
    return J


def symmetric_part(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def min_symmetric_eigenvalue(M):
    """Smallest eigenvalue of the symmetric part of M."""
    M = symmetric_part(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(M)[0])


def is_psd(M, tol=1e-12):
    """True if the symmetric part of M is positive semi-definite.

    tol is an absolute floor scaled by the largest matrix entry.
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return True
    scale = max(np.max(np.abs(M)), 1.0)
    return min_symmetric_eigenvalue(M) >= -tol * scale


def relative_error(a, b, floor=0.0):
    """|a - b| scaled by max(|a|, |b|, floor); elementwise max for arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    scale = np.where(scale == 0.0, 1.0, scale)
    return np.max(np.abs(a - b) / scale)
