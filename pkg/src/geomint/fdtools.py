"""Centered finite-difference helpers for gradient and Jacobian checks."""

from __future__ import annotations

import numpy as np

from .errors import ContractViolationError


def central_gradient(f, x, step=1e-6):
    """Centered-difference gradient of a scalar function at ``x``."""
    x = np.asarray(x, dtype=float)
    g = np.zeros(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def central_jacobian(f, x, step=1e-6):
    """Centered-difference Jacobian of a vector function at ``x``.

    ``step`` must lie in [1e-8, 1e-4]: below that the quotient is all
    roundoff, above it the truncation error drowns the quantities these
    Jacobians feed (symplecticity defects of order h^2).
    """
    if not 1e-8 <= step <= 1e-4:
        raise ContractViolationError(f"fd step must be in [1e-8, 1e-4], got {step}")
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    jac = np.zeros((f0.size, x.size))
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        jac[:, i] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * step)
    return jac
