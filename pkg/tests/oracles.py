"""Independent reference implementations used only by the tests.

These deliberately avoid the code paths they check: the principal-value
oracle is a fixed-grid midpoint/trapezoid scheme (no adaptive quadrature),
and the thermal-ladder oracle is a direct Gibbs construction.
"""

import numpy as np


def pv_fixed_grid(g, pole, cutoff, n=1_000_000):
    """PV of integral_0^cutoff g(e) / (e - pole) de on a fixed grid.

    Symmetric subtraction over the widest window around the pole (midpoint
    rule, which never samples x = 0), plain trapezoid outside.  ``g`` must be
    vectorized.
    """
    w = min(pole, cutoff - pole)
    x = (np.arange(n) + 0.5) * (w / n)
    total = float(np.sum((g(pole + x) - g(pole - x)) / x) * (w / n))
    for a, b in ((0.0, pole - w), (pole + w, cutoff)):
        if b > a:
            e = np.linspace(a, b, n)
            total += float(np.trapezoid(g(e) / (e - pole), e))
    return total


def occupation_grid(beta, q, eps):
    """Vectorized 1 / (exp(beta e) - q), overflow-safe, for eps > 0."""
    eps = np.asarray(eps, dtype=float)
    if np.isinf(beta):
        return np.zeros_like(eps)
    x = np.exp(-beta * eps)
    return x / (1.0 - q * x)


def gibbs_ladder(beta, omega0, n_levels):
    """Thermal state of a truncated n_levels ladder with spacing omega0."""
    weights = np.exp(-beta * omega0 * np.arange(n_levels))
    return np.diag(weights / weights.sum()).astype(complex)
