"""Shared oracle helpers: extended-precision field and Hermite evaluation.

These re-derive the quantities under test through an independent route
(plain numpy in long-double precision) so finite-difference comparisons
are limited by truncation error only, not float64 cancellation.
"""

import numpy as np


def field_value_ld(field, y):
    """Field value via extended-precision elementwise mean."""
    pts = field.points.astype(np.longdouble)
    s2 = np.longdouble(field.sigma) ** 2
    d = pts - np.longdouble(y)
    return np.exp(d * d / (-2 * s2)).mean()


def hermite_ld(k, x):
    """Orthonormal Hermite h_k(x) via the recurrence in extended precision."""
    pi = np.longdouble(np.pi)
    h0 = pi ** np.longdouble(-0.25)
    if k == 0:
        return h0
    h1 = np.sqrt(np.longdouble(2)) * np.longdouble(x) * h0
    for i in range(1, k):
        h0, h1 = h1, np.longdouble(x) * np.sqrt(np.longdouble(2) / (i + 1)) * h1 - np.sqrt(
            np.longdouble(i) / (i + 1)
        ) * h0
    return h1


def fd_composed_curvature(field, k, y, h=1e-5):
    """Central second difference of h_k(psi0(y)) — the chain-rule oracle."""
    hl = np.longdouble(h)
    fp = hermite_ld(k, field_value_ld(field, y + h))
    f0 = hermite_ld(k, field_value_ld(field, y))
    fm = hermite_ld(k, field_value_ld(field, y - h))
    return float((fp - 2 * f0 + fm) / (hl * hl)), float(f0)
