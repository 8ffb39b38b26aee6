"""Quadrature rules used by the Galerkin assembly.

Two one-dimensional rules: plain Gauss-Legendre panels, and a Gauss rule for
the weight ln(1/x) on [0,1] used to integrate the logarithmic part of the
self-panel kernel. The log rule was generated once from the exact moments
mu_k = 1/(k+1)^2 (Stieltjes recurrence in rational arithmetic, Jacobi
eigensystem at 60 digits) and is frozen here; it integrates polynomials
exactly through degree 15.
"""

import numpy as np

PANEL_RULE_POINTS = 8

# nodes/weights for int_0^1 f(x) ln(1/x) dx ~= sum w_i f(x_i)
GAUSS_LOG_X = np.array([
    0.013320244160892465,
    0.079750429013894938,
    0.197871029326188054,
    0.354153994351909420,
    0.529458575234917278,
    0.701814529939099964,
    0.849379320441106676,
    0.953326450056359789,
])
GAUSS_LOG_W = np.array([
    0.164416604728002887,
    0.237525610023306021,
    0.226841984431919126,
    0.175754079006070245,
    0.112924030246759052,
    0.057872210717782072,
    0.020979073742132978,
    0.003686407104027619,
])

_GL_X, _GL_W = np.polynomial.legendre.leggauss(PANEL_RULE_POINTS)
# reference rule on [0,1]
GAUSS_X = 0.5 * (_GL_X + 1.0)
GAUSS_W = 0.5 * _GL_W


def gauss_panel(a, b, n=PANEL_RULE_POINTS):
    """Gauss-Legendre nodes and weights on the interval [a, b]."""
    if n == PANEL_RULE_POINTS:
        x, w = GAUSS_X, GAUSS_W
    else:
        xr, wr = np.polynomial.legendre.leggauss(n)
        x, w = 0.5 * (xr + 1.0), 0.5 * wr
    h = b - a
    return a + h * x, h * w


def log_panel(a, b):
    """Composite rule approximating int_a^b f(s) ln|s-a| ds.

    ln|s-a| = ln(tau) + ln(b-a) under s = a + (b-a) tau, so the integral is
    -(b-a) * GaussLog[f] + (b-a) ln(b-a) * Gauss[f]. Returns the merged
    node and weight arrays (x_log, w_log, x_lin, w_lin).
    """
    h = b - a
    return (a + h * GAUSS_LOG_X, -h * GAUSS_LOG_W,
            a + h * GAUSS_X, h * np.log(h) * GAUSS_W)
