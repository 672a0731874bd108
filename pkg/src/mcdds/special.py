"""Complementary error function to ~1e-15 absolute accuracy, numpy-vectorised.

For |x| < 2.5 erfc comes from the all-positive erf series

    erf(x) = 2x/sqrt(pi) * exp(-x^2) * sum_n (2x^2)^n / (1*3*...*(2n+1)),

which has no cancellation. For x >= 2.5 the Laplace continued fraction

    erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))

is evaluated bottom-up at a fixed depth. Negative arguments use
erfc(-x) = 2 - erfc(x).
"""
import math

import numpy as np

_SPLIT = 2.5
_SERIES_TERMS = 80
_CF_DEPTH = 90
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)
_UNDERFLOW = 27.3  # exp(-x^2) underflows beyond this


def _erf_series(x):
    x2 = x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(1, _SERIES_TERMS):
        term = term * (2.0 * x2) / (2 * n + 1)
        total = total + term
    return 2.0 * _INV_SQRT_PI * x * np.exp(-x2) * total


def _erfc_cf(x):
    tail = x.copy()
    for n in range(_CF_DEPTH, 0, -1):
        tail = x + (0.5 * n) / tail
    return _INV_SQRT_PI * np.exp(-x * x) / tail


def erfc(x):
    """Complementary error function of a scalar or array."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise ValueError("erfc argument must not be NaN")
    a = np.abs(arr)
    out = np.empty_like(a)
    small = a < _SPLIT
    big = (~small) & (a < _UNDERFLOW)
    out[small] = 1.0 - _erf_series(a[small])
    out[big] = _erfc_cf(a[big])
    out[a >= _UNDERFLOW] = 0.0
    neg = arr < 0
    out[neg] = 2.0 - out[neg]
    return float(out) if out.ndim == 0 else out
