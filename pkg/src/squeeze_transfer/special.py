"""Special functions used by the closed-form QFI and the displaced-squeezed expansion."""
from __future__ import annotations

import math

import mpmath as mp

from .errors import ArgumentError, NumericalError


def gamma_fn(x):
    """Euler gamma; raises :class:`ArgumentError` at the poles 0, -1, -2, ..."""
    if isinstance(x, (int, float)) and x <= 0 and float(x).is_integer():
        raise ArgumentError(f"gamma has a pole at {x}")
    if isinstance(x, mp.mpf) and x <= 0 and mp.isint(x):
        raise ArgumentError(f"gamma has a pole at {x}")
    if isinstance(x, mp.mpf):
        return mp.gamma(x)
    return math.gamma(x)


def log_gamma(x: float) -> float:
    if x <= 0 and float(x).is_integer():
        raise ArgumentError(f"gamma has a pole at {x}")
    return math.lgamma(x)


def hermite(n: int, x):
    """Physicists' Hermite polynomial ``H_n(x)`` by the three-term recurrence.

    Works for real or complex ``x``; exact for integer ``x`` in Python ints.
    """
    if n < 0:
        raise ArgumentError("Hermite degree must be non-negative")
    h_prev, h = 1, 2 * x
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2 * x * h - 2 * k * h_prev
    return h


def _series_2f1_regularized(a, b, c, z, eps, max_terms):
    # term_{k+1} / term_k = (a+k)(b+k) z / ((c+k)(k+1)); term_0 = 1/Gamma(c)
    term = mp.rgamma(c)
    total = term
    k = 0
    ratio = a * b * z / c
    while term != 0:
        term *= ratio
        total += term
        k += 1
        ratio = (a + k) * (b + k) * z / ((c + k) * (k + 1))
        # past the peak the tail is bounded by a geometric series
        q = max(abs(ratio), abs(z))
        if q < 1 and abs(term) * q <= eps * abs(total) * (1 - q):
            break
        if k >= max_terms:
            raise NumericalError(f"2F1 series did not converge in {max_terms} terms (z={z})")
    return total


def hyp2f1_regularized(a, b, c, z, *, tol: float = 1e-15, dps: int | None = None,
                       max_dps: int = 480, max_terms: int = 2_000_000):
    """Regularized Gauss hypergeometric ``2F1(a, b; c; z) / Gamma(c)`` for ``0 <= z < 1``.

    With ``dps`` given the power series is summed once at that working
    precision (decimal digits). Otherwise the precision is doubled until two
    consecutive evaluations agree to ``tol`` relative. Returns an
    ``mpmath.mpf``.
    """
    if not 0 <= z < 1:
        raise ArgumentError(f"series evaluation requires 0 <= z < 1, got z={z}")
    if dps is not None:
        with mp.workdps(dps):
            return +_series_2f1_regularized(mp.mpf(a), mp.mpf(b), mp.mpf(c), mp.mpf(z),
                                            mp.mpf(10) ** (-dps + 5), max_terms)
    work = max(30, int(-math.log10(tol)) + 15)
    prev = None
    while work <= max_dps:
        with mp.workdps(work):
            val = _series_2f1_regularized(mp.mpf(a), mp.mpf(b), mp.mpf(c), mp.mpf(z),
                                          mp.mpf(10) ** (-work + 5), max_terms)
        if prev is not None:
            scale = max(abs(val), mp.mpf(10) ** (-work))
            if abs(val - prev) <= tol * scale:
                return val
        prev = val
        work *= 2
    raise NumericalError(f"2F1({a},{b};{c};{z}) not stable to {tol} within {max_dps} digits")
