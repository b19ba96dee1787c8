"""Adaptive quadrature helpers.

Finite intervals are cut at geometric breakpoints (1, 10, 100, ...) so the
integrands in this package, which are O(1) near the origin and decay
algebraically, look smooth on every piece.  Each piece is handed to the
QUADPACK adaptive Gauss-Kronrod routine with an absolute error budget.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import QuadratureFailure

__all__ = ["integrate_finite", "integrate_to_infinity", "geometric_breaks"]

SUBDIVISION_CAP = 400
# QUADPACK adds a 50 eps roundoff term per subinterval, so estimates below
# this multiple of eps * |value| carry no information about truncation error
ROUNDOFF_FLOOR = 1000.0 * np.finfo(float).eps


def geometric_breaks(b: float) -> list[float]:
    """Breakpoints 0, 1, 10, 100, ... up to ``b`` (inclusive), for ``b >= 0``."""
    pts = [0.0]
    edge = 1.0
    while edge < b:
        pts.append(edge)
        edge *= 10.0
    pts.append(float(b))
    return pts


def _quad_piece(fun, a, b, tol, points):
    inner = [p for p in points if a < p < b] if points else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(
            fun, a, b, epsabs=tol, epsrel=0.0, limit=SUBDIVISION_CAP,
            points=inner or None, full_output=1,
        )[:3]
    if err > tol and err > ROUNDOFF_FLOOR * abs(val):
        raise QuadratureFailure(
            f"quadrature on [{a:g}, {b:g}] stalled at error {err:.3g} > {tol:.3g} "
            f"after {info['last']} subintervals"
        )
    return val, err


def integrate_finite(
    fun: Callable[[float], float],
    b: float,
    tol: float,
    points: Sequence[float] | None = None,
) -> float:
    """Integral of ``fun`` over ``[0, b]`` with absolute error at most ``tol``.

    ``b`` may be negative, in which case the oriented integral is returned.
    ``points`` lists known kinks of the integrand.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if b == 0:
        return 0.0
    if b < 0:
        return -integrate_finite(lambda t: fun(-t), -b, tol,
                                 [-p for p in points] if points else None)
    breaks = geometric_breaks(b)
    budget = tol / (len(breaks) - 1)
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        total += _quad_piece(fun, lo, hi, budget, points)[0]
    return total


def integrate_to_infinity(fun: Callable[[float], float], tol: float) -> float:
    """Integral of ``fun`` over ``[0, inf)`` through the map ``s = t / (1 - t)``.

    Suitable for integrands decaying at least like ``1/s**2``; slower tails
    need the family-specific tail handling of :mod:`supconv.nonlinearity`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def mapped(t):
        if t >= 1.0:
            return 0.0
        one_minus = 1.0 - t
        val = fun(t / one_minus) / (one_minus * one_minus)
        return val if math.isfinite(val) else 0.0

    # the images of s = 1, 10, 100, ... keep each piece well resolved
    cuts = [0.0] + [s / (1.0 + s) for s in (1.0, 10.0, 100.0, 1e3, 1e4, 1e6)] + [1.0]
    budget = tol / (len(cuts) - 1)
    return float(np.sum([_quad_piece(mapped, lo, hi, budget, None)[0]
                         for lo, hi in zip(cuts[:-1], cuts[1:])]))
