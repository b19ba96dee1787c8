"""Radially symmetric problems on a ball with constant inward drift.

With ``E = -K x/|x|`` and ``f = eps / ((N-1)|x|)`` on ``B_R``, positive
solutions are ``u(x) = ubar(|x|)`` where

    -ubar'(r) = K h(ubar(r)) + eps,    ubar(R) = 0.

Separating variables, a bounded profile exists exactly when
``int_0^inf ds / (K h(s) + eps) > R``, and its central value ``a`` solves
``int_0^a ds / (K h(s) + eps) = R``.

Setting ``absorption=True`` flips the sign of the drift term, giving
``-ubar' = eps - K h(ubar)``. That profile exists for every ``K, eps, R``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, RootBracketFailure
from .nonlinearity import NonlinearitySpec, blowup_integral
from .quadrature import integrate_finite

__all__ = [
    "RadialProblem",
    "RadialSolution",
    "Existence",
    "existence_verdict",
    "central_value",
    "solve_radial",
    "rk4_profile",
    "analytic_tan",
    "analytic_tanh",
    "blowup_time",
]

OVERFLOW_CAP = 1e12


class Existence(enum.Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not_exists"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class RadialProblem:
    K: float
    eps: float
    R: float
    spec: NonlinearitySpec
    N: int = 3
    absorption: bool = False

    def __post_init__(self):
        if not (self.K > 0 and self.eps > 0 and self.R > 0):
            raise DomainError("K, eps and R must be positive")
        if int(self.N) != self.N or self.N <= 2:
            raise DomainError("the ambient dimension N must be an integer > 2")

    def rhs(self, u: float) -> float:
        """``-ubar'`` as a function of ``ubar``."""
        hu = self.spec.scalar(u)
        return self.eps - self.K * hu if self.absorption else self.K * hu + self.eps


@dataclass
class RadialSolution:
    a: float
    nodes: np.ndarray
    values: np.ndarray

    def sup_error(self, exact) -> float:
        return float(np.max(np.abs(self.values - exact(self.nodes))))


def existence_verdict(p: RadialProblem, tol: float = 1e-10) -> Existence:
    if tol <= 0:
        raise ValueError("tol must be positive")
    if p.absorption:
        return Existence.EXISTS
    integral = blowup_integral(p.spec, p.K, p.eps, tol / 10)
    if integral > p.R + tol:
        return Existence.EXISTS
    if integral < p.R - tol:
        return Existence.NOT_EXISTS
    return Existence.BOUNDARY


def _absorption_ceiling(p: RadialProblem) -> float:
    # the level s0 with K h(s0) = eps, where the absorption profile saturates
    g = lambda s: p.K * p.spec.scalar(s) - p.eps  # noqa: E731
    hi = 1.0
    while g(hi) <= 0:
        hi *= 2.0
        if hi > 1e300:
            raise RootBracketFailure("K h(s) never reaches eps; absorption profile unbounded")
    return optimize.brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def central_value(p: RadialProblem, tol: float = 1e-12) -> float:
    """Root ``a`` of ``int_0^a ds / (-ubar') = R`` found on a monotone bracket."""
    qtol = tol / 10
    F = lambda a: integrate_finite(lambda s: 1.0 / p.rhs(s), a, qtol) - p.R  # noqa: E731
    if p.absorption:
        s0 = _absorption_ceiling(p)
        gap = 0.5
        hi = s0 * (1.0 - gap)
        while F(hi) <= 0:
            gap *= 0.5
            hi = s0 * (1.0 - gap)
            if gap < 1e-15:
                raise RootBracketFailure("central value indistinguishable from the saturation level")
    else:
        hi = 1.0
        while F(hi) <= 0:
            hi *= 2.0
            if hi > 1e300:
                raise RootBracketFailure(
                    "no central value below the overflow cap; the existence verdict is inconsistent"
                )
    a = optimize.brentq(F, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(F(a)) > tol:
        raise RootBracketFailure(f"residual {F(a):.3g} above tol at the bracketed root")
    return a


def rk4_profile(p: RadialProblem, M: int) -> tuple[np.ndarray, np.ndarray]:
    """Classical RK4 on ``M`` uniform steps from ``r = R`` (value 0) down to ``r = 0``."""
    if M < 1:
        raise ValueError("need at least one step")
    h = p.R / M
    f = p.rhs
    u = 0.0
    values = np.empty(M + 1)
    values[M] = 0.0
    # du/dr = -f(u); stepping in -r turns this into du/ds = +f(u)
    for i in range(M - 1, -1, -1):
        k1 = f(u)
        k2 = f(u + 0.5 * h * k1)
        k3 = f(u + 0.5 * h * k2)
        k4 = f(u + h * k3)
        u = u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        values[i] = u
    return np.linspace(0.0, p.R, M + 1), values


def solve_radial(p: RadialProblem, M: int = 10_000, tol: float = 1e-12) -> RadialSolution:
    """Radial profile on ``M + 1`` uniform nodes plus the bisected central value."""
    verdict = existence_verdict(p)
    if verdict is not Existence.EXISTS:
        raise DomainError(f"no bounded radial profile: verdict is {verdict.value}")
    a = central_value(p, tol)
    nodes, values = rk4_profile(p, M)
    return RadialSolution(a, nodes, values)


def analytic_tan(K: float, eps: float, R: float, r):
    """Closed-form profile for ``h(s) = s**2`` in the reaction case."""
    w = math.sqrt(K * eps)
    if w * R >= math.pi / 2:
        raise DomainError("sqrt(K eps) R must stay below pi/2 for a bounded profile")
    r = np.asarray(r, dtype=float)
    out = math.sqrt(eps / K) * np.tan(w * (R - r))
    return float(out) if out.ndim == 0 else out


def analytic_tanh(K: float, eps: float, R: float, r):
    """Closed-form profile for ``h(s) = s**2`` in the absorption case."""
    w = math.sqrt(K * eps)
    r = np.asarray(r, dtype=float)
    out = math.sqrt(eps / K) * np.tanh(w * (R - r))
    return float(out) if out.ndim == 0 else out


def blowup_time(
    spec: NonlinearitySpec,
    K: float,
    eps: float,
    R: float,
    tol: float = 1e-10,
    chase: bool = False,
    steps: int = 100_000,
) -> float | None:
    """Radius ``r* in [0, R)`` where the backward profile blows up, or ``None``.

    By default ``r* = R - int_0^inf ds / (K h + eps)``.  With ``chase=True``
    the ODE is stepped with RK4 until the value passes ``OVERFLOW_CAP``
    instead; that mode is for debugging the integral route.
    """
    if not (K > 0 and eps > 0 and R > 0):
        raise DomainError("K, eps and R must be positive")
    if chase:
        h = R / steps
        f = lambda u: K * spec.scalar(u) + eps  # noqa: E731
        u = 0.0
        for i in range(steps):
            k1 = f(u)
            k2 = f(u + 0.5 * h * k1)
            k3 = f(u + 0.5 * h * k2)
            k4 = f(u + h * k3)
            u = u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            if not math.isfinite(u) or u > OVERFLOW_CAP:
                return R - (i + 1) * h
        return None
    integral = blowup_integral(spec, K, eps, tol)
    if integral < R:
        return R - integral
    return None
