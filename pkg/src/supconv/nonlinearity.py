"""The convection nonlinearity ``h`` and the scalar transforms built on it.

Four closed-form families are supported, plus piecewise-linear tables::

    linear         h(s) = s
    log_power      h(s) = s * log(e + |s|)**theta
    signed_power   h(s) = s * |s|**theta
    abs_power      h(s) = |s|**(1 + theta)
    tabulated      linear interpolation through (s_i, h_i), end slopes extrapolated

A spec may carry a truncation level ``cap``; the evaluated nonlinearity is
then ``clip(h(s), -cap, cap)``.

Transforms
----------
``H(s) = int_0^s dt / (|h(t)| + 1)`` drives the level-set decay estimate and
``phi(s) = int_0^s dt / (|h(t)| + 1)**2`` is the matching test function.
``int_0^inf ds / (K h(s) + eps)`` decides blow-up of ``-u' = K h(u) + eps``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import DomainError, IndeterminateTail
from .quadrature import integrate_finite, integrate_to_infinity

__all__ = [
    "FAMILIES",
    "NonlinearitySpec",
    "Growth",
    "GrowthVerdict",
    "eval_h",
    "eval_dh",
    "eval_H",
    "eval_phi",
    "phi_sup",
    "classify_growth",
    "truncate_h",
    "blowup_integral",
]

FAMILIES = ("linear", "log_power", "signed_power", "abs_power", "tabulated")
_E = math.e


@dataclass(frozen=True)
class NonlinearitySpec:
    """Immutable description of ``h``.

    Use the named constructors (:meth:`linear`, :meth:`log_power`, ...)
    rather than filling the fields by hand.
    """

    family: str
    theta: float = 0.0
    samples: tuple[tuple[float, float], ...] = field(default=())
    cap: float = math.inf

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.cap > 0:
            raise DomainError("truncation level must be positive")
        if self.family in ("log_power", "signed_power", "abs_power"):
            if not (self.theta > 0 and math.isfinite(self.theta)):
                raise DomainError(f"{self.family} needs a positive finite theta")
        if self.family == "tabulated":
            s = np.array([p[0] for p in self.samples], dtype=float)
            h = np.array([p[1] for p in self.samples], dtype=float)
            if s.size < 2:
                raise DomainError("a tabulated nonlinearity needs at least two samples")
            if np.any(np.diff(s) <= 0):
                raise DomainError("tabulated sample abscissae must be strictly increasing")
            zero = np.flatnonzero(s == 0.0)
            if zero.size != 1 or h[zero[0]] != 0.0:
                raise DomainError("tabulated nonlinearity must contain the sample (0, 0)")
            object.__setattr__(self, "_s", s)
            object.__setattr__(self, "_h", h)
            object.__setattr__(self, "_slopes", np.diff(h) / np.diff(s))

    # -- constructors -------------------------------------------------------
    @classmethod
    def linear(cls) -> NonlinearitySpec:
        return cls("linear")

    @classmethod
    def log_power(cls, theta: float) -> NonlinearitySpec:
        return cls("log_power", float(theta))

    @classmethod
    def signed_power(cls, theta: float) -> NonlinearitySpec:
        return cls("signed_power", float(theta))

    @classmethod
    def abs_power(cls, theta: float) -> NonlinearitySpec:
        return cls("abs_power", float(theta))

    @classmethod
    def tabulated(cls, s, h) -> NonlinearitySpec:
        return cls("tabulated", samples=tuple((float(a), float(b)) for a, b in zip(s, h)))

    # -- evaluation ---------------------------------------------------------
    @property
    def is_truncated(self) -> bool:
        return math.isfinite(self.cap)

    def scalar(self, s: float) -> float:
        """Fast scalar evaluation (used inside quadrature and ODE loops)."""
        fam = self.family
        if fam == "linear":
            v = s
        elif fam == "signed_power":
            v = s * abs(s) ** self.theta
        elif fam == "abs_power":
            v = abs(s) ** (1.0 + self.theta)
        elif fam == "log_power":
            v = s * math.log(_E + abs(s)) ** self.theta
        else:
            v = float(self(np.float64(s)))
            return v
        if v > self.cap:
            return self.cap
        if v < -self.cap:
            return -self.cap
        return v

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        fam = self.family
        if fam == "linear":
            v = s.copy()
        elif fam == "signed_power":
            v = s * np.abs(s) ** self.theta
        elif fam == "abs_power":
            v = np.abs(s) ** (1.0 + self.theta)
        elif fam == "log_power":
            v = s * np.log(_E + np.abs(s)) ** self.theta
        else:
            v = np.interp(s, self._s, self._h)
            lo, hi = self._s[0], self._s[-1]
            v = np.where(s < lo, self._h[0] + self._slopes[0] * (s - lo), v)
            v = np.where(s > hi, self._h[-1] + self._slopes[-1] * (s - hi), v)
        if self.is_truncated:
            v = np.clip(v, -self.cap, self.cap)
        return v

    def derivative(self, s):
        """``h'(s)``, zero wherever the truncation is active."""
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        fam = self.family
        if fam == "linear":
            d = np.ones_like(s)
        elif fam == "signed_power":
            d = (1.0 + self.theta) * a ** self.theta
        elif fam == "abs_power":
            d = (1.0 + self.theta) * a ** self.theta * np.sign(s)
        elif fam == "log_power":
            L = np.log(_E + a)
            d = L ** self.theta + self.theta * a * L ** (self.theta - 1.0) / (_E + a)
        else:
            idx = np.clip(np.searchsorted(self._s, s, side="right") - 1, 0, len(self._slopes) - 1)
            d = self._slopes[idx]
        if self.is_truncated:
            raw = replace(self, cap=math.inf)(s)
            d = np.where(np.abs(raw) > self.cap, 0.0, d)
        return d

    def lipschitz(self, M: float) -> float:
        """Local Lipschitz bound of ``h`` on ``[-M, M]``."""
        if M < 0:
            raise ValueError("window half-width must be nonnegative")
        fam = self.family
        if fam == "linear":
            return 1.0
        if fam in ("signed_power", "abs_power"):
            return (1.0 + self.theta) * M ** self.theta
        if fam == "log_power":
            return float(replace(self, cap=math.inf).derivative(M))
        lo = np.searchsorted(self._s, -M, side="right") - 1
        hi = np.searchsorted(self._s, M, side="left")
        seg = self._slopes[max(lo, 0):min(hi, len(self._slopes))]
        if lo < 0:
            seg = np.append(seg, self._slopes[0])
        if hi >= len(self._s):
            seg = np.append(seg, self._slopes[-1])
        return float(np.max(np.abs(seg))) if seg.size else float(abs(self._slopes[-1]))

    def kinks(self) -> list[float]:
        return list(self._s) if self.family == "tabulated" else []

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family}
        if self.family in ("log_power", "signed_power", "abs_power"):
            out["theta"] = self.theta
        if self.family == "tabulated":
            out["samples"] = [list(p) for p in self.samples]
        if self.is_truncated:
            out["cap"] = self.cap
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NonlinearitySpec:
        try:
            family = data["family"]
        except (KeyError, TypeError):
            raise ValueError("nonlinearity block needs a 'family' key") from None
        return cls(
            family,
            float(data.get("theta", 0.0)),
            tuple((float(a), float(b)) for a, b in data.get("samples", ())),
            float(data.get("cap", math.inf)),
        )


class Growth(enum.Enum):
    DIVERGENT = "divergent"
    CONVERGENT = "convergent"


@dataclass(frozen=True)
class GrowthVerdict:
    """Whether ``|H(s)|`` diverges as ``|s| -> inf``; limits when it does not."""

    kind: Growth
    limit_plus: float = math.inf
    limit_minus: float = -math.inf

    @property
    def divergent(self) -> bool:
        return self.kind is Growth.DIVERGENT


def eval_h(spec: NonlinearitySpec, s):
    return spec.scalar(float(s)) if np.isscalar(s) else spec(s)


def eval_dh(spec: NonlinearitySpec, s):
    return spec.derivative(s)


def _has_integrable_tail(spec: NonlinearitySpec) -> bool:
    """True when ``int^inf ds / |h(s)|`` converges (so ``H`` has finite limits)."""
    if spec.is_truncated or spec.family in ("linear", "tabulated"):
        return False
    if spec.family == "log_power":
        return spec.theta > 1.0
    return True


def _power_tail_integral(spec, K, eps, tol):
    p = 1.0 + spec.theta
    # remainder of the alternating expansion 1/(a+eps) = 1/a - eps/a^2 + ...
    X = max(1.0, (2.0 * eps / K) ** (1.0 / p),
            (4.0 * eps**2 / (K**3 * (3 * p - 1) * tol)) ** (1.0 / (3 * p - 1)))
    tail = (X ** (1 - p) / (K * (p - 1))
            - eps * X ** (1 - 2 * p) / (K**2 * (2 * p - 1))
            + eps**2 * X ** (1 - 3 * p) / (K**3 * (3 * p - 1)))
    head = integrate_finite(lambda s: 1.0 / (K * spec.scalar(s) + eps), X, tol / 2)
    return head + tail


def _log_tail_integral(spec, K, eps, tol):
    th = spec.theta
    X = 1e12
    while True:
        lx = math.log(X)
        err = (th * _E / K + eps / K**2) / (X * lx**th)
        if err <= tol / 2:
            break
        X *= 1e6
        if X > 1e290:
            raise IndeterminateTail(
                f"log-power tail bound {err:.3g} exceeds tol {tol:.3g} at every cutoff"
            )
    tail = lx ** (1.0 - th) / (K * (th - 1.0))
    if not math.isfinite(tail):
        raise IndeterminateTail("log-power tail overflows; theta too close to 1")
    head = integrate_finite(lambda s: 1.0 / (K * abs(spec.scalar(s)) + eps), X, tol / 2)
    return head + tail - err / 2


def _improper(spec, K, eps, tol):
    """``int_0^inf ds / (K |h(s)| + eps)`` for families with integrable tails."""
    if spec.family == "log_power":
        return _log_tail_integral(spec, K, eps, tol)
    return _power_tail_integral(spec, K, eps, tol)


def eval_H(spec: NonlinearitySpec, s: float, tol: float = 1e-10) -> float:
    """``H(s) = int_0^s dt / (|h(t)| + 1)``; ``s = +-inf`` gives the limits."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if math.isinf(s):
        verdict = classify_growth(spec, tol)
        return verdict.limit_plus if s > 0 else verdict.limit_minus
    return integrate_finite(lambda t: 1.0 / (abs(spec.scalar(t)) + 1.0), float(s), tol,
                            spec.kinks())


def eval_phi(spec: NonlinearitySpec, s: float, tol: float = 1e-10) -> float:
    """``phi(s) = int_0^s dt / (|h(t)| + 1)**2``; ``s = +-inf`` gives the limits."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    fun = lambda t: 1.0 / (abs(spec.scalar(t)) + 1.0) ** 2  # noqa: E731
    if math.isinf(s):
        if spec.is_truncated:
            return math.copysign(math.inf, s)
        if s > 0:
            return integrate_to_infinity(fun, tol)
        return -integrate_to_infinity(lambda t: fun(-t), tol)
    return integrate_finite(fun, float(s), tol, spec.kinks())


def phi_sup(spec: NonlinearitySpec, tol: float = 1e-10) -> float:
    """``sup |phi|``, the constant bounding the test function in the decay estimate."""
    return max(eval_phi(spec, math.inf, tol), -eval_phi(spec, -math.inf, tol))


def classify_growth(spec: NonlinearitySpec, tol: float = 1e-10) -> GrowthVerdict:
    if not _has_integrable_tail(spec):
        return GrowthVerdict(Growth.DIVERGENT)
    # |h| is even for every family with an integrable tail
    lim = _improper(spec, 1.0, 1.0, tol)
    return GrowthVerdict(Growth.CONVERGENT, lim, -lim)


def truncate_h(spec: NonlinearitySpec, n: float) -> NonlinearitySpec:
    """The nonlinearity ``T_n(h(s))``; composing truncations keeps the lowest level."""
    if not n > 0:
        raise DomainError("truncation level must be positive")
    return replace(spec, cap=min(spec.cap, float(n)))


def blowup_integral(spec: NonlinearitySpec, K: float, eps: float, tol: float = 1e-10) -> float:
    """``int_0^inf ds / (K h(s) + eps)``, or ``math.inf`` when divergence is certified."""
    if not (K > 0 and eps > 0):
        raise DomainError("K and eps must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.family == "tabulated":
        pos = [h for s, h in spec.samples if s >= 0]
        if min(pos) < 0 or spec._slopes[-1] < 0:
            raise DomainError("blow-up integral needs h >= 0 on s >= 0")
    if not _has_integrable_tail(spec):
        return math.inf
    return _improper(spec, K, eps, tol)
