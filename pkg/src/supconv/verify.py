"""A-priori checks on computed solutions.

Every check returns a small report object that is truthy when the check
passes.  Failures are information about the run, never exceptions.

check_decay
    Level-set decay ``|{|u| > k}|^(2/2*) <= C / H(k)^2 * int(|E|^2 + |f|)``
    with ``C = (2 S^2 / alpha) max(1/(2 alpha), C1)`` and ``C1 = sup |phi|``.
check_L1
    ``||u||_1 <= ||f||_1 / mu`` for problems with a zeroth-order term.
check_comparison
    Ordered data give ordered solutions.
check_nonexistence_necessary
    The integral test on the unit ball with inward unit drift: a solution
    can only exist if ``int f (1 - |x|^2)`` stays below an explicit constant.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .mesh import ScalarField, VectorField, critical_exponents, levelset_measure, sobolev_constant
from .nonlinearity import NonlinearitySpec, eval_H, phi_sup

__all__ = [
    "DecayReport",
    "L1Report",
    "ComparisonReport",
    "NecessaryConditionReport",
    "check_decay",
    "check_L1",
    "check_comparison",
    "check_nonexistence_necessary",
    "decay_grid",
    "sphere_area",
]


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


@dataclass
class DecayReport:
    ks: np.ndarray
    measured: np.ndarray
    bounds: np.ndarray
    C: float
    C1: float
    sobolev: float
    alpha: float
    data_integral: float
    passed: bool
    worst_ratio: float
    best_C: float
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "check": "decay",
            "passed": self.passed,
            "C": self.C,
            "C1": self.C1,
            "sobolev": self.sobolev,
            "alpha": self.alpha,
            "data_integral": self.data_integral,
            "worst_ratio": self.worst_ratio,
            "best_C": self.best_C,
            "k": self.ks.tolist(),
            "measured": self.measured.tolist(),
            "bound": [_jsonable(float(b)) for b in self.bounds],
            "notes": self.notes,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,measured,bound\n")
        for k, m, b in zip(self.ks, self.measured, self.bounds):
            buf.write(f"{k:.17g},{m:.17g},{b:.17g}\n")
        return buf.getvalue()


@dataclass
class L1Report:
    lhs: float
    rhs: float
    slack: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"check": "L1", "passed": self.passed, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack}


@dataclass
class ComparisonReport:
    max_violation: float
    tol: float
    passed: bool
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"check": "comparison", "passed": self.passed, "max_violation": self.max_violation,
                "tol": self.tol, "notes": self.notes}


@dataclass
class NecessaryConditionReport:
    lhs: float
    rhs: float
    constant: float
    holds: bool

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"check": "nonexistence_necessary", "passed": self.holds, "lhs": self.lhs,
                "rhs": self.rhs, "constant": self.constant}


def decay_grid(u: ScalarField, count: int = 20) -> np.ndarray:
    """``count`` log-spaced levels from ``1e-3 ||u||_inf`` to ``||u||_inf``."""
    top = float(np.max(np.abs(u.values), initial=0.0))
    if top == 0.0:
        top = 1.0
    return np.geomspace(1e-3 * top, top, count)


def _data_integral(E: VectorField, f: ScalarField) -> float:
    mag = E.cell_magnitude()
    return float(np.sum(mag ** 2) * E.grid.cell_measure + np.sum(np.abs(f.values)) * f.grid.cell_measure)


def check_decay(
    u: ScalarField,
    spec: NonlinearitySpec,
    E: VectorField,
    f: ScalarField,
    analysis_dim: int = 3,
    alpha: float = 1.0,
    sobolev: float | None = None,
    ks=None,
    tol: float = 1e-10,
) -> DecayReport:
    """Compare level-set measures of ``u`` with the decay bound on a k-grid.

    ``H(k)`` is taken as ``min(|H(k)|, |H(-k)|)`` so the same bound covers
    both signs when ``h`` is not odd.
    """
    if not alpha > 0:
        raise DomainError("alpha must be positive")
    two_star, _ = critical_exponents(analysis_dim)
    S = sobolev_constant(analysis_dim, sobolev)
    C1 = phi_sup(spec, tol)
    C = (2.0 * S ** 2 / alpha) * max(1.0 / (2.0 * alpha), C1)
    data = _data_integral(E, f)
    ks = decay_grid(u) if ks is None else np.asarray(ks, dtype=float)
    measured = np.array([levelset_measure(u, k) ** (2.0 / two_star) for k in ks])
    Hk = np.array([min(abs(eval_H(spec, k, tol)), abs(eval_H(spec, -k, tol))) for k in ks])
    with np.errstate(divide="ignore"):
        bounds = np.where(Hk > 0, C * data / Hk ** 2, np.inf)
    active = Hk > 0
    ratios = np.zeros_like(measured)
    np.divide(measured, bounds, out=ratios, where=active & (bounds > 0))
    ratios[active & (bounds == 0) & (measured > 0)] = np.inf
    worst = float(ratios.max(initial=0.0))
    best_C = float(np.max(measured * Hk ** 2, initial=0.0) / data) if data > 0 else 0.0
    notes = [f"C assembled from the proof chain with S = {S:.12g} (analysis N = {analysis_dim})"]
    return DecayReport(ks, measured, bounds, C, C1, S, alpha, data, worst <= 1.0, worst, best_C, notes)


def check_L1(u: ScalarField, f: ScalarField, mu: float, slack: float | None = None) -> L1Report:
    """``||u||_1 <= (1 + slack) ||f||_1 / mu``; ``slack`` defaults to ``10 * max(h)``."""
    if not mu > 0:
        raise DomainError("the L1 bound needs mu > 0")
    if u.grid != f.grid:
        raise ValueError("fields live on different grids")
    if slack is None:
        slack = 10.0 * max(u.grid.spacing)
    w = u.grid.cell_measure
    lhs = float(np.sum(np.abs(u.values)) * w)
    rhs = float(np.sum(np.abs(f.values)) * w / mu)
    return L1Report(lhs, rhs, slack, lhs <= (1.0 + slack) * rhs)


def check_comparison(u1: ScalarField, u2: ScalarField, tol: float = 1e-9) -> ComparisonReport:
    """Whether ``u1 <= u2 + tol`` at every node."""
    if u1.grid != u2.grid:
        raise ValueError("fields live on different grids")
    gap = float(np.max(u1.values - u2.values, initial=-math.inf))
    notes = ["integrability hypotheses on |u|^theta |E| are checked only as finiteness"]
    finite = bool(np.all(np.isfinite(u1.values)) and np.all(np.isfinite(u2.values)))
    return ComparisonReport(max(gap, 0.0), tol, finite and gap <= tol, notes)


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere in ``R^N``."""
    return float(2.0 * math.exp(0.5 * N * math.log(math.pi) - gammaln(0.5 * N)))


def check_nonexistence_necessary(f: ScalarField, theta: float, N: int, mu: float = 1.0) -> NecessaryConditionReport:
    """Necessary condition for a solution on the unit ball with ``E = -x/|x|``.

    ``f`` is a radial profile sampled on an interval grid over ``(0, 1)``.
    Testing with ``v = 1 - |x|^2`` and applying Young's inequality with
    weight 1 gives

        int f v  <=  c^((t+1)/t) (t+1)^(-1/t) t/(t+1) * |S^(N-1)| t / (N t - 1)

    with ``t = theta`` and ``c = mu + 2N = sup(mu v - Laplacian v)``.
    """
    if not theta > 1.0 / N:
        raise DomainError("the necessary condition needs theta > 1/N")
    grid = f.grid
    if grid.dim != 1 or tuple(grid.bounds[0]) != (0.0, 1.0):
        raise DomainError("f must be sampled on an interval grid over (0, 1)")
    if np.any(f.values < 0):
        raise DomainError("the necessary condition assumes f >= 0")
    area = sphere_area(N)
    r = grid.coords()[0]
    lhs = float(area * np.sum(f.values * (1.0 - r ** 2) * r ** (N - 1)) * grid.cell_measure)
    c = mu + 2.0 * N
    t = theta
    constant = c ** ((t + 1.0) / t) * (t + 1.0) ** (-1.0 / t) * t / (t + 1.0)
    rhs = constant * area * t / (N * t - 1.0)
    return NecessaryConditionReport(lhs, rhs, constant, lhs <= rhs)
