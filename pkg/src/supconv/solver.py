"""Nonlinear Dirichlet solves for ``-div(M grad u) + mu u = -div(h(u) E) + f``.

Two schemes are provided.

``solve``
    Picard iteration with frozen nonlinearity on truncated data
    ``(T_n h, T_n E, T_n f)``, repeated along a ladder of truncation levels
    and warm-started from the previous level.  A run counts as solved when
    the last level converges, its clamp is never active, and it agrees with
    the level before it.

``fixed_point_solve``
    The untruncated map ``v -> S(v) = w`` with
    ``-div(M grad w) = -div(v|v|^theta E) + f``, for power nonlinearities.
    It comes with a certificate: the discrete ``L^{m**}`` ball of radius
    ``R* = (delta (theta + 1))^(-1/theta)`` is invariant whenever the data
    pass the smallness test.

Each linear solve reuses a single sparse LU factorization of the
diffusion operator, because only the right-hand side changes between
iterations.
"""

from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .errors import CertificateNotSatisfied, DomainError, InvariantBallViolation, LinearSolveFailure
from .mesh import (
    Grid,
    MatrixField,
    ScalarField,
    VectorField,
    assemble_diffusion,
    convection_matrix,
    critical_exponents,
    lebesgue_norm,
    sobolev_constant,
)
from .nonlinearity import NonlinearitySpec, classify_growth, truncate_h

__all__ = [
    "ProblemSpec",
    "SolverConfig",
    "Verdict",
    "PicardHistory",
    "SolveReport",
    "SmallnessCertificate",
    "m_doublestar",
    "compatibility_check",
    "smallness_certificate",
    "invariant_ball",
    "solve_linearized",
    "picard_solve",
    "solve",
    "fixed_point_solve",
]

log = logging.getLogger(__name__)

LINEAR_RESIDUAL = 1e-10
BALL_SLACK = 1e-9


@dataclass
class ProblemSpec:
    """Data of the Dirichlet problem on a uniform grid.

    ``analysis_dim`` is the dimension N entering the Sobolev exponents and
    constants.  It is independent of the grid dimension so that 1D and 2D
    runs can be checked against estimates stated for N >= 3.  ``m`` and
    ``r`` are the declared summability exponents of ``f`` and ``E``.
    """

    grid: Grid
    M: MatrixField
    E: VectorField
    f: ScalarField
    spec: NonlinearitySpec
    mu: float = 0.0
    analysis_dim: int = 3
    m: float | None = None
    r: float | None = None
    sobolev: float | None = None
    scheme: str = "upwind"

    def __post_init__(self):
        if not (self.M.grid == self.E.grid == self.f.grid == self.grid):
            raise ValueError("all coefficient fields must live on the problem grid")
        if self.mu < 0:
            raise DomainError("mu must be nonnegative")
        if int(self.analysis_dim) != self.analysis_dim or self.analysis_dim < 3:
            raise DomainError("analysis dimension must be an integer >= 3")

    @property
    def sobolev_value(self) -> float:
        return sobolev_constant(self.analysis_dim, self.sobolev)

    def constants(self) -> dict:
        two_star, two_lower = critical_exponents(self.analysis_dim)
        return {
            "sobolev": self.sobolev_value,
            "sobolev_source": "override" if self.sobolev is not None else "talenti",
            "alpha": self.M.alpha,
            "beta": self.M.beta,
            "analysis_dim": self.analysis_dim,
            "grid_dim": self.grid.dim,
            "two_star": two_star,
            "two_lower_star": two_lower,
            "mu": self.mu,
            "scheme": self.scheme,
        }


@dataclass
class SolverConfig:
    ladder: tuple[float, ...] = (1e1, 1e2, 1e3, 1e4)
    tol: float = 1e-10
    max_iter: int = 500
    damping: float = 1.0
    norm_cap: float = 1e8
    min_damping: float = 1.0 / 64

    def __post_init__(self):
        self.ladder = tuple(float(n) for n in self.ladder)
        if not self.ladder or any(n <= 0 for n in self.ladder):
            raise ValueError("truncation ladder needs positive levels")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError("truncation ladder must be strictly increasing")
        if not (self.tol > 0 and self.norm_cap > 0):
            raise ValueError("tolerances must be positive")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def to_dict(self) -> dict:
        return {
            "ladder": list(self.ladder),
            "tol": self.tol,
            "max_iter": self.max_iter,
            "damping": self.damping,
            "norm_cap": self.norm_cap,
            "min_damping": self.min_damping,
        }


class Verdict(enum.Enum):
    SOLVED = "solved"
    NONEXISTENCE_SUSPECTED = "nonexistence_suspected"
    NOT_CONVERGED = "not_converged"


@dataclass
class PicardHistory:
    level: float
    residuals: list[float] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    dampings: list[float] = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    clamp_active: bool = False

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    def to_dict(self) -> dict:
        return {
            "level": self.level if math.isfinite(self.level) else "inf",
            "iterations": self.iterations,
            "converged": self.converged,
            "diverged": self.diverged,
            "clamp_active": self.clamp_active,
            "residuals": self.residuals,
            "norms": self.norms,
            "dampings": self.dampings,
        }


@dataclass
class SmallnessCertificate:
    theta: float
    m: float
    r: float
    m_ss: float
    delta: float
    K: float
    radius: float
    K_delta: float
    satisfied: bool
    product: float
    product_bound: float
    sobolev: float
    alpha: float

    def to_dict(self) -> dict:
        out = {k: (v if not (isinstance(v, float) and math.isinf(v)) else "inf")
               for k, v in self.__dict__.items()}
        out["norms"] = "discrete grid norms stand in for the continuum L^m, L^r, L^m** norms"
        return out


@dataclass
class SolveReport:
    verdict: Verdict
    field: ScalarField
    levels: list[PicardHistory]
    level_diffs: list[float]
    constants: dict
    cap_fired: str | None = None
    certificate: SmallnessCertificate | None = None
    ball_norms: list[float] = field(default_factory=list)
    ball_violations: list[int] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.verdict is Verdict.SOLVED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "cap_fired": self.cap_fired,
            "levels": [h.to_dict() for h in self.levels],
            "level_diffs": self.level_diffs,
            "constants": self.constants,
            "certificate": self.certificate.to_dict() if self.certificate else None,
            "ball_norms": self.ball_norms,
            "ball_violations": self.ball_violations,
            "notes": self.notes,
            "sup_norm": float(np.max(np.abs(self.field.values), initial=0.0)),
        }


# -- exponent bookkeeping -----------------------------------------------------

def m_doublestar(m: float, N: int) -> float:
    """``m** = m N / (N - 2m)`` for ``2N/(N+2) <= m < N/2``."""
    lo = 2.0 * N / (N + 2)
    if not (lo - 1e-12 <= m < N / 2.0):
        raise DomainError(f"m = {m} outside [{lo:g}, {N / 2:g})")
    return m * N / (N - 2.0 * m)


def compatibility_check(theta: float, m: float, r: float, N: int) -> bool:
    """Whether ``0 < 1/N - 1/r == theta / m**`` (to 1e-12)."""
    if min(theta, m, r, N) <= 0:
        return False
    try:
        mss = m_doublestar(m, N)
    except DomainError:
        return False
    gap = 1.0 / N - 1.0 / r
    return gap > 0 and abs(gap - theta / mss) <= 1e-12


def invariant_ball(delta: float, theta: float) -> tuple[float, float]:
    """Radius ``R*`` and data threshold ``K_delta`` of the invariant ball.

    ``R* = (delta (theta + 1))^(-1/theta)`` maximizes ``R - delta R^(1+theta)``
    and ``K_delta = R* theta / (theta + 1)`` is that maximum, so the map
    ``v -> K + delta ||v||^(1+theta)`` sends the ball of radius ``R*`` into
    itself whenever ``K <= K_delta``.
    """
    if not (delta >= 0 and theta > 0):
        raise DomainError("need delta >= 0 and theta > 0")
    if delta == 0.0:
        return math.inf, math.inf
    radius = (delta * (theta + 1.0)) ** (-1.0 / theta)
    return radius, radius * theta / (theta + 1.0)


def smallness_certificate(p: ProblemSpec, theta: float) -> SmallnessCertificate:
    if p.m is None or p.r is None:
        raise DomainError("the problem must declare exponents m and r")
    N = p.analysis_dim
    if not compatibility_check(theta, p.m, p.r, N):
        raise DomainError(f"exponents theta={theta}, m={p.m}, r={p.r} violate 1/N - 1/r = theta/m**")
    mss = m_doublestar(p.m, N)
    two_star, _ = critical_exponents(N)
    S, alpha = p.sobolev_value, p.M.alpha
    fnorm = lebesgue_norm(p.f, p.m)
    Enorm = lebesgue_norm(p.E, p.r)
    c = S * mss / (alpha * two_star)
    delta = c * Enorm
    K = S * c * fnorm
    radius, K_delta = invariant_ball(delta, theta)
    bound = (theta / S) * (alpha * two_star / (S * mss * (1.0 + theta))) ** (1.0 + 1.0 / theta)
    return SmallnessCertificate(
        theta=theta, m=p.m, r=p.r, m_ss=mss, delta=delta, K=K, radius=radius,
        K_delta=K_delta, satisfied=K <= K_delta * (1.0 + 1e-12),
        product=fnorm * Enorm ** (1.0 / theta), product_bound=bound,
        sobolev=S, alpha=alpha,
    )


# -- linear kernel ------------------------------------------------------------

class _LinearSystem:
    """Factorized diffusion operator plus the convection matrix of one truncation level."""

    def __init__(self, p: ProblemSpec, n: float = math.inf):
        self.grid = p.grid
        self.A = assemble_diffusion(p.M, p.mu).tocsc()
        E = p.E if math.isinf(n) else p.E.clip(n)
        self.C = convection_matrix(E, p.scheme)
        self.f = p.f.flat if math.isinf(n) else np.clip(p.f.flat, -n, n)
        self.lu = spla.splu(self.A)

    def solve(self, g: np.ndarray) -> np.ndarray:
        rhs = self.C @ g + self.f
        if not np.any(rhs):
            return np.zeros_like(rhs)
        w = self.lu.solve(rhs)
        res = np.linalg.norm(self.A @ w - rhs)
        if not res <= LINEAR_RESIDUAL * np.linalg.norm(rhs):
            raise LinearSolveFailure(f"relative residual {res / np.linalg.norm(rhs):.3g}")
        return w


def solve_linearized(p: ProblemSpec, g: ScalarField) -> ScalarField:
    """Solve ``-div(M grad w) + mu w = -div(g E) + f`` with ``g`` given."""
    return ScalarField(p.grid, _LinearSystem(p).solve(g.flat))


def _rel_diff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.linalg.norm(a - b)
    if d == 0.0:
        return 0.0
    s = np.linalg.norm(a)
    return float(d / s) if s > 0 else math.inf


def _l2(x: np.ndarray, grid: Grid) -> float:
    return float(np.linalg.norm(x) * math.sqrt(grid.cell_measure))


# -- Picard on truncated data ----------------------------------------------------

def picard_solve(
    p: ProblemSpec,
    n: float,
    cfg: SolverConfig | None = None,
    warm: ScalarField | None = None,
) -> tuple[ScalarField, PicardHistory]:
    """Damped Picard iteration ``u <- (1 - w) u + w S_n(u)`` at truncation level ``n``.

    ``n = math.inf`` iterates on the untruncated problem.  The residual is
    the relative L2 gap ``|S_n(u) - u| / |S_n(u)|``.  The damping is halved,
    down to ``cfg.min_damping``, each time the residual increases.
    """
    cfg = cfg or SolverConfig()
    system = _LinearSystem(p, n)
    h_n = p.spec if math.isinf(n) else truncate_h(p.spec, n)
    u = np.zeros(p.grid.size) if warm is None else warm.flat.copy()
    hist = PicardHistory(level=n)
    omega = cfg.damping
    prev = math.inf
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.max_iter):
            w = system.solve(h_n(u))
            res = _rel_diff(w, u)
            if res > prev and omega > cfg.min_damping:
                omega = max(omega / 2.0, cfg.min_damping)
            prev = res
            u_next = u + omega * (w - u) if omega < 1.0 else w
            norm = _l2(u_next, p.grid)
            hist.residuals.append(res)
            hist.norms.append(norm)
            hist.dampings.append(omega)
            if not np.all(np.isfinite(u_next)) or norm > cfg.norm_cap:
                hist.diverged = True
                log.info("level %g: L2 norm cap %g exceeded at iteration %d",
                         n, cfg.norm_cap, hist.iterations)
                break
            u = u_next
            if res <= cfg.tol:
                hist.converged = True
                break
    if not math.isinf(n) and np.all(np.isfinite(u)):
        hist.clamp_active = bool(np.max(np.abs(p.spec(u)), initial=0.0) >= n)
    return ScalarField(p.grid, u), hist


def solve(p: ProblemSpec, cfg: SolverConfig | None = None) -> SolveReport:
    """Run the truncation ladder and classify the outcome."""
    cfg = cfg or SolverConfig()
    u = ScalarField.zeros(p.grid)
    levels: list[PicardHistory] = []
    diffs: list[float] = []
    notes = [
        "ladder stabilization stands in for the limit passage n -> inf; it carries no rate",
        "boundedness of iterates is observed, not proved, for the discrete scheme",
    ]
    if not classify_growth(p.spec).divergent:
        notes.append(f"{p.spec.family} has bounded H: existence is not guaranteed for all data")
    verdict, cap = Verdict.NOT_CONVERGED, None
    for n in cfg.ladder:
        u_next, hist = picard_solve(p, n, cfg, u)
        levels.append(hist)
        if hist.diverged:
            verdict, cap = Verdict.NONEXISTENCE_SUSPECTED, "l2_norm_cap"
            break
        if len(levels) > 1:
            diffs.append(_rel_diff(u_next.flat, u.flat))
        u = u_next
    else:
        final = levels[-1]
        agree = not diffs or diffs[-1] <= cfg.tol
        if final.converged and not final.clamp_active and agree:
            verdict = Verdict.SOLVED
        elif len(levels) > 1 and all(h.clamp_active for h in levels[-2:]) \
                and levels[-1].norms[-1] >= 2.0 * levels[-2].norms[-1]:
            verdict, cap = Verdict.NONEXISTENCE_SUSPECTED, "truncation_saturation"
    return SolveReport(verdict, u, levels, diffs, p.constants(), cap_fired=cap, notes=notes)


# -- untruncated fixed-point map --------------------------------------------------

def fixed_point_solve(p: ProblemSpec, theta: float, cfg: SolverConfig | None = None) -> SolveReport:
    """Iterate ``w = S(v)`` from ``v = 0`` inside the certified invariant ball.

    Iterates leaving the ball are recorded in ``ball_violations``; that
    signals a mismatch between the discrete norms and the continuum
    certificate and is not treated as fatal.
    """
    cfg = cfg or SolverConfig()
    if not theta > 0:
        raise DomainError("the fixed-point scheme needs theta > 0")
    if p.spec.family not in ("signed_power", "abs_power") or p.spec.theta != theta:
        raise DomainError(f"fixed-point scheme needs a power nonlinearity with theta={theta}")
    cert = smallness_certificate(p, theta)
    if not cert.satisfied:
        raise CertificateNotSatisfied(
            f"K = {cert.K:.6g} exceeds K_delta = {cert.K_delta:.6g}; no invariant ball"
        )
    system = _LinearSystem(p)
    h = p.spec
    v = np.zeros(p.grid.size)
    hist = PicardHistory(level=math.inf)
    ball_norms, violations = [0.0], []
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, cfg.max_iter + 1):
            w = system.solve(h(v))
            res = _rel_diff(w, v)
            nrm = lebesgue_norm(ScalarField(p.grid, w), cert.m_ss) if np.all(np.isfinite(w)) else math.inf
            ball_norms.append(nrm)
            if nrm > cert.radius + BALL_SLACK:
                violations.append(k)
                warnings.warn(f"iterate {k} left the invariant ball: {nrm:.6g} > {cert.radius:.6g}",
                              InvariantBallViolation, stacklevel=2)
            hist.residuals.append(res)
            hist.norms.append(_l2(w, p.grid))
            hist.dampings.append(1.0)
            if not math.isfinite(nrm) or hist.norms[-1] > cfg.norm_cap:
                hist.diverged = True
                break
            v = w
            if res <= cfg.tol:
                hist.converged = True
                break
    if hist.converged:
        verdict, cap = Verdict.SOLVED, None
    elif hist.diverged:
        verdict, cap = Verdict.NONEXISTENCE_SUSPECTED, "l2_norm_cap"
    else:
        verdict, cap = Verdict.NOT_CONVERGED, None
    notes = ["discrete L^m, L^r, L^m** norms replace the continuum norms in the certificate"]
    if violations:
        notes.append("invariant ball violated: certificate and discretization disagree")
    return SolveReport(verdict, ScalarField(p.grid, v), [hist], [],
                       p.constants(), cap_fired=cap, certificate=cert,
                       ball_norms=ball_norms, ball_violations=violations, notes=notes)
