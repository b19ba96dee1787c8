"""Uniform finite-difference grids on intervals and rectangles.

Layout
------
* Scalars live on interior nodes; boundary nodes are implicit zeros.
* Vector fields are staggered: component ``d`` lives on the midpoints of
  the grid edges parallel to axis ``d``.  In 2D the x-component has shape
  ``(Mx, My + 1)`` and the y-component ``(Mx + 1, My)``.
* Matrix fields hold one symmetric ``d x d`` block per cell.

Operators use the strong (nodal) scaling: the 1D Laplacian is the
``(-1, 2, -1) / h**2`` stencil, and ``mu`` is added to the diagonal.
Discrete integrals weight every node or cell by ``prod(h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln

from .errors import DomainError, EllipticityError, SingularOperator

__all__ = [
    "Grid",
    "ScalarField",
    "VectorField",
    "MatrixField",
    "assemble_diffusion",
    "convection_matrix",
    "assemble_convection_rhs",
    "lebesgue_norm",
    "orlicz_nlogn_norm",
    "levelset_measure",
    "truncate",
    "integral",
    "h1_seminorm",
    "sobolev_constant",
    "critical_exponents",
]

MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    bounds: tuple[tuple[float, float], ...]
    cells: tuple[int, ...]

    def __post_init__(self):
        if len(self.bounds) != len(self.cells) or len(self.cells) not in (1, 2):
            raise ValueError("grids are intervals or rectangles")
        for (lo, hi), m in zip(self.bounds, self.cells):
            if not hi > lo:
                raise ValueError(f"empty extent [{lo}, {hi}]")
            if int(m) != m or m < MIN_CELLS:
                raise ValueError(f"need at least {MIN_CELLS} cells per axis, got {m}")

    @classmethod
    def interval(cls, a: float, b: float, cells: int) -> Grid:
        return cls(((float(a), float(b)),), (int(cells),))

    @classmethod
    def rectangle(cls, ax, bx, ay, by, mx: int, my: int) -> Grid:
        return cls(((float(ax), float(bx)), (float(ay), float(by))), (int(mx), int(my)))

    @property
    def kind(self) -> str:
        return "interval" if self.dim == 1 else "rectangle"

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple((hi - lo) / m for (lo, hi), m in zip(self.bounds, self.cells))

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def measure(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    @property
    def interior_shape(self) -> tuple[int, ...]:
        return tuple(m - 1 for m in self.cells)

    @property
    def size(self) -> int:
        return int(np.prod(self.interior_shape))

    def axis_nodes(self, axis: int) -> np.ndarray:
        """All node coordinates along ``axis``, boundary nodes included."""
        (lo, hi), m = self.bounds[axis], self.cells[axis]
        return np.linspace(lo, hi, m + 1)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Interior node coordinates, one array of ``interior_shape`` per axis."""
        axes = [self.axis_nodes(d)[1:-1] for d in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def face_coords(self, axis: int) -> tuple[np.ndarray, ...]:
        """Coordinates of the staggered locations of vector component ``axis``."""
        axes = []
        for d in range(self.dim):
            nodes = self.axis_nodes(d)
            axes.append(0.5 * (nodes[:-1] + nodes[1:]) if d == axis else nodes)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def face_shape(self, axis: int) -> tuple[int, ...]:
        return tuple(m if d == axis else m + 1 for d, m in enumerate(self.cells))

    def cell_centers(self) -> tuple[np.ndarray, ...]:
        axes = [0.5 * (self.axis_nodes(d)[:-1] + self.axis_nodes(d)[1:]) for d in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "bounds": [list(b) for b in self.bounds], "cells": list(self.cells)}

    @classmethod
    def from_dict(cls, data: dict) -> Grid:
        bounds = data["bounds"]
        cells = data["cells"]
        if isinstance(cells, int):
            cells = [cells]
        if bounds and not isinstance(bounds[0], (list, tuple)):
            bounds = [bounds]
        grid = cls(tuple(tuple(map(float, b)) for b in bounds), tuple(int(c) for c in cells))
        if "kind" in data and data["kind"] != grid.kind:
            raise ValueError(f"grid kind {data['kind']!r} does not match {grid.dim} axes")
        return grid


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.grid.interior_shape)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scalar field has non-finite entries")

    @classmethod
    def zeros(cls, grid: Grid) -> ScalarField:
        return cls(grid, np.zeros(grid.interior_shape))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> ScalarField:
        vals = np.broadcast_to(fn(*grid.coords()), grid.interior_shape)
        return cls(grid, np.array(vals, dtype=float))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __add__(self, other: ScalarField) -> ScalarField:
        return ScalarField(self.grid, self.values + other.values)

    def __sub__(self, other: ScalarField) -> ScalarField:
        return ScalarField(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> ScalarField:
        return ScalarField(self.grid, c * self.values)

    __rmul__ = __mul__


@dataclass
class VectorField:
    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.components) != self.grid.dim:
            raise ValueError(f"expected {self.grid.dim} components")
        comps = []
        for d, c in enumerate(self.components):
            c = np.asarray(c, dtype=float)
            shape = self.grid.face_shape(d)
            c = np.array(np.broadcast_to(c, shape), dtype=float)
            if not np.all(np.isfinite(c)):
                raise ValueError("vector field has non-finite entries")
            comps.append(c)
        self.components = tuple(comps)

    @classmethod
    def zeros(cls, grid: Grid) -> VectorField:
        return cls(grid, tuple(np.zeros(grid.face_shape(d)) for d in range(grid.dim)))

    @classmethod
    def constant(cls, grid: Grid, vec: Sequence[float]) -> VectorField:
        return cls(grid, tuple(np.full(grid.face_shape(d), float(v)) for d, v in enumerate(vec)))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., Sequence[np.ndarray]]) -> VectorField:
        """``fn(*coords)`` returns all components; component ``d`` is kept at its own faces."""
        comps = []
        for d in range(grid.dim):
            val = fn(*grid.face_coords(d))[d]
            comps.append(np.broadcast_to(val, grid.face_shape(d)))
        return cls(grid, tuple(comps))

    def cell_magnitude(self) -> np.ndarray:
        """Euclidean norm of the face-averaged vector in every cell."""
        if self.grid.dim == 1:
            return np.abs(self.components[0])
        ex, ey = self.components
        cx = 0.5 * (ex[:, :-1] + ex[:, 1:])
        cy = 0.5 * (ey[:-1, :] + ey[1:, :])
        return np.hypot(cx, cy)

    def clip(self, n: float) -> VectorField:
        """Componentwise truncation ``T_n``."""
        return VectorField(self.grid, tuple(np.clip(c, -n, n) for c in self.components))


@dataclass
class MatrixField:
    grid: Grid
    values: np.ndarray
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        d = self.grid.dim
        shape = self.grid.cells + (d, d)
        vals = np.array(np.broadcast_to(np.asarray(self.values, dtype=float), shape))
        if not np.allclose(vals, np.swapaxes(vals, -1, -2), rtol=0, atol=1e-14):
            raise EllipticityError("coefficient matrices must be symmetric")
        eig = np.linalg.eigvalsh(vals.reshape(-1, d, d))
        lo, hi = float(eig.min()), float(eig.max())
        if not lo > 0:
            raise EllipticityError(f"smallest eigenvalue {lo:.3g} is not positive")
        if self.alpha and lo < self.alpha * (1 - 1e-12):
            raise EllipticityError(f"declared alpha {self.alpha} exceeds smallest eigenvalue {lo}")
        if self.beta and hi > self.beta * (1 + 1e-12):
            raise EllipticityError(f"declared beta {self.beta} is below largest eigenvalue {hi}")
        self.values = vals
        self.alpha = self.alpha or lo
        self.beta = self.beta or hi

    @classmethod
    def identity(cls, grid: Grid, scale: float = 1.0) -> MatrixField:
        return cls(grid, scale * np.eye(grid.dim))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> MatrixField:
        """``fn(*cell_centers)`` returns an array of shape ``cells + (d, d)``."""
        return cls(grid, fn(*grid.cell_centers()))

    @property
    def is_diagonal(self) -> bool:
        if self.grid.dim == 1:
            return True
        return bool(np.all(self.values[..., 0, 1] == 0.0))


def _interior_index(grid: Grid) -> np.ndarray:
    """Map from full node index (boundary included) to interior unknown, -1 on the boundary."""
    full = tuple(m + 1 for m in grid.cells)
    idx = -np.ones(full, dtype=np.int64)
    inner = tuple(slice(1, -1) for _ in full)
    idx[inner] = np.arange(grid.size).reshape(grid.interior_shape)
    return idx


def _edges(grid: Grid, axis: int):
    """Node pairs ``(a, b)`` joined by edges along ``axis``, restricted to interior lines.

    Returns the unknown indices of both endpoints and the index of each edge
    into the staggered component array.
    """
    idx = _interior_index(grid)
    if grid.dim == 1:
        a, b = idx[:-1], idx[1:]
        face = (np.arange(grid.cells[0]),)
        return a, b, face
    mx, my = grid.cells
    if axis == 0:
        i, j = np.meshgrid(np.arange(mx), np.arange(1, my), indexing="ij")
        return idx[i, j].ravel(), idx[i + 1, j].ravel(), (i.ravel(), j.ravel())
    i, j = np.meshgrid(np.arange(1, mx), np.arange(my), indexing="ij")
    return idx[i, j].ravel(), idx[i, j + 1].ravel(), (i.ravel(), j.ravel())


def _harmonic(x, y):
    return 2.0 * x * y / (x + y)


def _edge_coefficients(Mf: MatrixField, axis: int) -> np.ndarray:
    grid = Mf.grid
    diag = Mf.values[..., axis, axis]
    if grid.dim == 1:
        return diag
    # an edge along ``axis`` borders the two cells on either side across the other axis
    if axis == 0:
        j = np.arange(1, grid.cells[1])
        return _harmonic(diag[:, j - 1], diag[:, j]).ravel()
    i = np.arange(1, grid.cells[0])
    return _harmonic(diag[i - 1, :], diag[i, :]).ravel()


def assemble_diffusion(Mf: MatrixField, mu: float = 0.0) -> sp.csr_matrix:
    """Sparse discretization of ``-div(M grad u) + mu u`` with Dirichlet rows eliminated."""
    if mu < 0:
        raise DomainError("mu must be nonnegative")
    if not Mf.is_diagonal:
        raise DomainError("the 5-point stencil represents diagonal coefficient matrices only")
    grid = Mf.grid
    n = grid.size
    rows, cols, vals = [], [], []
    diag = np.full(n, float(mu))
    for axis, h in enumerate(grid.spacing):
        a, b, _ = _edges(grid, axis)
        w = _edge_coefficients(Mf, axis) / h**2
        for p in (a, b):
            mask = p >= 0
            np.add.at(diag, p[mask], w[mask])
        both = (a >= 0) & (b >= 0)
        rows += [a[both], b[both]]
        cols += [b[both], a[both]]
        vals += [-w[both], -w[both]]
    if np.any(diag <= np.finfo(float).tiny):
        raise SingularOperator("diagonal entry underflowed; coefficient field is degenerate")
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A.tocsr()


def convection_matrix(E: VectorField, scheme: str = "upwind") -> sp.csr_matrix:
    """Matrix ``C`` with ``C @ g`` the discrete ``-div(g E)`` at interior nodes.

    Face values of ``g`` are taken from the upwind side of each face
    (``scheme="upwind"``) or averaged (``scheme="centered"``).
    """
    if scheme not in ("upwind", "centered"):
        raise ValueError(f"unknown convection scheme {scheme!r}")
    grid = E.grid
    n = grid.size
    rows, cols, vals = [], [], []
    for axis, h in enumerate(grid.spacing):
        a, b, face = _edges(grid, axis)
        e = E.components[axis][face]
        if scheme == "upwind":
            wa, wb = np.maximum(e, 0.0) / h, np.minimum(e, 0.0) / h
        else:
            wa = wb = 0.5 * e / h
        # flux F = wa*g_a + wb*g_b leaves node a and enters node b
        for node, sign in ((a, -1.0), (b, 1.0)):
            for src, w in ((a, wa), (b, wb)):
                mask = (node >= 0) & (src >= 0) & (w != 0)
                rows.append(node[mask])
                cols.append(src[mask])
                vals.append(sign * w[mask])
    C = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return C.tocsr()


def assemble_convection_rhs(E: VectorField, g: ScalarField, scheme: str = "upwind") -> ScalarField:
    if g.grid != E.grid:
        raise ValueError("fields live on different grids")
    return ScalarField(g.grid, convection_matrix(E, scheme) @ g.flat)


def _magnitudes(u) -> np.ndarray:
    return u.cell_magnitude() if isinstance(u, VectorField) else np.abs(u.values)


def lebesgue_norm(u: ScalarField | VectorField, p: float) -> float:
    """Discrete ``L^p`` norm; vector fields use their cell magnitudes."""
    if not p >= 1:
        raise DomainError("p must be at least 1")
    a = _magnitudes(u)
    if math.isinf(p):
        return float(a.max(initial=0.0))
    m = a.max(initial=0.0)
    if m == 0.0:
        return 0.0
    # scaling by the max keeps large exponents from overflowing
    return float(m * (np.sum((a / m) ** p) * u.grid.cell_measure) ** (1.0 / p))


def orlicz_nlogn_norm(E: VectorField | ScalarField, N: int) -> float:
    """``(sum |E|^N log^N(e + |E|) h^d)^(1/N)``, the gauge of the ``L^N log^N`` class."""
    if N < 3:
        raise DomainError("N must be at least 3")
    a = _magnitudes(E)
    return float((np.sum((a * np.log(math.e + a)) ** N) * E.grid.cell_measure) ** (1.0 / N))


def levelset_measure(u: ScalarField, k: float) -> float:
    """Discrete measure of ``{|u| > k}``."""
    if k < 0:
        raise DomainError("level must be nonnegative")
    return float(np.count_nonzero(np.abs(u.values) > k) * u.grid.cell_measure)


def truncate(u: ScalarField, k: float) -> tuple[ScalarField, ScalarField]:
    """``(T_k u, G_k u)`` with ``T_k u + G_k u == u`` exactly."""
    if not k > 0:
        raise DomainError("truncation level must be positive")
    t = np.clip(u.values, -k, k)
    return ScalarField(u.grid, t), ScalarField(u.grid, u.values - t)


def integral(u: ScalarField | np.ndarray, grid: Grid | None = None) -> float:
    if isinstance(u, ScalarField):
        return float(np.sum(u.values) * u.grid.cell_measure)
    return float(np.sum(u) * grid.cell_measure)


def h1_seminorm(u: ScalarField) -> float:
    """Discrete ``||grad u||_2`` over every edge, boundary edges included."""
    grid = u.grid
    full = np.zeros(tuple(m + 1 for m in grid.cells))
    full[tuple(slice(1, -1) for _ in grid.cells)] = u.values
    total = 0.0
    for axis, h in enumerate(grid.spacing):
        total += np.sum((np.diff(full, axis=axis) / h) ** 2)
    return float(math.sqrt(total * grid.cell_measure))


def critical_exponents(N: int) -> tuple[float, float]:
    """``(2^*, 2_*) = (2N/(N-2), 2N/(N+2))``."""
    if N <= 2:
        raise DomainError("Sobolev exponents need N > 2")
    return 2.0 * N / (N - 2), 2.0 * N / (N + 2)


def sobolev_constant(N: int, override: float | None = None) -> float:
    """Best constant in ``||u||_{2^*} <= S ||grad u||_2`` on ``R^N`` (Talenti/Aubin).

    ``S = (pi N (N-2))^(-1/2) (Gamma(N) / Gamma(N/2))^(1/N)``.
    """
    if override is not None:
        if not override > 0:
            raise DomainError("Sobolev constant override must be positive")
        return float(override)
    if int(N) != N or N < 3:
        raise DomainError("N must be an integer >= 3")
    log_ratio = (gammaln(N) - gammaln(N / 2.0)) / N
    return float(math.exp(log_ratio) / math.sqrt(math.pi * N * (N - 2)))
