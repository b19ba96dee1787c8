"""Ready-made discrete problems used by tests, demos and the CLI.

``radial_slab_problem`` is the one-dimensional counterpart of the radial
configuration: on ``(-R, R)`` take ``M = 1``, ``E = -K sign(x)`` and a point
mass ``2 eps`` at the origin.  Integrating once on each half-line gives a
constant flux ``eps``, so the symmetric solution obeys

    -u'(x) = K h(u) + eps   for x > 0,   u(R) = 0,

which is the radial profile equation with ``r = |x|``.  A bounded solution
exists exactly when the blow-up integral exceeds ``R``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .mesh import Grid, MatrixField, ScalarField, VectorField
from .nonlinearity import NonlinearitySpec
from .solver import ProblemSpec

__all__ = ["radial_slab_problem", "point_source"]


def point_source(grid: Grid, x: tuple[float, ...], mass: float) -> ScalarField:
    """Discrete Dirac mass: ``mass / h^d`` on the interior node nearest to ``x``."""
    coords = grid.coords()
    dist = sum((c - xi) ** 2 for c, xi in zip(coords, x))
    idx = np.unravel_index(np.argmin(dist), dist.shape)
    values = np.zeros(grid.interior_shape)
    values[idx] = mass / grid.cell_measure
    return ScalarField(grid, values)


def radial_slab_problem(
    K: float,
    eps: float,
    R: float,
    spec: NonlinearitySpec,
    cells: int,
    mu: float = 0.0,
    analysis_dim: int = 3,
) -> ProblemSpec:
    """1D problem on ``(-R, R)`` whose positive solution is the radial profile in ``|x|``.

    ``cells`` must be even so that the origin is a grid node.
    """
    if not (K > 0 and eps > 0 and R > 0):
        raise DomainError("K, eps and R must be positive")
    if cells % 2:
        raise DomainError("use an even cell count so the origin is a node")
    grid = Grid.interval(-R, R, cells)
    E = VectorField.from_function(grid, lambda x: (-K * np.sign(x),))
    f = point_source(grid, (0.0,), 2.0 * eps)
    return ProblemSpec(grid, MatrixField.identity(grid), E, f, spec, mu=mu, analysis_dim=analysis_dim)
