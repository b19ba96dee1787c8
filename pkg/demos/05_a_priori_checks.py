"""A-priori estimates checked on computed solutions.

Solves a 2D problem with h(s) = s log(e+|s|) and a mass term, then checks
the L1 bound, the level-set decay bound, and the comparison principle for
an ordered pair of sources.  Also evaluates the integral necessary
condition on a radial profile that is too concentrated.

Run with ``python3 demos/05_a_priori_checks.py``.
"""

import numpy as np

from supconv.mesh import Grid, MatrixField, ScalarField, VectorField
from supconv.nonlinearity import NonlinearitySpec
from supconv.solver import ProblemSpec, solve
from supconv.verify import check_comparison, check_decay, check_L1, check_nonexistence_necessary

lp1 = NonlinearitySpec.log_power(1.0)
g = Grid.rectangle(0, 1, 0, 1, 48, 48)
E = VectorField.from_function(g, lambda x, y: (2 * np.cos(3 * y), 2 * np.sin(3 * x)))
rng = np.random.default_rng(0)
f1 = ScalarField(g, rng.uniform(0, 10, g.interior_shape))
f2 = f1 + ScalarField.from_function(g, lambda x, y: 20 * np.exp(-40 * ((x - 0.3) ** 2 + (y - 0.6) ** 2)))

mk = lambda f: ProblemSpec(g, MatrixField.identity(g), E, f, lp1, mu=1.0)  # noqa: E731
u1, u2 = solve(mk(f1)).field, solve(mk(f2)).field

l1 = check_L1(u1, f1, 1.0)
print(f"L1: ||u||_1 = {l1.lhs:.4f} <= ||f||_1 / mu = {l1.rhs:.4f}: {bool(l1)}")

dec = check_decay(u1, lp1, E, f1)
print(f"decay: C = {dec.C:.4g}, worst measured/bound ratio {dec.worst_ratio:.3e}: {bool(dec)}")
print(f"  smallest C that would still pass: {dec.best_C:.4g}")

cmp_ = check_comparison(u1, u2)
print(f"comparison: max(u1 - u2) = {np.max(u1.values - u2.values):.3e}: {bool(cmp_)}")

r = Grid.interval(0, 1, 4096)
for scale in (1.0, 131072.0):
    spike = ScalarField.from_function(r, lambda x: scale * np.exp(-(x / 0.05) ** 2))
    nc = check_nonexistence_necessary(spike, theta=1.0, N=3, mu=1.0)
    print(f"necessary condition, spike x {scale:g}: int f (1 - r^2) = {nc.lhs:.4g} vs {nc.rhs:.4g}: {bool(nc)}")
