"""Small data: the fixed-point map stays in an invariant ball.

For h(s) = s|s| and exponents (N, m, r) = (3, 6/5, 6), the map
v -> solution of the linear problem with h(v) frozen is bounded by
||S(v)|| <= K + delta ||v||^2 in L^6.  When K <= K_delta the ball of radius
R* is invariant.  This demo scales the data to a fraction of the
threshold and watches the iterates.

Run with ``python3 demos/04_fixed_point_ball.py``.
"""

import numpy as np

from supconv.errors import CertificateNotSatisfied
from supconv.mesh import Grid, MatrixField, ScalarField, VectorField
from supconv.nonlinearity import NonlinearitySpec
from supconv.solver import ProblemSpec, SolverConfig, fixed_point_solve, smallness_certificate

sp1 = NonlinearitySpec.signed_power(1.0)
g = Grid.interval(0, 1, 128)
E = VectorField.from_function(g, lambda x: (1 + 0.5 * np.sin(3 * x),))
f = ScalarField.from_function(g, lambda x: 1 + x)
base = ProblemSpec(g, MatrixField.identity(g), E, f, sp1, m=1.2, r=6)
cert = smallness_certificate(base, 1.0)
print(f"||f||_m ||E||_r^(1/theta) = {cert.product:.4g}, threshold {cert.product_bound:.4g}")

for fraction in (0.25, 0.5, 0.9, 1.5):
    p = ProblemSpec(g, MatrixField.identity(g), E, f * (fraction * cert.product_bound / cert.product),
                    sp1, m=1.2, r=6)
    try:
        rep = fixed_point_solve(p, 1.0, SolverConfig(tol=1e-12, max_iter=200))
    except CertificateNotSatisfied as exc:
        print(f"\nfraction {fraction}: refused ({exc})")
        continue
    c = rep.certificate
    print(f"\nfraction {fraction}: R* = {c.radius:.4f}, K = {c.K:.4g} <= K_delta = {c.K_delta:.4g}")
    print(f"  {rep.levels[0].iterations} iterations, verdict {rep.verdict.value}")
    print("  L6 norms of the iterates: " + ", ".join(f"{v:.4f}" for v in rep.ball_norms[:6]) + ", ...")
