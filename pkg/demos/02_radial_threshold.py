"""Sharp existence threshold for the radial problem.

With inward drift of size K and a point mass of size eps at the origin of
a ball of radius R, the radial profile satisfies -u' = K h(u) + eps with
u(R) = 0.  A bounded profile exists exactly when the blow-up integral
int_0^inf ds / (K h(s) + eps) exceeds R.  For h(s) = s|s| the integral is
pi / (2 sqrt(K eps)) and the profile is a tangent.

Run with ``python3 demos/02_radial_threshold.py``.
"""

import math

import numpy as np

from supconv.nonlinearity import NonlinearitySpec, blowup_integral
from supconv.radial import RadialProblem, analytic_tan, blowup_time, existence_verdict, solve_radial

sp1 = NonlinearitySpec.signed_power(1.0)
print(f"blow-up integral for K = eps = 1: {blowup_integral(sp1, 1, 1):.15f}  (pi/2 = {math.pi / 2:.15f})")

print("\nverdicts across the threshold:")
for R in (1.0, math.pi / 2 - 1e-6, math.pi / 2 + 1e-6, 2.0):
    v = existence_verdict(RadialProblem(1, 1, R, sp1))
    extra = ""
    if v.value == "not_exists":
        extra = f", backward profile blows up at r = {blowup_time(sp1, 1, 1, R):.6f}"
    print(f"  R = {R:.8f}: {v.value}{extra}")

sol = solve_radial(RadialProblem(1, 1, 1, sp1), M=10_000)
err = sol.sup_error(lambda r: analytic_tan(1, 1, 1, r))
print(f"\nR = 1 profile: u(0) = {sol.a:.12f}, tan(1) = {math.tan(1):.12f}, RK4 sup error {err:.1e}")

print("\nprofile samples:")
for r in np.linspace(0, 1, 6):
    i = int(round(r * 10_000))
    print(f"  r = {r:.1f}: u = {sol.values[i]:.8f}")

print("\nslower growth never blows up:")
for name, spec in (("linear", NonlinearitySpec.linear()), ("log power", NonlinearitySpec.log_power(1.0))):
    print(f"  {name}: blow-up integral = {blowup_integral(spec, 1, 1)}")
