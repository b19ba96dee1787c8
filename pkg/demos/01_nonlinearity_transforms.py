"""How fast must h grow before the H-transform stays bounded?

H(s) = int_0^s dt / (|h(t)| + 1) is the change of unknown behind the
level-set decay estimate.  When H diverges, every level set shrinks as the
level rises; when H converges, the estimate gives nothing beyond a fixed
level and existence can fail for large data.

Run with ``python3 demos/01_nonlinearity_transforms.py``.
"""

import math

from supconv.nonlinearity import NonlinearitySpec, classify_growth, eval_H

families = {
    "h(s) = s": NonlinearitySpec.linear(),
    "s log(e+|s|)": NonlinearitySpec.log_power(1.0),
    "s log(e+|s|)^2": NonlinearitySpec.log_power(2.0),
    "s |s|": NonlinearitySpec.signed_power(1.0),
}

levels = [1.0, 1e2, 1e4, 1e6]
print(f"{'family':>16}" + "".join(f"{'H(' + format(s, 'g') + ')':>12}" for s in levels) + "   growth")
for name, spec in families.items():
    row = "".join(f"{eval_H(spec, s):12.6f}" for s in levels)
    g = classify_growth(spec)
    tail = g.kind.value if g.divergent else f"{g.kind.value}, limit {g.limit_plus:.10f}"
    print(f"{name:>16}{row}   {tail}")

# s log(e+|s|) sits right on the edge: H grows like log log s
print()
print("log log growth for s log(e+|s|):")
for s in (1e3, 1e6, 1e9):
    print(f"  H({s:g}) - log(log(e + s)) = {eval_H(families['s log(e+|s|)'], s) - math.log(math.log(math.e + s)):.6f}")

print()
print(f"for h = s|s| the limit is pi/2 = {math.pi / 2:.10f}")
