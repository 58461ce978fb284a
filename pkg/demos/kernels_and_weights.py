"""
Operator kernels and the choice of weight
=========================================

Swapping the power kernels for the mean curvature and capillarity
operators changes the thresholds.  A sign-changing weight in front of the
theta term shifts lambda*, and a finite family of weights can be searched
for the smallest one.
"""

import numpy as np

import doublephase as dp
from doublephase.energy import default_problem

# the structural checks behind the existence theory, estimated on a grid
p = dp.ExponentField.const(2.5, dp.Domain.interval(0.0, 1.0))
for name in sorted(dp.BUILTIN_KERNELS):
    k = dp.make_kernel(name, p)
    g, e = dp.validate_growth(k), dp.validate_ellipticity(k)
    print(f"{name:15s} b = {g.b_estimate:.4g}  c = {e.c_estimate:.4g}")

# user kernels come from expressions; their xi-derivative is numerical
k = dp.make_expression_kernel("(1 + xi^2)^((p-2)/2)", p)
print(k.name, "density at t=1:", k.density(np.array([[0.5]]), np.array([1.0]))[0])

for kernels in (("power",) * 3, ("mean_curvature", "power", "power"), ("capillarity", "power", "power")):
    spec = default_problem(elements=128, kernels=kernels)
    print(f"{kernels[0]:15s} lambda* = {dp.minimize_r1(spec).value:.6f}")

# lambda*(w) over a small family: nonnegative theta means smaller weights win
spec = default_problem(elements=128)
mesh = spec.mesh
family = dp.WeightFamily(
    ["zero", "one", "minus_tenth", "left_bump", "right_bump"],
    [dp.interpolate(lambda pts, c=c: c, mesh) for c in (0.0, 1.0, -0.1)]
    + [dp.interpolate(lambda pts, c=c: np.exp(-50 * (pts[:, 0] - c) ** 2), mesh) for c in (0.3, 0.7)],
)
result = dp.optimize(family, spec)
for name, value, iterations, restarts in result.table:
    print(f"{name:12s} lambda* = {value:.8f}  ({iterations} iterations, {restarts} starts)")
print("winner:", result.name)
