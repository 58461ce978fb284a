"""
Thresholds and eigenpairs of a double phase problem
===================================================

The reference problem on (0, 1) uses power kernels with p1 = 2, p2 = 5,
p3 = 3.5 and reaction powers r = 3, s = 4.  We compute the two Rayleigh
thresholds, then solve the eigenvalue problem at a few values of lambda.
"""

import numpy as np

import doublephase as dp
from doublephase.energy import default_problem

spec = default_problem(elements=256)

# lambda* is the infimum of (Phi + Psi + Theta) / E2, lambda_* the infimum of Num2 / Den2
upper = dp.minimize_r1(spec)
lower = dp.minimize_r2(spec)
print(f"lambda*  = {upper.value:.10f}   residual {upper.residual_norm:.1e}")
print(f"lambda_* = {lower.value:.10f}   residual {lower.residual_norm:.1e}")

# a minimizer of R1 is itself an eigenfunction for lambda*
norm, _ = dp.weak_residual(upper.minimizer, spec, upper.value)
print(f"weak residual of the R1 minimizer at lambda*: {norm:.2e}")

# every lambda >= lambda* should produce a nontrivial eigenfunction
for factor in (1.01, 1.5, 3.0, 10.0):
    res = dp.solve_at(factor * upper.value, spec)
    print(f"lambda = {factor:5.2f} lambda*: {res.status:10s}  max|u| = {res.u.max_abs():.4f}  "
          f"R2(u) - lambda = {res.r2_value - res.lam:+.1e}")

# below lambda_* nothing but the zero solution exists; the certificate says why
lam = 0.5 * lower.value
res = dp.solve_at(lam, spec)
print(res.status)
print("\n".join(dp.certify_nonexistence(lam, spec, lambda_lower=lower.value).lines()))

# eigenfunctions grow with lambda and their profile drifts as the p2 phase takes over
x = spec.mesh.nodes[:, 0]
for factor in (1.01, 3.0, 10.0):
    u = dp.solve_at(factor * upper.value, spec).u.full()
    u = u * np.sign(u[len(u) // 2])
    print(f"{factor:5.2f}: u(1/4) / u(1/2) = {u[len(u) // 4] / u[len(u) // 2]:.4f}")
