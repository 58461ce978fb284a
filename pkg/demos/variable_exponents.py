"""
Variable exponents and the Luxemburg norm
=========================================

Exponent fields are plain callables on the domain, or expressions parsed
from a small grammar.  The modular and Luxemburg norm use the same
quadrature as the energies.
"""

import numpy as np

import doublephase as dp

domain = dp.Domain.interval(0.0, 1.0)
mesh = dp.Mesh(domain, 256)
p = dp.ExponentField.from_expression("2 + x", domain)
print(p, "bounds:", dp.bounds(p))

u = dp.interpolate(lambda pts: np.sin(np.pi * pts[:, 0]), mesh)
for t in (0.1, 1.0, 10.0):
    n = dp.luxemburg_norm(u * t, p)
    rho = dp.modular(u * t, p)
    # norm and modular sit on the same side of 1, with rho between n^p- and n^p+
    print(f"t = {t:5.1f}: |u|_p = {n:.6f}  rho_p(u) = {rho:.6f}  "
          f"n^p- = {n ** p.p_minus:.6f}  n^p+ = {n ** p.p_plus:.6f}")

# the defining equation of the norm
n = dp.luxemburg_norm(u, p)
print("rho(u / |u|) =", dp.modular(u * (1 / n), p))

# Hölder's inequality with the variable conjugate exponent
v = dp.interpolate(lambda pts: pts[:, 0] ** 2, mesh)
lhs, rhs = dp.holder_pairing(u, v, p)
print(f"|int u v| = {lhs:.6f} <= {rhs:.6f}")

# structural conditions on a full set of exponents
p1 = dp.ExponentField.from_expression("1.6 + 0.2*x", domain)
p2 = dp.ExponentField.const(5.0, domain)
p3 = dp.ExponentField.const(3.0, domain)
for report in (dp.validate_ordering(p1, p2, p3, dp.PowerPair(2.5, 4.0)),
               dp.validate_ordering(p1, p2, p3, dp.PowerPair(1.7, 4.0)),
               dp.validate_subcritical(p1, p2)):
    print("\n".join(report.lines()))

# in two dimensions the critical exponent can be finite
square = dp.Domain.rectangle(0.0, 1.0, 0.0, 1.0)
print("p* for p = 1.5, N = 2:", dp.critical_exponent(1.5, 2))
report = dp.validate_subcritical(dp.ExponentField.const(1.5, square), dp.ExponentField.const(6.0, square))
print("\n".join(report.lines()))
