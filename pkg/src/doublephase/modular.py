"""Modular and Luxemburg norm of variable-exponent Lebesgue spaces.

All integrals use the mesh quadrature, the same rule the energies use, so
the modular/norm relations hold exactly at the discrete level.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConvergenceError
from .exponent import conjugate

BISECTION_TOL = 1e-10
MAX_DOUBLINGS = 200


def modular_values(values, p_values, weights):
    """``sum W |values|^p`` for arrays sharing the quadrature layout."""
    with np.errstate(under="ignore", over="ignore"):
        return float(np.sum(weights * np.abs(values) ** p_values))


def luxemburg_values(values, p_values, weights, tol=BISECTION_TOL):
    """Luxemburg norm of quadrature-point values by bisection.

    Returns 0 for the zero function.  The bisection keeps a bracket
    ``rho(u/lo) > 1 >= rho(u/hi)`` and stops when its width is below
    ``tol`` (absolute for norms above one, relative below).
    """
    if not np.any(values):
        return 0.0
    rho = lambda lam: modular_values(values / lam, p_values, weights)
    lo = hi = 1.0
    if rho(1.0) > 1.0:
        for _ in range(MAX_DOUBLINGS):
            hi *= 2.0
            if rho(hi) <= 1.0:
                break
            lo = hi
        else:
            raise ConvergenceError("could not bracket the Luxemburg norm from above")
        lo = hi / 2.0
    else:
        for _ in range(MAX_DOUBLINGS):
            lo /= 2.0
            if rho(lo) > 1.0:
                break
            hi = lo
        else:
            raise ConvergenceError("could not bracket the Luxemburg norm from below")
    while hi - lo > tol * min(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if rho(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _layout(u, p):
    points, weights = u.mesh.quadrature()
    return points.reshape(-1, u.mesh.dim), weights.ravel()


def modular(u, p):
    """``rho_p(u) = integral of |u|^p(x)`` by mesh quadrature."""
    points, weights = _layout(u, p)
    return modular_values(u.at_quad().ravel(), p(points), weights)


def luxemburg_norm(u, p, tol=BISECTION_TOL):
    """``inf {lam > 0 : rho_p(u/lam) <= 1}``; zero for ``u == 0``."""
    points, weights = _layout(u, p)
    return luxemburg_values(u.at_quad().ravel(), p(points), weights, tol)


def gradient_norm(u, p, tol=BISECTION_TOL):
    """Luxemburg norm of ``|Du|`` (piecewise constant on elements)."""
    points, weights = u.mesh.quadrature()
    slope = np.linalg.norm(u.gradients(), axis=1)
    values = np.repeat(slope, weights.shape[1])
    return luxemburg_values(values, p(points.reshape(-1, u.mesh.dim)), weights.ravel(), tol)


def sobolev_norm(u, p):
    """``|u|_p + |Du|_p``, the norm of the zero-trace Sobolev space."""
    return luxemburg_norm(u, p) + gradient_norm(u, p)


def holder_pairing(u, v, p):
    """Both sides of the variable-exponent Hölder inequality.

    Returns ``(|int u v|, (1/p- + 1/p'-) |u|_p |v|_p')`` with ``p'`` the
    pointwise conjugate field, whose infimum is ``conjugate(p+)``.
    """
    points, weights = _layout(u, p)
    lhs = abs(float(np.sum(weights * u.at_quad().ravel() * v.at_quad().ravel())))
    pv = p(points)
    qv = pv / (pv - 1.0)
    factor = 1.0 / p.p_minus + 1.0 / conjugate(p.p_plus)
    rhs = (factor * luxemburg_values(u.at_quad().ravel(), pv, weights)
           * luxemburg_values(v.at_quad().ravel(), qv, weights))
    return lhs, rhs
