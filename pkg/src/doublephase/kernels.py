"""Operator kernels ``phi(x, xi)`` and their structural checks.

A kernel defines the flux ``phi(x, |v|) v`` of a quasilinear operator
``div(phi(x, |Du|) Du)``.  Each :class:`KernelSpec` carries the value, its
xi-derivative and the density ``int_0^t phi(x, s) s ds``.  All callables
take an ``(n, N)`` array of points and an ``(n,)`` array of magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .exponent import ExponentField, ValidationReport
from .expr import Expression

GL_ORDER = 32
MAX_PANELS = 64
COMPARISON_TOL = 1e-10


@dataclass(frozen=True)
class KernelSpec:
    name: str
    exponent: ExponentField
    value: Callable
    xi_derivative: Callable
    density: Callable
    approximate_derivative: bool = False

    def flux_coefficient(self, x, xi):
        """``value(x, xi)`` with the limit convention ``0`` at ``xi == 0``.

        The flux ``value * v`` tends to zero as ``v -> 0`` for every
        admissible kernel, so the product is what stays meaningful.
        """
        xi = np.asarray(xi, dtype=float)
        pos = xi > 0
        out = np.zeros_like(xi)
        if pos.all():
            return self.value(x, xi)
        if pos.any():
            out[pos] = self.value(x[pos], xi[pos])
        return out

    def slope_coefficient(self, x, xi):
        """``xi * d(value)/dxi`` with the same zero convention."""
        xi = np.asarray(xi, dtype=float)
        pos = xi > 0
        out = np.zeros_like(xi)
        if pos.any():
            out[pos] = xi[pos] * self.xi_derivative(x[pos], xi[pos])
        return out


def _pow(base, expo):
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        return np.power(base, expo)


def make_power_kernel(p):
    """``xi^(p-2)``: the ``p(x)``-Laplacian."""

    def value(x, xi):
        return _pow(xi, p(x) - 2.0)

    def derivative(x, xi):
        pv = p(x)
        return (pv - 2.0) * _pow(xi, pv - 3.0)

    def density(x, t):
        pv = p(x)
        return _pow(t, pv) / pv

    return KernelSpec("power", p, value, derivative, density)


def make_mean_curvature_kernel(p):
    """``(1 + xi^2)^((p-2)/2)``: the generalized mean curvature operator."""

    def value(x, xi):
        return _pow(1.0 + xi * xi, 0.5 * (p(x) - 2.0))

    def derivative(x, xi):
        pv = p(x)
        return (pv - 2.0) * xi * _pow(1.0 + xi * xi, 0.5 * (pv - 4.0))

    def density(x, t):
        pv = p(x)
        with np.errstate(over="ignore"):
            return np.expm1(0.5 * pv * np.log1p(t * t)) / pv

    return KernelSpec("mean_curvature", p, value, derivative, density)


def make_capillarity_kernel(p):
    """``(1 + xi^p / sqrt(1 + xi^(2p))) xi^(p-2)``: the capillarity operator."""

    def _ratio(pv, xi):
        a = _pow(xi, pv)
        return a, a / np.hypot(1.0, a)

    def value(x, xi):
        pv = p(x)
        _, g = _ratio(pv, xi)
        return (1.0 + g) * _pow(xi, pv - 2.0)

    def derivative(x, xi):
        pv = p(x)
        a, g = _ratio(pv, xi)
        dg = pv * _pow(xi, pv - 1.0) / np.hypot(1.0, a) ** 3
        return (pv - 2.0) * _pow(xi, pv - 3.0) * (1.0 + g) + _pow(xi, pv - 2.0) * dg

    def density(x, t):
        # t^p/p + (sqrt(1 + t^2p) - 1)/p, the second term written without cancellation
        pv = p(x)
        a = _pow(t, pv)
        return (a + a * (a / (np.hypot(1.0, a) + 1.0))) / pv

    return KernelSpec("capillarity", p, value, derivative, density)


BUILTIN_KERNELS = {
    "power": make_power_kernel,
    "mean_curvature": make_mean_curvature_kernel,
    "capillarity": make_capillarity_kernel,
}


def make_kernel(name, p):
    try:
        return BUILTIN_KERNELS[name](p)
    except KeyError:
        raise KeyError(f"unknown kernel {name!r}; built-ins are {sorted(BUILTIN_KERNELS)}") from None


def density_by_quadrature(value, x, t, order=GL_ORDER, max_panels=MAX_PANELS):
    """``int_0^t value(x, s) s ds`` by composite Gauss-Legendre.

    Uses ``floor(t) + 1`` equal panels, capped at ``max_panels``.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes, weights = 0.5 * (nodes + 1.0), 0.5 * weights
    panels = np.clip(np.floor(t).astype(int) + 1, 1, max_panels)
    out = np.zeros(len(t))
    for n in np.unique(panels):
        idx = np.flatnonzero(panels == n)
        width = t[idx] / n
        starts = np.arange(n)[None, :, None] * width[:, None, None]
        s = starts + nodes[None, None, :] * width[:, None, None]       # (m, n, order)
        xs = np.repeat(x[idx], n * order, axis=0)
        vals = value(xs, s.ravel()).reshape(s.shape)
        out[idx] = np.sum(vals * s * weights, axis=(1, 2)) * width
    return out


def make_expression_kernel(source, p, name=None):
    """User kernel from the expression grammar over ``x, y, xi`` (and ``p``).

    The xi-derivative is a central difference with step
    ``1e-6 * max(1, xi)`` and the density is computed by quadrature.
    """
    expr = Expression(source, ("x", "y", "xi", "p"))

    def value(x, xi):
        x = np.atleast_2d(x)
        y = x[:, 1] if x.shape[1] > 1 else 0.0
        pv = p(x) if "p" in expr.names else 0.0
        return expr(x=x[:, 0], y=y, xi=xi, p=pv)

    def derivative(x, xi):
        h = 1e-6 * np.maximum(1.0, xi)
        return (value(x, xi + h) - value(x, np.maximum(xi - h, 0.0))) / (xi + h - np.maximum(xi - h, 0.0))

    def density(x, t):
        return density_by_quadrature(value, x, t)

    return KernelSpec(name or f"expr:{source}", p, value, derivative, density, approximate_derivative=True)


@dataclass
class SampleGrid:
    """Tensor sample of domain points and log-spaced magnitudes."""

    points: np.ndarray
    xi: np.ndarray

    @classmethod
    def default(cls, domain, n_points=64, n_xi=121, xi_range=(1e-6, 1e6)):
        per_axis = n_points if domain.dim == 1 else int(round(np.sqrt(n_points)))
        points = domain.sample_points(per_axis)
        xi = np.logspace(np.log10(xi_range[0]), np.log10(xi_range[1]), n_xi)
        return cls(points, xi)

    def flat(self):
        x = np.repeat(self.points, len(self.xi), axis=0)
        xi = np.tile(self.xi, len(self.points))
        return x, xi


@dataclass
class GrowthReport:
    name: str
    b_estimate: float = np.nan
    c_estimate: float = np.nan
    comparison_margin: float = np.nan
    offset_estimate: float = np.nan
    passed: bool = True
    violations: list = field(default_factory=list)
    approximate: bool = False

    def __post_init__(self):
        self.passed = not self.violations

    def __bool__(self):
        return self.passed

    def lines(self):
        status = "PASS" if self.passed else "FAIL"
        out = [f"[{status}] {self.name}"]
        for key in ("b_estimate", "offset_estimate", "c_estimate", "comparison_margin"):
            val = getattr(self, key)
            if not np.isnan(val):
                out.append(f"    {key} = {val:.6g}")
        if self.approximate:
            out.append("    (xi-derivative approximated by central differences)")
        if self.violations:
            out.append(f"    {len(self.violations)} violating samples, first at (x, xi) = {self.violations[0]}")
        return out


def _violations(x, xi, mask, limit=20):
    idx = np.flatnonzero(mask)[:limit]
    return [(tuple(float(c) for c in x[i]), float(xi[i])) for i in idx]


def validate_growth(k, grid=None):
    """Estimate ``b`` in ``|phi(x,xi) xi| <= a(x) + b xi^(p-1)`` over a grid."""
    grid = grid or SampleGrid.default(k.exponent.domain)
    x, xi = grid.flat()
    pv = k.exponent(x)
    with np.errstate(all="ignore"):
        flux = np.abs(k.value(x, xi) * xi)
        ratio = flux / (1.0 + _pow(xi, pv - 1.0))
    bad = ~np.isfinite(ratio)
    b = float(np.max(ratio)) if not bad.any() else np.inf
    offset = float(np.max(np.maximum(flux - b * _pow(xi, pv - 1.0), 0.0))) if np.isfinite(b) else np.inf
    return GrowthReport(f"growth {k.name}", b_estimate=b, offset_estimate=offset,
                        violations=_violations(x, xi, bad), approximate=k.approximate_derivative)


def validate_ellipticity(k, grid=None):
    """Estimate ``c`` in ``min(phi, phi + xi phi') >= c xi^(p-2)`` over a grid."""
    grid = grid or SampleGrid.default(k.exponent.domain)
    x, xi = grid.flat()
    pv = k.exponent(x)
    with np.errstate(all="ignore"):
        val = k.value(x, xi)
        lower = np.minimum(val, val + xi * k.xi_derivative(x, xi)) / _pow(xi, pv - 2.0)
    bad = ~(np.isfinite(lower) & (lower > 0))
    c = float(np.min(np.where(np.isfinite(lower), lower, -np.inf)))
    return GrowthReport(f"ellipticity {k.name}", c_estimate=c,
                        violations=_violations(x, xi, bad), approximate=k.approximate_derivative)


def validate_comparison(phi, psi, p1_plus, grid=None, label=None):
    """Check ``0 <= (phi + psi) xi^2 <= p1_plus (Phi0 + Psi0)`` over a grid.

    ``comparison_margin`` is the grid infimum of the right gap.  A sample counts as
    violating when the gap is below ``-1e-10`` relative to ``max(1, (phi+psi) xi^2)``.
    """
    grid = grid or SampleGrid.default(phi.exponent.domain)
    x, xi = grid.flat()
    with np.errstate(all="ignore"):
        work = (phi.value(x, xi) + psi.value(x, xi)) * xi * xi
        gap = p1_plus * (phi.density(x, xi) + psi.density(x, xi)) - work
    bad = ~np.isfinite(gap) | (gap < -COMPARISON_TOL * np.maximum(1.0, np.abs(work))) | (work < 0)
    name = label or f"kernel comparison with constant {p1_plus:g}"
    return GrowthReport(name, comparison_margin=float(np.min(gap)), violations=_violations(x, xi, bad))


def flux_estimate_check(k, points, u, v, c=None):
    """Sample the strong monotonicity estimate of the flux.

    On ``{p < 2}`` checks
    ``<F(u) - F(v), u - v> >= c (|u| + |v|)^(p-2) |u - v|^2`` and on
    ``{p >= 2}`` checks ``>= 4^(1-p+) c |u - v|^p``, with ``F(v) =
    phi(x, |v|) v``.  ``c`` defaults to the grid ellipticity constant.

    Parameters
    ----------
    points : (n, N) array
    u, v : (n, M) arrays of vectors
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    u = np.asarray(u, dtype=float).reshape(len(points), -1)
    v = np.asarray(v, dtype=float).reshape(len(points), -1)
    if c is None:
        c = validate_ellipticity(k).c_estimate
    pv = k.exponent(points)
    nu, nv = np.linalg.norm(u, axis=1), np.linalg.norm(v, axis=1)
    fu = k.flux_coefficient(points, nu)[:, None] * u
    fv = k.flux_coefficient(points, nv)[:, None] * v
    diff = u - v
    nd = np.linalg.norm(diff, axis=1)
    lhs = np.sum((fu - fv) * diff, axis=1)
    both_zero = (nu == 0) & (nv == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        low = c * _pow(np.where(both_zero, 1.0, nu + nv), pv - 2.0) * nd ** 2
    high = 4.0 ** (1.0 - k.exponent.p_plus) * c * _pow(nd, pv)
    rhs = np.where(pv < 2.0, np.where(both_zero, 0.0, low), high)
    slack = 1e-12 * (np.linalg.norm(fu, axis=1) + np.linalg.norm(fv, axis=1)) * nd
    bad = lhs < rhs - slack
    failures = [f"sample {i}: lhs={lhs[i]:.6g} < rhs={rhs[i]:.6g}" for i in np.flatnonzero(bad)[:20]]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.inf)
    details = {"c": c, "samples": len(points), "violations": int(bad.sum()),
               "min lhs/rhs": float(np.min(ratio)) if len(ratio) else np.inf}
    return ValidationReport(f"flux estimate {k.name}", not bad.any(), failures, details)
