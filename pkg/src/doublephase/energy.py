"""Discrete energies, their Gâteaux derivatives and the weak residual.

For a nodal vector ``u`` on a :class:`~doublephase.mesh.Mesh` the module
evaluates

* ``Phi(u) = int Phi0(x, |Du|)`` and ``Psi(u)`` likewise,
* ``Theta(u) = int w(x) Theta0(x, |u|)``,
* ``E2(u) = int |u|^r / r + |u|^s / s``,

together with the pieces of the second Rayleigh quotient
``Num2 = int (phi + psi)(x, |Du|) |Du|^2 + int w theta(x, |u|) u^2`` and
``Den2 = int |u|^r + |u|^s``.  Gradients are exact derivatives of the
quadrature sums, so the weak residual equals the gradient of
``E1 - lam E2`` and ``R . u = Num2 - lam Den2`` up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DomainError, NonFiniteValue
from .exponent import ExponentField, PowerPair, Domain, validate_ordering, validate_subcritical
from .kernels import make_kernel
from .mesh import GridFunction, Mesh
from .modular import sobolev_norm

ENERGY_CSV_HEADER = "phi,psi,theta,e2,total,lambda"


@dataclass(eq=False)
class ProblemSpec:
    """A discretized instance of the double phase eigenvalue problem.

    ``phi``, ``psi`` and ``theta`` carry the exponents ``p1``, ``p2`` and
    ``p3``.  With ``check=True`` the exponent ordering, the subcritical
    gap, ``r >= 2`` and finiteness of the weight are enforced.
    """

    mesh: Mesh
    phi: object
    psi: object
    theta: object
    weight: GridFunction
    powers: PowerPair
    check: bool = True

    def __post_init__(self):
        if self.weight.mesh is not self.mesh:
            raise DomainError("weight must live on the problem mesh")
        if self.check:
            problems = [rep for rep in self.validate() if not rep.passed]
            if problems:
                msgs = "; ".join(msg for rep in problems for msg in rep.failures)
                raise DomainError(f"invalid problem: {msgs}")

    def validate(self):
        from .exponent import ValidationReport

        reports = [
            validate_ordering(self.p1, self.p2, self.p3, self.powers),
            validate_subcritical(self.p1, self.p2),
        ]
        ok = self.powers.r >= 2.0
        reports.append(ValidationReport(
            "reaction power r >= 2", ok, [] if ok else [f"r = {self.powers.r} < 2"], {"r": self.powers.r}))
        finite = np.all(np.isfinite(self.weight.values))
        reports.append(ValidationReport(
            "bounded weight", bool(finite), [] if finite else ["weight is not finite"],
            {"max|w|": self.weight.max_abs()}))
        return reports

    @property
    def p1(self):
        return self.phi.exponent

    @property
    def p2(self):
        return self.psi.exponent

    @property
    def p3(self):
        return self.theta.exponent

    @property
    def n(self):
        return self.mesh.n_interior

    def with_weight(self, weight):
        return ProblemSpec(self.mesh, self.phi, self.psi, self.theta, weight, self.powers, check=False)

    @cached_property
    def _quad(self):
        points, weights = self.mesh.quadrature()
        nq = weights.shape[1]
        flat = points.reshape(-1, self.mesh.dim)
        return flat, weights.ravel(), nq, self.weight.at_quad().ravel()


@dataclass
class EnergyBreakdown:
    phi_value: float
    psi_value: float
    theta_value: float
    e2_value: float

    @property
    def e1_value(self):
        return self.phi_value + self.psi_value + self.theta_value

    def total(self, lam):
        return self.e1_value - lam * self.e2_value

    def csv_row(self, lam):
        vals = (self.phi_value, self.psi_value, self.theta_value, self.e2_value, self.total(lam), lam)
        return ",".join(format(v, ".17g") for v in vals)


@dataclass
class Pieces:
    """Raw assembly output for one nodal vector."""

    phi: float
    psi: float
    theta: float
    e2: float
    grad_e1: np.ndarray = None
    grad_e2: np.ndarray = None
    num2: float = None
    den2: float = None
    grad_num2: np.ndarray = None
    grad_den2: np.ndarray = None

    @property
    def e1(self):
        return self.phi + self.psi + self.theta


def _check(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteValue("energy integrand is not finite")


def assemble(spec, values, gradient=True, second=False):
    """Evaluate energies (and optionally gradients) at nodal ``values``."""
    mesh = spec.mesh
    X, W, nq, wq = spec._quad
    r, s = spec.powers.r, spec.powers.s
    uq = mesh.values_at_quad(values).ravel()
    au = np.abs(uq)
    G = mesh.element_gradients(values)
    xi = np.repeat(np.linalg.norm(G, axis=1), nq)

    phi_d = spec.phi.density(X, xi)
    psi_d = spec.psi.density(X, xi)
    theta_d = spec.theta.density(X, au)
    with np.errstate(under="ignore"):
        ur, us = au ** r, au ** s
    _check(phi_d, psi_d, theta_d, ur, us)
    out = Pieces(
        phi=float(W @ phi_d),
        psi=float(W @ psi_d),
        theta=float(W @ (wq * theta_d)),
        e2=float(W @ (ur / r + us / s)),
    )
    need_coef = gradient or second
    if need_coef:
        a = spec.phi.flux_coefficient(X, xi) + spec.psi.flux_coefficient(X, xi)
        t = spec.theta.flux_coefficient(X, au)
        # |u|^(q-2) u written as |u|^q / u to stay finite at u = 0 for q >= 2
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            react_r = np.where(au > 0, ur / np.where(au > 0, au * au, 1.0), 0.0) * uq
            react_s = np.where(au > 0, us / np.where(au > 0, au * au, 1.0), 0.0) * uq
        _check(a, t)
    if gradient:
        A = (W * a).reshape(-1, nq).sum(axis=1)
        out.grad_e1 = mesh.assemble_flux(A[:, None] * G) + mesh.assemble_load((wq * t * uq).reshape(-1, nq))
        out.grad_e2 = mesh.assemble_load((react_r + react_s).reshape(-1, nq))
    if second:
        xi2 = xi * xi
        out.num2 = float(W @ (a * xi2) + W @ (wq * t * uq * uq))
        out.den2 = float(W @ (ur + us))
        da = (spec.phi.slope_coefficient(X, xi) + spec.psi.slope_coefficient(X, xi)) + 2.0 * a
        dt = spec.theta.slope_coefficient(X, au) + 2.0 * t
        _check(da, dt)
        B = (W * da).reshape(-1, nq).sum(axis=1)
        out.grad_num2 = mesh.assemble_flux(B[:, None] * G) + mesh.assemble_load((wq * dt * uq).reshape(-1, nq))
        out.grad_den2 = mesh.assemble_load((r * react_r + s * react_s).reshape(-1, nq))
    return out


def _values(u, spec):
    if u.mesh is not spec.mesh:
        raise DomainError("grid function is not on the problem mesh")
    return u.values


def energies(u, spec):
    """Return the four energy components of ``u`` as an :class:`EnergyBreakdown`."""
    p = assemble(spec, _values(u, spec), gradient=False)
    return EnergyBreakdown(p.phi, p.psi, p.theta, p.e2)


def total_energy(u, spec, lam):
    """``Phi + Psi + Theta - lam E2``."""
    return energies(u, spec).total(lam)


def gateaux_gradient(u, spec, lam):
    """Dual coefficients ``g_i = <E'(u), phi_i>`` of ``E = E1 - lam E2``."""
    p = assemble(spec, _values(u, spec))
    return GridFunction(spec.mesh, p.grad_e1 - lam * p.grad_e2)


def reaction_vector(u, spec):
    """Dual coefficients of ``int (|u|^(r-2) + |u|^(s-2)) u phi_i``."""
    return assemble(spec, _values(u, spec)).grad_e2


def residual_scale(u, spec):
    """``1 + |u|`` with the norm of the zero-trace Sobolev space of ``p2``."""
    return 1.0 + sobolev_norm(u, spec.p2)


def weak_residual(u, spec, lam):
    """Weak-form residual vector and its scale-free max norm.

    The vector tests the equation against every interior hat function; the
    norm is ``max |R_i| / (1 + |u|_{W^{1,p2}})``.
    """
    vector = gateaux_gradient(u, spec, lam).values
    norm = float(np.max(np.abs(vector), initial=0.0)) / residual_scale(u, spec)
    return norm, vector


def second_quotient_parts(u, spec):
    """``(Num2, Den2)`` of the second Rayleigh quotient."""
    p = assemble(spec, _values(u, spec), gradient=False, second=True)
    return p.num2, p.den2


def default_problem(elements=256, weight=0.0, kernels=("power", "power", "power"),
                    exponents=(2.0, 5.0, 3.5), powers=(3.0, 4.0), domain=None):
    """Reference 1D instance on ``[0, 1]``: p1 = 2, p2 = 5, p3 = 3.5, r = 3, s = 4.

    ``weight`` may be a constant or a callable of the ``(n, N)`` node array.
    """
    from .mesh import interpolate

    domain = domain or Domain.interval(0.0, 1.0)
    mesh = Mesh(domain, elements)
    fields = [ExponentField.const(p, domain) if np.isscalar(p) else p for p in exponents]
    phi, psi, theta = (make_kernel(k, f) for k, f in zip(kernels, fields))
    w = interpolate(weight if callable(weight) else (lambda pts: float(weight)), mesh)
    return ProblemSpec(mesh, phi, psi, theta, w, PowerPair(*powers))
