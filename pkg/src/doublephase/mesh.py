"""Uniform P1 finite element meshes with a zero boundary trace.

1D meshes are split into equal segments, 2D rectangles into equal cells
each cut into two triangles along the lower-left to upper-right diagonal.
Every element carries a constant gradient, which is what the energy
assembly relies on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .exceptions import DomainError, NonFiniteValue

DEFAULT_ELEMENTS_1D = 256
DEFAULT_ELEMENTS_2D = (64, 64)


@dataclass(frozen=True)
class QuadratureRule:
    """Reference rule given in barycentric coordinates.

    ``weights`` sum to one; scaled by the element measure they integrate
    over the physical element.
    """

    bary: np.ndarray
    weights: np.ndarray
    name: str = ""

    @property
    def size(self):
        return len(self.weights)


def gauss_legendre_rule(n):
    """``n``-point Gauss-Legendre rule on a segment."""
    t, w = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (t + 1.0)
    return QuadratureRule(np.stack([1.0 - s, s], axis=1), 0.5 * w, f"gauss{n}")


def triangle_rule():
    """Symmetric 3-point rule, exact for quadratics."""
    a, b = 2.0 / 3.0, 1.0 / 6.0
    bary = np.array([[a, b, b], [b, a, b], [b, b, a]])
    return QuadratureRule(bary, np.full(3, 1.0 / 3.0), "tri3")


class Mesh:
    """Uniform simplicial mesh of a :class:`~doublephase.exponent.Domain`.

    Parameters
    ----------
    domain : Domain
    elements : int or tuple of int
        Cells per axis (at least 2 each).
    """

    def __init__(self, domain, elements=None):
        if elements is None:
            elements = DEFAULT_ELEMENTS_1D if domain.dim == 1 else DEFAULT_ELEMENTS_2D
        if np.isscalar(elements):
            elements = (int(elements),) * domain.dim
        elements = tuple(int(n) for n in elements)
        if len(elements) != domain.dim or min(elements) < 2:
            raise DomainError(f"need >= 2 elements on each of {domain.dim} axes, got {elements}")
        self.domain = domain
        self.shape = elements
        self.dim = domain.dim
        if self.dim == 1:
            self._build_1d()
        else:
            self._build_2d()
        on_boundary = np.zeros(len(self.nodes), dtype=bool)
        for axis, (a, b) in enumerate(domain.bounds):
            c = self.nodes[:, axis]
            on_boundary |= np.isclose(c, a) | np.isclose(c, b)
        self.interior = np.flatnonzero(~on_boundary)
        self.node_to_interior = np.full(len(self.nodes), -1)
        self.node_to_interior[self.interior] = np.arange(len(self.interior))
        self._prepare_geometry()
        self.rule = gauss_legendre_rule(4) if self.dim == 1 else triangle_rule()

    def _build_1d(self):
        (a, b), = self.domain.bounds
        n = self.shape[0]
        self.nodes = np.linspace(a, b, n + 1)[:, None]
        j = np.arange(n)
        self.elements = np.stack([j, j + 1], axis=1)

    def _build_2d(self):
        (ax, bx), (ay, by) = self.domain.bounds
        nx, ny = self.shape
        X, Y = np.meshgrid(np.linspace(ax, bx, nx + 1), np.linspace(ay, by, ny + 1), indexing="ij")
        self.nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
        ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        ll = (ix * (ny + 1) + iy).ravel()
        lr = ll + (ny + 1)
        ur = lr + 1
        ul = ll + 1
        lower = np.stack([ll, lr, ur], axis=1)
        upper = np.stack([ll, ur, ul], axis=1)
        self.elements = np.stack([lower, upper], axis=1).reshape(-1, 3)

    def _prepare_geometry(self):
        coords = self.nodes[self.elements]               # (ne, d+1, d)
        jac = coords[:, 1:, :] - coords[:, :1, :]        # (ne, d, d) rows are edge vectors
        det = np.linalg.det(jac)
        factorial = 1 if self.dim == 1 else 2
        self.measures = np.abs(det) / factorial
        inv = np.linalg.inv(jac)                         # columns: reference gradients
        ref = np.vstack([-np.ones((1, self.dim)), np.eye(self.dim)])  # (d+1, d)
        self.basis_gradients = np.einsum("kd,edj->ekj", ref, np.transpose(inv, (0, 2, 1)))

    @property
    def n_elements(self):
        return len(self.elements)

    @property
    def n_interior(self):
        return len(self.interior)

    @property
    def h(self):
        return tuple((b - a) / n for (a, b), n in zip(self.domain.bounds, self.shape))

    def quadrature(self, rule=None):
        """Physical quadrature points ``(ne, nq, d)`` and weights ``(ne, nq)``."""
        rule = rule or self.rule
        if rule is self.rule and "_quad" in self.__dict__:
            return self._quad
        coords = self.nodes[self.elements]
        points = np.einsum("qk,ekd->eqd", rule.bary, coords)
        weights = self.measures[:, None] * rule.weights[None, :]
        if rule is self.rule:
            self._quad = (points, weights)
        return points, weights

    def full(self, values):
        """Nodal vector with boundary zeros from interior values."""
        out = np.zeros(len(self.nodes))
        out[self.interior] = values
        return out

    def values_at_quad(self, values, rule=None):
        rule = rule or self.rule
        return self.full(values)[self.elements] @ rule.bary.T

    def element_gradients(self, values):
        return np.einsum("ek,ekd->ed", self.full(values)[self.elements], self.basis_gradients)

    def scatter(self, local):
        """Sum element-local contributions ``(ne, d+1)`` into interior dofs."""
        total = np.bincount(self.elements.ravel(), weights=local.ravel(), minlength=len(self.nodes))
        return total[self.interior]

    def assemble_load(self, coef, rule=None):
        """Vector ``b_i = sum_q W_q coef_q phi_i(x_q)`` for ``coef`` of shape ``(ne, nq)``."""
        rule = rule or self.rule
        _, weights = self.quadrature(rule)
        return self.scatter((weights * coef) @ rule.bary)

    def assemble_flux(self, flux):
        """Vector ``b_i = sum_e F_e . grad phi_i`` for integrated fluxes ``(ne, d)``."""
        return self.scatter(np.einsum("ed,ekd->ek", flux, self.basis_gradients))

    @cached_property
    def stiffness(self):
        """Interior Laplace stiffness matrix (CSC)."""
        local = self.measures[:, None, None] * np.einsum(
            "ekd,eld->ekl", self.basis_gradients, self.basis_gradients)
        k = self.dim + 1
        rows = np.repeat(self.elements, k, axis=1).ravel()
        cols = np.tile(self.elements, (1, k)).ravel()
        full = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(len(self.nodes),) * 2).tocsr()
        return full[self.interior][:, self.interior].tocsc()

    @cached_property
    def _stiffness_lu(self):
        return splu(self.stiffness)

    def solve_stiffness(self, rhs):
        return self._stiffness_lu.solve(np.asarray(rhs, dtype=float))

    def __repr__(self):
        return f"Mesh({self.domain.kind}, elements={self.shape})"


class GridFunction:
    """Continuous piecewise-linear function vanishing on the boundary.

    Only interior nodal values are stored.
    """

    __array_priority__ = 100

    def __init__(self, mesh, values):
        values = np.array(values, dtype=float).reshape(-1)
        if values.shape[0] != mesh.n_interior:
            raise DomainError(f"expected {mesh.n_interior} interior values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteValue("grid function has non-finite nodal values")
        self.mesh = mesh
        self.values = values

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_interior))

    def full(self):
        return self.mesh.full(self.values)

    def at_quad(self, rule=None):
        return self.mesh.values_at_quad(self.values, rule)

    def gradients(self):
        return self.mesh.element_gradients(self.values)

    def is_zero(self):
        return not np.any(self.values)

    def max_abs(self):
        return float(np.max(np.abs(self.values), initial=0.0))

    def _wrap(self, values):
        return GridFunction(self.mesh, values)

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.mesh is not self.mesh:
                raise DomainError("grid functions live on different meshes")
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, t):
        return self._wrap(self.values * self._other(t))

    __rmul__ = __mul__

    def __truediv__(self, t):
        return self._wrap(self.values / t)

    def __neg__(self):
        return self._wrap(-self.values)

    def __abs__(self):
        return self._wrap(np.abs(self.values))

    def __repr__(self):
        return f"GridFunction({self.mesh!r}, max|u|={self.max_abs():.3g})"


def interpolate(f, mesh):
    """Nodal interpolant of ``f`` with the boundary values forced to zero.

    ``f`` receives an ``(n, N)`` array of points and returns ``n`` values;
    scalars are broadcast.
    """
    points = mesh.nodes[mesh.interior]
    values = np.broadcast_to(np.asarray(f(points), dtype=float), (len(points),))
    if not np.all(np.isfinite(values)):
        raise NonFiniteValue("interpolated function is not finite at some node")
    return GridFunction(mesh, values)


def gradient_at_quad(u, element):
    """Gradient of ``u`` at each quadrature point of one element, ``(nq, N)``."""
    mesh = u.mesh
    if not 0 <= element < mesh.n_elements:
        raise DomainError(f"element {element} out of range")
    nodal = u.full()[mesh.elements[element]]
    grad = nodal @ mesh.basis_gradients[element]
    return np.tile(grad, (mesh.rule.size, 1))


def integrate(density, mesh, rule=None):
    """Quadrature of ``density`` over the mesh.

    ``density`` is either an array of values at the quadrature points,
    shape ``(ne, nq)``, or a callable receiving the ``(ne, nq, N)`` points.
    """
    points, weights = mesh.quadrature(rule)
    values = density(points) if callable(density) else density
    values = np.broadcast_to(np.asarray(values, dtype=float), weights.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        element = int(np.argwhere(bad)[0, 0])
        raise NonFiniteValue(f"density not finite in element {element}", element=element)
    return float(np.sum(weights * values))


def write_csv(u, path):
    """Write all nodes (boundary included) as ``x[,y],value`` rows."""
    mesh = u.mesh
    header = ["x", "value"] if mesh.dim == 1 else ["x", "y", "value"]
    full = u.full()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for coords, value in zip(mesh.nodes, full):
            writer.writerow([format(c, ".17g") for c in coords] + [format(value, ".17g")])


def read_csv(path, mesh):
    """Inverse of :func:`write_csv` for a compatible mesh."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float)
    if data.shape[0] != len(mesh.nodes):
        raise DomainError(f"{path} has {data.shape[0]} rows, mesh has {len(mesh.nodes)} nodes")
    if not np.allclose(data[:, :-1], mesh.nodes):
        raise DomainError(f"{path} node coordinates do not match the mesh")
    return GridFunction(mesh, data[mesh.interior, -1])
