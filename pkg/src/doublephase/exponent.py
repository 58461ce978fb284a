"""Variable exponents on rectangular domains and their structural checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError, NonFiniteExponent
from .expr import Expression

DEFAULT_SAMPLES = 1001
P_MARGIN = 1e-9


@dataclass(frozen=True)
class Domain:
    """An interval (N=1) or an axis-aligned rectangle (N=2)."""

    bounds: tuple

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        if len(bounds) not in (1, 2):
            raise DomainError("only 1D intervals and 2D rectangles are supported")
        for a, b in bounds:
            if not a < b:
                raise DomainError(f"empty axis [{a}, {b}]")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def interval(cls, a=0.0, b=1.0):
        return cls(((a, b),))

    @classmethod
    def rectangle(cls, ax=0.0, bx=1.0, ay=0.0, by=1.0):
        return cls(((ax, bx), (ay, by)))

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def kind(self):
        return "interval" if self.dim == 1 else "rectangle"

    @property
    def measure(self):
        return math.prod(b - a for a, b in self.bounds)

    def sample_points(self, samples):
        """Uniform tensor grid with ``samples`` points per axis, corners included."""
        if samples < 2:
            raise DomainError("need at least 2 samples per axis")
        axes = [np.linspace(a, b, samples) for a, b in self.bounds]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class PowerPair:
    """The reaction powers ``r <= s``."""

    r: float
    s: float

    def __post_init__(self):
        if not self.r <= self.s:
            raise DomainError(f"need r <= s, got r={self.r}, s={self.s}")


class ExponentField:
    """A continuous exponent ``p(x) > 1`` on a domain.

    Parameters
    ----------
    evaluator : callable
        Maps an ``(n, N)`` array of points to ``n`` exponent values.
    domain : Domain
    samples : int
        Points per axis used to estimate ``p_minus`` and ``p_plus``.
    label : str, optional
        Human readable description, echoed in reports.
    """

    def __init__(self, evaluator, domain, samples=DEFAULT_SAMPLES, label=None, constant=None):
        self.evaluator = evaluator
        self.domain = domain
        self.label = label or getattr(evaluator, "__name__", "p(x)")
        self.constant = None if constant is None else float(constant)
        self._bounds_cache = {}
        self.p_minus, self.p_plus = bounds(self, 2 if self.constant is not None else samples)
        if self.p_minus <= 1.0 + P_MARGIN:
            raise DomainError(f"exponent {self.label} must exceed 1, found inf p = {self.p_minus}")

    @classmethod
    def const(cls, value, domain):
        value = float(value)

        def evaluator(points):
            return np.full(np.shape(points)[0], value)

        return cls(evaluator, domain, label=f"const {value:g}", constant=value)

    @classmethod
    def from_expression(cls, source, domain, samples=DEFAULT_SAMPLES):
        expr = Expression(source, ("x", "y"))

        def evaluator(points):
            points = np.asarray(points, dtype=float)
            y = points[:, 1] if points.shape[1] > 1 else 0.0
            return expr(x=points[:, 0], y=y)

        return cls(evaluator, domain, samples=samples, label=source)

    @property
    def is_constant(self):
        return self.constant is not None

    def __call__(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.constant is not None:
            return np.full(points.shape[0], self.constant)
        return np.asarray(self.evaluator(points), dtype=float).reshape(points.shape[0])

    def conjugate_field(self):
        """Pointwise conjugate exponent ``p/(p-1)``."""
        if self.constant is not None:
            return ExponentField.const(conjugate(self.constant), self.domain)
        parent = self

        def evaluator(points):
            p = parent(points)
            return p / (p - 1.0)

        return ExponentField(evaluator, self.domain, label=f"conj({self.label})")

    def __repr__(self):
        return f"ExponentField({self.label!r}, p-={self.p_minus:g}, p+={self.p_plus:g})"


def bounds(p, samples=DEFAULT_SAMPLES):
    """Sampled infimum and supremum of an exponent field."""
    if samples < 2:
        raise DomainError("need at least 2 samples per axis")
    if samples in p._bounds_cache:
        return p._bounds_cache[samples]
    values = p(p.domain.sample_points(samples))
    if not np.all(np.isfinite(values)):
        raise NonFiniteExponent(f"exponent {p.label} is not finite on the sample grid")
    result = (float(values.min()), float(values.max()))
    p._bounds_cache[samples] = result
    return result


def conjugate(p_value):
    """Hölder conjugate ``p/(p-1)``."""
    if not p_value > 1:
        raise DomainError(f"conjugate exponent needs p > 1, got {p_value}")
    return p_value / (p_value - 1.0)


class _Unbounded:
    """Sentinel for an infinite critical exponent."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __float__(self):
        return math.inf

    def __repr__(self):
        return "UNBOUNDED"


UNBOUNDED = _Unbounded()


def critical_exponent(p_value, dim):
    """Sobolev critical exponent ``N p / (N - p)``, or ``UNBOUNDED`` when p >= N."""
    if p_value < dim:
        return dim * p_value / (dim - p_value)
    return UNBOUNDED


@dataclass
class ValidationReport:
    name: str
    passed: bool
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def lines(self):
        status = "PASS" if self.passed else "FAIL"
        out = [f"[{status}] {self.name}"]
        out += [f"    {k} = {v}" for k, v in self.details.items()]
        out += [f"    ! {msg}" for msg in self.failures]
        return out


def validate_ordering(p1, p2, p3, rs):
    """Check ``p1+ < r <= p3- <= p3+ <= s < p2-`` on the sampled bounds."""
    r, s = rs.r, rs.s
    checks = [
        ("p1+ < r", p1.p_plus < r),
        ("r <= p3-", r <= p3.p_minus),
        ("p3- <= p3+", p3.p_minus <= p3.p_plus),
        ("p3+ <= s", p3.p_plus <= s),
        ("s < p2-", s < p2.p_minus),
    ]
    failures = [f"{name} violated (ordering condition p1+ < r <= p3- <= p3+ <= s < p2-)"
                for name, ok in checks if not ok]
    details = {
        "p1+": p1.p_plus, "r": r, "p3-": p3.p_minus, "p3+": p3.p_plus,
        "s": s, "p2-": p2.p_minus,
    }
    return ValidationReport("exponent ordering", not failures, failures, details)


def validate_subcritical(p1, p2, samples=DEFAULT_SAMPLES):
    """Check ``min_x (p1*(x) - p2(x)) > 0`` on a sample grid."""
    domain = p1.domain
    if p1.is_constant and p2.is_constant:
        samples = 2
    points = domain.sample_points(samples)
    a, b = p1(points), p2(points)
    finite = a < domain.dim
    if np.any(finite):
        crit = domain.dim * a[finite] / (domain.dim - a[finite])
        gap = float(np.min(crit - b[finite]))
    else:
        gap = UNBOUNDED
    passed = gap is UNBOUNDED or gap > 0
    failures = [] if passed else [f"subcritical gap min(p1* - p2) = {gap:g} is not positive"]
    return ValidationReport("subcritical gap", passed, failures, {"gap": gap, "N": domain.dim})
