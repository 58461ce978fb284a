"""Plain-text run configuration.

One ``section.key = value`` assignment per line, ``#`` starts a comment,
expressions are double quoted::

    problem.domain = 0, 1            # or ax, bx, ay, by
    problem.mesh   = 256             # or nx, ny
    problem.phi    = power           # power | mean_curvature | capillarity | expr "..."
    problem.p1     = const 2         # const <v> | expr "<x, y expression>"
    problem.weight = expr "sin(2*pi*x)"
    solver.seed    = 42

Kernel expressions may use ``x``, ``y``, ``xi`` and ``p`` (the matching
exponent).  Weight family files hold ``name = const <v>`` or
``name = expr "..."`` lines.
"""

from __future__ import annotations

import dataclasses
import re
import shlex
from dataclasses import dataclass, field

from .exceptions import ConfigError, DomainError
from .exponent import Domain, ExponentField, PowerPair
from .expr import Expression
from .kernels import BUILTIN_KERNELS, make_expression_kernel, make_kernel
from .mesh import Mesh, interpolate
from .rayleigh import QuotientConfig
from .weights import WeightFamily

PROBLEM_DEFAULTS = {
    "domain": "0, 1",
    "mesh": "256",
    "phi": "power",
    "psi": "power",
    "theta": "power",
    "p1": "const 2",
    "p2": "const 5",
    "p3": "const 3.5",
    "r": "3",
    "s": "4",
    "weight": "const 0",
}
SOLVER_KEYS = {f.name: f.type for f in dataclasses.fields(QuotientConfig)}
_LINE = re.compile(r"^\s*([A-Za-z_][\w-]*)(?:\.([A-Za-z_][\w-]*))?\s*=\s*(.*?)\s*$")


def _strip_comment(line):
    out, quoted = [], False
    for ch in line:
        if ch == '"':
            quoted = not quoted
        if ch == "#" and not quoted:
            break
        out.append(ch)
    return "".join(out)


def parse_assignments(text, sectioned=True):
    """Parse ``key = value`` lines into an ordered list of ``(key, value, lineno)``."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m or (sectioned and m.group(2) is None):
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw.strip()!r}")
        key = f"{m.group(1)}.{m.group(2)}" if m.group(2) else m.group(1)
        if not m.group(3):
            raise ConfigError(f"line {lineno}: missing value for {key}")
        entries.append((key, m.group(3), lineno))
    return entries


def _numbers(value, key):
    try:
        return [float(v) for v in value.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {value!r}") from None


def _tagged(value, key):
    """Split ``const 2`` / ``expr "..."`` / bare number into ``(tag, payload)``."""
    try:
        parts = shlex.split(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    if len(parts) == 1:
        try:
            return "const", float(parts[0])
        except ValueError:
            return "name", parts[0]
    if len(parts) == 2 and parts[0] == "const":
        try:
            return "const", float(parts[1])
        except ValueError:
            raise ConfigError(f"{key}: bad constant {parts[1]!r}") from None
    if len(parts) == 2 and parts[0] == "expr":
        return "expr", parts[1]
    raise ConfigError(f"{key}: expected 'const <value>' or 'expr \"...\"', got {value!r}")


def exponent_from(value, domain, key):
    tag, payload = _tagged(value, key)
    if tag == "const":
        return ExponentField.const(payload, domain)
    if tag == "expr":
        return ExponentField.from_expression(payload, domain)
    raise ConfigError(f"{key}: expected an exponent, got {value!r}")


def scalar_function(value, key):
    """Callable on ``(n, N)`` points from ``const``/``expr`` syntax."""
    tag, payload = _tagged(value, key)
    if tag == "const":
        return lambda pts: payload
    if tag == "expr":
        expr = Expression(payload, ("x", "y"))
        return lambda pts: expr(x=pts[:, 0], y=pts[:, 1] if pts.shape[1] > 1 else 0.0)
    raise ConfigError(f"{key}: expected 'const <value>' or 'expr \"...\"', got {value!r}")


def kernel_from(value, exponent, key):
    tag, payload = _tagged(value, key)
    if tag == "name":
        if payload not in BUILTIN_KERNELS:
            raise ConfigError(f"{key}: unknown kernel {payload!r}; choose from {sorted(BUILTIN_KERNELS)}")
        return make_kernel(payload, exponent)
    if tag == "expr":
        return make_expression_kernel(payload, exponent)
    raise ConfigError(f"{key}: expected a kernel name or expr \"...\", got {value!r}")


@dataclass
class RunConfig:
    problem: dict = field(default_factory=lambda: dict(PROBLEM_DEFAULTS))
    solver: QuotientConfig = field(default_factory=QuotientConfig)
    source: str = "<defaults>"

    @classmethod
    def from_text(cls, text, source="<string>"):
        problem = dict(PROBLEM_DEFAULTS)
        solver = {}
        for key, value, lineno in parse_assignments(text):
            section, name = key.split(".", 1)
            if section == "problem" and name in PROBLEM_DEFAULTS:
                problem[name] = value
            elif section == "solver" and name in SOLVER_KEYS:
                kind = int if SOLVER_KEYS[name] in (int, "int") else float
                try:
                    solver[name] = kind(float(value)) if kind is int else float(value)
                except ValueError:
                    raise ConfigError(f"line {lineno}: {key} expects a number, got {value!r}") from None
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            qc = QuotientConfig(**solver)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cls(problem, qc, source)

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from None
        return cls.from_text(text, str(path))

    def override(self, seed=None, mesh=None):
        if seed is not None:
            self.solver = dataclasses.replace(self.solver, seed=int(seed))
        if mesh is not None:
            self.problem["mesh"] = mesh
        return self

    def domain(self):
        vals = _numbers(self.problem["domain"], "problem.domain")
        if len(vals) not in (2, 4):
            raise ConfigError("problem.domain needs 2 (interval) or 4 (rectangle) numbers")
        try:
            return Domain(tuple(zip(vals[::2], vals[1::2])))
        except DomainError as exc:
            raise ConfigError(f"problem.domain: {exc}") from None

    def mesh(self):
        domain = self.domain()
        counts = [int(v) for v in _numbers(self.problem["mesh"], "problem.mesh")]
        if len(counts) == 1:
            counts = counts * domain.dim
        try:
            return Mesh(domain, tuple(counts))
        except DomainError as exc:
            raise ConfigError(f"problem.mesh: {exc}") from None

    def build(self, check=True):
        """Resolve into a :class:`~doublephase.energy.ProblemSpec`."""
        from .energy import ProblemSpec

        mesh = self.mesh()
        domain = mesh.domain
        try:
            p1, p2, p3 = (exponent_from(self.problem[k], domain, f"problem.{k}") for k in ("p1", "p2", "p3"))
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        phi = kernel_from(self.problem["phi"], p1, "problem.phi")
        psi = kernel_from(self.problem["psi"], p2, "problem.psi")
        theta = kernel_from(self.problem["theta"], p3, "problem.theta")
        r = _numbers(self.problem["r"], "problem.r")
        s = _numbers(self.problem["s"], "problem.s")
        if len(r) != 1 or len(s) != 1:
            raise ConfigError("problem.r and problem.s take one number each")
        try:
            powers = PowerPair(r[0], s[0])
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        weight = interpolate(scalar_function(self.problem["weight"], "problem.weight"), mesh)
        return ProblemSpec(mesh, phi, psi, theta, weight, powers, check=check)

    def resolved_text(self):
        lines = [f"# resolved from {self.source}"]
        lines += [f"problem.{k} = {v}" for k, v in self.problem.items()]
        lines += [f"solver.{f.name} = {getattr(self.solver, f.name)}" for f in dataclasses.fields(self.solver)]
        return "\n".join(lines) + "\n"


def read_weight_family(path, mesh):
    """Weight family file: one ``name = const <v>`` / ``name = expr "..."`` per line."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    names, weights = [], []
    for key, value, _ in parse_assignments(text, sectioned=False):
        names.append(key)
        weights.append(interpolate(scalar_function(value, key), mesh))
    if not names:
        raise ConfigError(f"{path}: no weights defined")
    try:
        return WeightFamily(names, weights)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
