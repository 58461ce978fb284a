"""A tiny arithmetic expression language compiled to vectorized callables.

Grammar: numbers, the variables ``x``, ``y`` (and ``xi`` for kernels),
the constant ``pi``, binary ``+ - * / ^``, unary minus and the functions
``sin``, ``cos``, ``exp``, ``abs``.  ``**`` is accepted as a synonym for
``^``.  Expressions are parsed with :mod:`ast` and only whitelisted nodes
are compiled; anything else raises :class:`ConfigError`.
"""

from __future__ import annotations

import ast
import operator

import numpy as np

from .exceptions import ConfigError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "abs": np.abs,
}
CONSTANTS = {"pi": np.pi}

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: np.power,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}


class Expression:
    """Compiled expression over a fixed set of variable names.

    Calling the object with keyword arrays evaluates it with numpy
    broadcasting; the result always has the broadcast shape of the inputs.
    """

    def __init__(self, source, variables=("x", "y")):
        self.source = source
        self.variables = tuple(variables)
        try:
            tree = ast.parse(source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._fn = self._compile(tree.body)
        self.names = frozenset(
            n.id for n in ast.walk(tree) if isinstance(n, ast.Name)
        ) & set(self.variables)

    def _compile(self, node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            value = float(node.value)
            return lambda env: value
        if isinstance(node, ast.Name):
            name = node.id
            if name in self.variables:
                return lambda env: env[name]
            if name in CONSTANTS:
                value = CONSTANTS[name]
                return lambda env: value
            raise ConfigError(f"unknown name {name!r} in expression {self.source!r}")
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left, right = self._compile(node.left), self._compile(node.right)
            return lambda env: op(left(env), right(env))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            op = _UNARY[type(node.op)]
            arg = self._compile(node.operand)
            return lambda env: op(arg(env))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in FUNCTIONS
            and len(node.args) == 1
            and not node.keywords
        ):
            fn = FUNCTIONS[node.func.id]
            arg = self._compile(node.args[0])
            return lambda env: fn(arg(env))
        raise ConfigError(
            f"unsupported construct {ast.dump(node)[:40]!r} in expression {self.source!r}"
        )

    def __call__(self, **values):
        env = {name: np.asarray(values.get(name, 0.0), dtype=float) for name in self.variables}
        shape = np.broadcast_shapes(*(np.shape(v) for v in env.values()))
        with np.errstate(all="ignore"):
            out = self._fn(env)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    def __repr__(self):
        return f"Expression({self.source!r})"
