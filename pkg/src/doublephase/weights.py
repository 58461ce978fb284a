"""Minimizing ``lambda*(w)`` over a finite family of weights."""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .exceptions import DomainError
from .mesh import GridFunction
from .rayleigh import QuotientConfig, minimize_r1

OPTIMIZE_CSV_HEADER = ["weight_name", "lambda_star", "iterations", "restarts_used"]


@dataclass
class WeightFamily:
    """Named weights on a common mesh; ``bound`` is the uniform sup-norm bound."""

    names: list
    weights: list

    def __post_init__(self):
        if not self.names or len(self.names) != len(self.weights):
            raise DomainError("a weight family needs at least one named weight")
        if len(set(self.names)) != len(self.names):
            raise DomainError("weight names must be unique")
        meshes = {id(w.mesh) for w in self.weights}
        if len(meshes) != 1:
            raise DomainError("all weights must share one mesh")

    @property
    def bound(self):
        return max(w.max_abs() for w in self.weights)

    def __len__(self):
        return len(self.names)

    def items(self):
        return zip(self.names, self.weights)


@dataclass
class OptimizeResult:
    """Winning weight and the full table; unpacks as ``(name, value, table)``."""

    name: str
    value: float
    table: list

    def __iter__(self):
        return iter((self.name, self.value, self.table))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(OPTIMIZE_CSV_HEADER)
            for row in self.table:
                writer.writerow([row[0], format(row[1], ".17g"), row[2], row[3]])


def lambda_star_result(w, spec_template, cfg=None, warm_start=None):
    if not isinstance(w, GridFunction) or w.mesh is not spec_template.mesh:
        raise DomainError("weight must be a grid function on the template mesh")
    return minimize_r1(spec_template.with_weight(w), cfg or QuotientConfig(), warm_start)


def lambda_star_of(w, spec_template, cfg=None, warm_start=None):
    """``lambda*`` of the template problem with its weight replaced by ``w``."""
    return lambda_star_result(w, spec_template, cfg, warm_start).value


def optimize(family, spec_template, cfg=None, warm=True):
    """Evaluate ``lambda*(w)`` for every member and return the minimizer.

    Members are processed in listed order; each solve may start from the
    previous minimizer in addition to the usual restarts.  Ties go to the
    first-listed weight.
    """
    cfg = cfg or QuotientConfig()
    table = []
    previous = None
    for name, w in family.items():
        res = lambda_star_result(w, spec_template, cfg, previous if warm else None)
        table.append((name, res.value, res.iterations, res.restarts_used))
        previous = res.minimizer
    best = min(range(len(table)), key=lambda i: (table[i][1], i))
    return OptimizeResult(table[best][0], table[best][1], table)
