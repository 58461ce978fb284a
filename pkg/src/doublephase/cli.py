"""Batch driver: ``doublephase <command> --config <file> [options]``.

Commands
--------
validate
    Check exponent ordering, the subcritical gap and the kernel hypotheses.
    Prints a report and writes nothing.
thresholds
    Compute ``lambda*`` and ``lambda_*`` with their minimizers and histories.
solve --lambda V
    Minimize ``E1 - V E2``.  ``V`` may be a number or ``<k>*star`` /
    ``<k>*lower`` for a multiple of a computed threshold.
optimize-weight --weights FILE
    Minimize ``lambda*(w)`` over the weights listed in ``FILE``.

Exponents and weights are given as ``const <value>`` or ``expr "<source>"``.
Expressions use ``+ - * / ^``, parentheses, ``sin cos exp abs``, the
constant ``pi`` and the coordinates ``x`` and ``y``; kernel expressions
may also use ``xi`` and ``p``.

Exit codes: 0 success, 1 domain or convergence failure, 2 usage or parse
failure.  Results go to ``<out>/<command>/<config name>/`` together with a
``manifest.txt`` holding the resolved configuration.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, read_weight_family
from .exceptions import ConfigError, ConvergenceError, DomainError, PreconditionError
from .kernels import SampleGrid, validate_ellipticity, validate_growth, validate_comparison
from .mesh import write_csv
from .rayleigh import HISTORY_HEADER, certify_nonexistence, minimize_r1, minimize_r2, solve_at
from .weights import optimize

THRESHOLDS_HEADER = "quantity,value,residual_norm,iterations,best_restart,restarts_used,minimizer_file"
SOLVE_HEADER = ("lambda,status,region,residual_norm,r1,r2,objective,iterations,restarts_used,"
                "lambda_star,lambda_lower")


def _g(x):
    return format(float(x), ".17g")


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def build_parser():
    parser = _Parser(prog="doublephase", description=__doc__.split("\n\n")[0],
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="problem configuration file")
    common.add_argument("--out", default="results", help="output root (default: results)")
    common.add_argument("--seed", type=int, help="override solver.seed")
    common.add_argument("--mesh", help="override problem.mesh, e.g. 128 or 32,32")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common], help="check hypotheses, write nothing")
    sub.add_parser("thresholds", parents=[common], help="compute lambda* and lambda_*")
    solve = sub.add_parser("solve", parents=[common], help="find an eigenpair for a given lambda")
    solve.add_argument("--lambda", dest="lam", required=True,
                       help="number, or <k>*star / <k>*lower")
    opt = sub.add_parser("optimize-weight", parents=[common], help="minimize lambda*(w) over a family")
    opt.add_argument("--weights", required=True, help="weight family file")
    return parser


def _load(args):
    cfg = RunConfig.from_file(args.config)
    if args.mesh is not None and not re.fullmatch(r"\s*\d+\s*(,\s*\d+\s*)?", args.mesh):
        raise ConfigError(f"--mesh expects n or n,m, got {args.mesh!r}")
    return cfg.override(seed=args.seed, mesh=args.mesh)


def _outdir(args, cfg):
    label = Path(args.config).stem
    if args.command == "solve":
        label += "_lambda_" + re.sub(r"[^\w.+-]", "x", args.lam.strip())
    path = Path(args.out) / args.command / label
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "manifest.txt", "w") as fh:
        fh.write(f"command = {args.command}\n")
        if args.command == "solve":
            fh.write(f"lambda = {args.lam}\n")
        if args.command == "optimize-weight":
            fh.write(f"weights = {args.weights}\n")
        fh.write(cfg.resolved_text())
    return path


def _write_histories(path, prefix, histories):
    names = []
    for k, hist in enumerate(histories):
        name = f"{prefix}_restart{k}.csv"
        with open(path / name, "w") as fh:
            fh.write(HISTORY_HEADER + "\n")
            for it, f, res, step in hist:
                fh.write(f"{it},{_g(f)},{_g(res)},{_g(step)}\n")
        names.append(name)
    return names


def cmd_validate(cfg, out=None):
    """Print every check; return 0 iff the mandatory ones pass."""
    out = out or sys.stdout
    spec = cfg.build(check=False)
    grid = SampleGrid.default(spec.mesh.domain)
    mandatory = list(spec.validate())
    for label, k in (("phi", spec.phi), ("psi", spec.psi), ("theta", spec.theta)):
        for rep in (validate_growth(k, grid), validate_ellipticity(k, grid)):
            rep.name = f"{label}: {rep.name}"
            mandatory.append(rep)
    p1p, p2p = spec.p1.p_plus, spec.p2.p_plus
    literal = validate_comparison(spec.phi, spec.psi, p1p, grid, label=f"kernel comparison with p1+ = {p1p:g} (literal)")
    variant = validate_comparison(spec.phi, spec.psi, p2p, grid, label=f"kernel comparison with p2+ = {p2p:g} (variant)")
    for rep in mandatory:
        print("\n".join(rep.lines()), file=out)
    print("advisory checks (do not affect the exit code):", file=out)
    for rep in (literal, variant):
        lines = rep.lines()
        if not rep.passed:
            lines[0] = lines[0].replace("[FAIL]", "[WARN]")
        print("\n".join(lines), file=out)
    ok = all(rep.passed for rep in mandatory)
    print("valid" if ok else "invalid: mandatory checks failed", file=out)
    return 0 if ok else 1


def _thresholds(spec, cfg):
    return minimize_r1(spec, cfg.solver), minimize_r2(spec, cfg.solver)


def cmd_thresholds(cfg, path, out=None):
    out = out or sys.stdout
    spec = cfg.build()
    upper, lower = _thresholds(spec, cfg)
    rows = []
    for name, prefix, res in (("lambda_star", "r1", upper), ("lambda_lower", "r2", lower)):
        fname = f"{prefix}_minimizer.csv"
        write_csv(res.minimizer, path / fname)
        _write_histories(path, f"{prefix}_history", res.histories)
        rows.append(f"{name},{_g(res.value)},{_g(res.residual_norm)},{res.iterations},"
                    f"{res.restart},{res.restarts_used},{fname}")
    with open(path / "thresholds.csv", "w") as fh:
        fh.write(THRESHOLDS_HEADER + "\n" + "\n".join(rows) + "\n")
    print(f"lambda_star  = {upper.value:.17g}", file=out)
    print(f"lambda_lower = {lower.value:.17g}", file=out)
    print(f"wrote {path}", file=out)
    return 0


def parse_lambda(text, upper=None, lower=None):
    """Number or ``<k>*star`` / ``<k>*lower``; thresholds are callables evaluated on demand."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*\*\s*(star|lower)\s*", text)
    try:
        if m:
            factor = float(m.group(1))
            return factor * (upper() if m.group(2) == "star" else lower())
        return float(text)
    except ValueError:
        raise ConfigError(f"--lambda expects a number or <k>*star / <k>*lower, got {text!r}") from None


def region_of(lam, lambda_star, lambda_lower):
    if lam < lambda_lower:
        return "below_lower"
    if lam < lambda_star:
        return "indeterminate"
    return "eigenpair_expected"


def cmd_solve(cfg, lam_text, path, out=None):
    out = out or sys.stdout
    spec = cfg.build()
    upper, lower = _thresholds(spec, cfg)
    lam = parse_lambda(lam_text, lambda: upper.value, lambda: lower.value)
    region = region_of(lam, upper.value, lower.value)
    res = solve_at(lam, spec, cfg.solver)
    write_csv(res.u, path / "eigenfunction.csv")
    _write_histories(path, "history", res.histories)
    vals = [_g(lam), res.status, region, _g(res.residual_norm), _g(res.r1_value), _g(res.r2_value),
            _g(res.objective), str(res.iterations), str(res.restarts_used), _g(upper.value), _g(lower.value)]
    with open(path / "result.csv", "w") as fh:
        fh.write(SOLVE_HEADER + "\n" + ",".join(vals) + "\n")
    print(f"lambda = {lam:.17g}  region = {region}  status = {res.status}", file=out)
    print(f"residual = {res.residual_norm:.3g}  lambda_star = {upper.value:.12g}  "
          f"lambda_lower = {lower.value:.12g}", file=out)
    code = 0
    if region == "below_lower":
        cert = certify_nonexistence(lam, spec, cfg.solver, lambda_lower=lower.value)
        text = "\n".join(cert.lines())
        with open(path / "certificate.txt", "w") as fh:
            fh.write(text + "\n")
        print(text, file=out)
        if res.converged:
            print("error: converged eigenpair below lambda_lower contradicts R.u = Num2 - lam Den2",
                  file=sys.stderr)
            code = 1
    elif region == "eigenpair_expected" and res.status != "converged":
        print(f"error: no converged eigenpair at lambda >= lambda_star (status {res.status})",
              file=sys.stderr)
        code = 1
    return code


def cmd_optimize_weight(cfg, weights_path, path, out=None):
    out = out or sys.stdout
    spec = cfg.build()
    family = read_weight_family(weights_path, spec.mesh)
    result = optimize(family, spec, cfg.solver)
    result.write_csv(path / "optimize.csv")
    with open(path / "winner.txt", "w") as fh:
        fh.write(f"{result.name}\n{_g(result.value)}\n")
    for name, value, _, _ in result.table:
        print(f"{name:>20s}  lambda_star = {value:.12g}", file=out)
    print(f"winner: {result.name}", file=out)
    return 0


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except _Usage as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = _load(args)
        cfg.build(check=False)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "optimize-weight" and not os.path.exists(args.weights):
            raise ConfigError(f"cannot read {args.weights}")
        path = _outdir(args, cfg)
        if args.command == "thresholds":
            return cmd_thresholds(cfg, path)
        if args.command == "solve":
            return cmd_solve(cfg, args.lam, path)
        return cmd_optimize_weight(cfg, args.weights, path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ConvergenceError, PreconditionError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
