"""Finite element toolkit for double phase eigenvalue problems with variable exponents.

The package discretizes the Dirichlet problem

    -div(phi(x, |Du|) Du + psi(x, |Du|) Du) + w(x) theta(x, |u|) u
        = lam (|u|^(r-2) u + |u|^(s-2) u)

with P1 elements on intervals and rectangles, computes the thresholds
``lambda*`` (infimum of the first Rayleigh quotient) and ``lambda_*``
(infimum of the second), finds eigenpairs for ``lam >= lambda*``,
certifies nonexistence for ``lam < lambda_*`` and minimizes
``lambda*(w)`` over finite weight families.
"""

from .exceptions import (
    ConfigError,
    ConvergenceError,
    DomainError,
    DoublePhaseError,
    MaxIterations,
    NonFiniteExponent,
    NonFiniteValue,
    PreconditionError,
    ZeroDenominator,
)
from .expr import Expression
from .exponent import (
    UNBOUNDED,
    Domain,
    ExponentField,
    PowerPair,
    ValidationReport,
    bounds,
    conjugate,
    critical_exponent,
    validate_ordering,
    validate_subcritical,
)
from .mesh import GridFunction, Mesh, integrate, interpolate, read_csv, write_csv
from .modular import (
    gradient_norm,
    holder_pairing,
    luxemburg_norm,
    modular,
    sobolev_norm,
)
from .kernels import (
    BUILTIN_KERNELS,
    GrowthReport,
    KernelSpec,
    SampleGrid,
    make_expression_kernel,
    make_kernel,
    flux_estimate_check,
    validate_ellipticity,
    validate_growth,
    validate_comparison,
)
from .energy import (
    EnergyBreakdown,
    ProblemSpec,
    default_problem,
    energies,
    gateaux_gradient,
    total_energy,
    weak_residual,
)
from .rayleigh import (
    CertificateReport,
    EigenResult,
    QuotientConfig,
    QuotientResult,
    certify_nonexistence,
    minimize_r1,
    minimize_r2,
    r1,
    r2,
    solve_at,
)
from .weights import OptimizeResult, WeightFamily, lambda_star_of, optimize
from .config import RunConfig, read_weight_family

__version__ = "0.1.0"
