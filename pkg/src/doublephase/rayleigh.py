"""Rayleigh quotient thresholds and eigenpairs.

``lambda*`` is the infimum of ``R1 = E1 / E2`` and ``lambda_*`` the
infimum of ``R2 = Num2 / Den2``.  Both are minimized directly, as is the
energy ``N = E1 - lam E2`` whose nontrivial critical points are the
eigenfunctions for ``lam``.

All three minimizations share one descent loop: limited-memory quasi-Newton
directions in the inner product of the Laplace stiffness matrix (a Sobolev
gradient), safeguarded by Armijo backtracking.  Every accepted step
strictly decreases the objective.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .energy import assemble, residual_scale
from .exceptions import ConvergenceError, NonFiniteValue, PreconditionError, ZeroDenominator
from .mesh import GridFunction, interpolate
from .modular import gradient_norm, luxemburg_norm

HISTORY_HEADER = "iter,objective,residual_norm,step_size"
NOISE_FACTOR = 1e-12
WOLFE_CURVATURE = 0.9


@dataclass
class QuotientConfig:
    initial_step: float = 1.0
    armijo_factor: float = 0.5
    sufficient_decrease: float = 1e-4
    max_iterations: int = 20000
    restarts: int = 8
    seed: int = 42
    rel_change_tol: float = 1e-10
    stall_window: int = 5
    residual_stop: float = 1e-8
    tolerance: float = 1e-6
    floor: float = 1e-6
    memory: int = 12
    max_backtracks: int = 60

    def __post_init__(self):
        for name in ("initial_step", "sufficient_decrease", "rel_change_tol", "residual_stop",
                     "tolerance", "floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.armijo_factor < 1:
            raise ValueError("armijo_factor must lie in (0, 1)")
        if self.restarts < 1 or self.max_iterations < 1:
            raise ValueError("need at least one restart and one iteration")


@dataclass
class Trace:
    """Outcome of one descent run."""

    x: np.ndarray
    objective: float
    residual_norm: float
    iterations: int
    reason: str
    history: list = field(default_factory=list)


@dataclass
class QuotientResult:
    """Minimum of a Rayleigh quotient; unpacks as ``(value, minimizer)``."""

    value: float
    minimizer: GridFunction
    residual_norm: float
    iterations: int
    restart: int
    restarts_used: int
    histories: list

    def __iter__(self):
        return iter((self.value, self.minimizer))


@dataclass
class EigenResult:
    lam: float
    u: GridFunction
    residual_norm: float
    r1_value: float
    r2_value: float
    iterations: int
    restarts_used: int
    status: str
    objective: float = np.nan
    histories: list = field(default_factory=list)

    @property
    def converged(self):
        return self.status == "converged"


@dataclass
class CertificateReport:
    lam: float
    lambda_lower: float
    gap: float
    certified: bool
    rays: int
    ray_min: float
    identity_error: float
    notes: list = field(default_factory=list)

    def lines(self):
        status = "CERTIFIED" if self.certified else "NOT CERTIFIED"
        out = [f"[{status}] no eigenfunction for lambda = {self.lam:.10g}",
               f"    lambda_lower = {self.lambda_lower:.10g}, gap = {self.gap:.6g}",
               f"    min N along {self.rays} random rays = {self.ray_min:.6g}",
               f"    max relative error of R.u = Num2 - lam Den2 on samples = {self.identity_error:.3g}"]
        return out + [f"    {n}" for n in self.notes]


# objectives -----------------------------------------------------------------

class _Objective:
    """Value, gradient and stationarity residual on raw nodal vectors.

    ``magnitude`` is the size of the summands entering the value; rounding
    noise in the value is a small multiple of ``eps * magnitude``.
    """

    def __init__(self, spec):
        self.spec = spec
        self.magnitude = 0.0

    def scale(self, x):
        u = GridFunction(self.spec.mesh, x)
        p2 = self.spec.p2
        return luxemburg_norm(u, p2, tol=1e-6) + gradient_norm(u, p2, tol=1e-6)

    def value(self, x):
        raise NotImplementedError

    def value_grad(self, x):
        """Return ``(f, g, r)`` with ``r`` the stationarity vector."""
        raise NotImplementedError


class _R1(_Objective):
    def value(self, x):
        p = assemble(self.spec, x, gradient=False)
        return self._finish(p)

    def _finish(self, p):
        if not p.e2 > 0:
            return np.inf
        self.magnitude = (p.phi + p.psi + abs(p.theta)) / p.e2
        return p.e1 / p.e2

    def value_grad(self, x):
        p = assemble(self.spec, x)
        f = self._finish(p)
        if not np.isfinite(f):
            return np.inf, None, None
        res = p.grad_e1 - f * p.grad_e2
        return f, res / p.e2, res


class _R2(_Objective):
    def value(self, x):
        p = assemble(self.spec, x, gradient=False, second=True)
        return self._finish(p)

    def _finish(self, p):
        if not p.den2 > 0:
            return np.inf
        self.magnitude = abs(p.num2) / p.den2 + abs(p.theta) / p.den2
        return p.num2 / p.den2

    def value_grad(self, x):
        p = assemble(self.spec, x, gradient=False, second=True)
        f = self._finish(p)
        if not np.isfinite(f):
            return np.inf, None, None
        res = p.grad_num2 - f * p.grad_den2
        return f, res / p.den2, res


class _N(_Objective):
    def __init__(self, spec, lam):
        super().__init__(spec)
        self.lam = lam

    def _finish(self, p):
        self.magnitude = p.phi + p.psi + abs(p.theta) + abs(self.lam) * p.e2
        return p.e1 - self.lam * p.e2

    def value(self, x):
        return self._finish(assemble(self.spec, x, gradient=False))

    def value_grad(self, x):
        p = assemble(self.spec, x)
        g = p.grad_e1 - self.lam * p.grad_e2
        return self._finish(p), g, g


def _safe(fn, *args):
    try:
        out = fn(*args)
    except (NonFiniteValue, FloatingPointError, ZeroDivisionError, OverflowError):
        return None
    return out


def _safe_value(obj, x):
    f = _safe(obj.value, x)
    return f if f is not None and np.isfinite(f) else np.inf


# descent --------------------------------------------------------------------

def _descend(obj, x0, cfg, collapse=False, target=None):
    """Armijo-safeguarded L-BFGS in the stiffness inner product.

    Stops early once the objective drops below ``target`` when given.
    """
    mesh = obj.spec.mesh
    x = np.array(x0, dtype=float)
    out = _safe(obj.value_grad, x)
    if out is None or not np.isfinite(out[0]):
        return Trace(x, np.inf, np.inf, 0, "non-finite start")
    f, g, res = out
    scale = obj.scale(x)
    rnorm = float(np.max(np.abs(res))) / (1.0 + scale)
    history = [(0, f, rnorm, 0.0)]
    S, Y, RHO = deque(maxlen=cfg.memory), deque(maxlen=cfg.memory), deque(maxlen=cfg.memory)
    stall = 0
    reason = "max_iterations"
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        if rnorm < cfg.residual_stop:
            reason, it = "residual", it - 1
            break
        if target is not None and f < target:
            reason, it = "target", it - 1
            break
        if collapse and scale < cfg.floor:
            reason, it = "collapsed", it - 1
            break
        d = _two_loop(g, S, Y, RHO, mesh)
        slope = float(g @ d)
        if not slope < 0:
            S.clear(), Y.clear(), RHO.clear()
            d = -mesh.solve_stiffness(g)
            slope = float(g @ d)
        step = cfg.initial_step
        if not S:
            # first direction has no curvature information: cap the relative move
            dn, xn = np.max(np.abs(d)), max(np.max(np.abs(x)), 1e-300)
            step = min(step, 0.5 * xn / dn) if dn > 0 else step
        noise = NOISE_FACTOR * max(obj.magnitude, abs(f))
        accepted = None
        for _ in range(cfg.max_backtracks):
            x_new = x + step * d
            f_new = _safe_value(obj, x_new)
            if f_new <= f + cfg.sufficient_decrease * step * slope:
                accepted = _safe(obj.value_grad, x_new)
                break
            if f_new <= f + noise:
                # values indistinguishable from rounding: approximate Wolfe test on the slope
                trial = _safe(obj.value_grad, x_new)
                if trial is not None and trial[1] is not None:
                    dslope = float(trial[1] @ d)
                    if WOLFE_CURVATURE * slope <= dslope <= (1.0 - 2.0 * cfg.sufficient_decrease) * -slope:
                        accepted = trial
                        break
            step *= cfg.armijo_factor
        if accepted is None or accepted[1] is None:
            reason, it = "line_search", it - 1
            break
        f_new, g_new, res = accepted
        s, yv = x_new - x, g_new - g
        Ky = mesh.stiffness @ s
        sy = float(s @ yv)
        if sy > 1e-12 * float(s @ Ky):
            S.append(s), Y.append(yv), RHO.append(1.0 / sy)
        change = abs(f_new - f) / max(abs(f_new), abs(f), 1e-300)
        x, f, g = x_new, f_new, g_new
        scale = obj.scale(x)
        rnorm = float(np.max(np.abs(res))) / (1.0 + scale)
        history.append((it, f, rnorm, step))
        # quotient stagnation only ends the run once the residual meets the tolerance
        stall = stall + 1 if change < cfg.rel_change_tol and rnorm <= cfg.tolerance else 0
        if stall >= cfg.stall_window:
            reason = "stalled"
            break
    else:
        it = cfg.max_iterations
    return Trace(x, f, rnorm, it, reason, history)


def _two_loop(g, S, Y, RHO, mesh):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(S), reversed(Y), reversed(RHO)):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    z = mesh.solve_stiffness(q)
    if S:
        s, y = S[-1], Y[-1]
        z *= float(s @ y) / float(y @ mesh.solve_stiffness(y))
    for (s, y, rho), a in zip(zip(S, Y, RHO), reversed(alphas)):
        b = rho * float(y @ z)
        z += (a - b) * s
    return -z


# starting points ------------------------------------------------------------

def sine_modes(mesh, count):
    """First ``count`` sine (1D) or tensor-sine (2D) modes, interpolated."""
    bounds = mesh.domain.bounds
    if mesh.dim == 1:
        pairs = [(k,) for k in range(1, count + 1)]
    else:
        pairs = sorted(((k, l) for k in range(1, count + 1) for l in range(1, count + 1)),
                       key=lambda kl: (kl[0] ** 2 + kl[1] ** 2, kl))[:count]
    modes = []
    for ks in pairs:
        def f(pts, ks=ks):
            out = np.ones(len(pts))
            for axis, (k, (a, b)) in enumerate(zip(ks, bounds)):
                out *= np.sin(k * np.pi * (pts[:, axis] - a) / (b - a))
            return out
        modes.append(interpolate(f, mesh).values)
    return modes


def _starts(spec, cfg, warm=None):
    mesh = spec.mesh
    n_modes = min(3, cfg.restarts)
    starts = [] if warm is None else [np.array(warm.values if isinstance(warm, GridFunction) else warm)]
    starts += sine_modes(mesh, n_modes)
    rng = np.random.default_rng(cfg.seed)
    while len(starts) < cfg.restarts + (warm is not None):
        starts.append(rng.uniform(-1.0, 1.0, mesh.n_interior))
    return starts


def _scale_search(obj, v, lo=-4.0, hi=4.0, grid=81, golden_iters=60):
    """Best multiple ``t v``: log-grid scan, then golden section on ``log10 t``."""
    ts = np.linspace(lo, hi, grid)
    vals = np.array([_safe_value(obj, 10.0 ** t * v) for t in ts])
    k = int(np.argmin(vals))
    a, b = ts[max(k - 1, 0)], ts[min(k + 1, grid - 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = _safe_value(obj, 10.0 ** c * v), _safe_value(obj, 10.0 ** d * v)
    for _ in range(golden_iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = _safe_value(obj, 10.0 ** c * v)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = _safe_value(obj, 10.0 ** d * v)
    t = 0.5 * (a + b)
    best = 10.0 ** t if _safe_value(obj, 10.0 ** t * v) <= vals[k] else 10.0 ** ts[k]
    return best * v


# public operations ----------------------------------------------------------

def _quotient_parts(u, spec):
    if u.mesh is not spec.mesh:
        raise ValueError("grid function is not on the problem mesh")
    return assemble(spec, u.values, gradient=False, second=True)


def r1(u, spec):
    """First Rayleigh quotient ``(Phi + Psi + Theta) / E2``."""
    p = _quotient_parts(u, spec)
    if not p.e2 > 0:
        raise ZeroDenominator("R1 is undefined at the zero function")
    return p.e1 / p.e2


def r2(u, spec):
    """Second Rayleigh quotient ``Num2 / Den2``."""
    p = _quotient_parts(u, spec)
    if not p.den2 > 0:
        raise ZeroDenominator("R2 is undefined at the zero function")
    return p.num2 / p.den2


def _final_residual(obj, x):
    f, _, res = obj.value_grad(x)
    u = GridFunction(obj.spec.mesh, x)
    return float(np.max(np.abs(res))) / residual_scale(u, obj.spec)


def _minimize_quotient(obj, spec, cfg, warm=None):
    traces = []
    for v in _starts(spec, cfg, warm):
        x0 = _scale_search(obj, v) if np.any(v) else v
        trace = _descend(obj, x0, cfg)
        if np.isfinite(trace.objective):
            trace.residual_norm = _final_residual(obj, trace.x)
        traces.append(trace)
    ok = [i for i, t in enumerate(traces) if np.isfinite(t.objective) and t.residual_norm <= cfg.tolerance]
    if not ok:
        best = min((t.residual_norm for t in traces), default=np.inf)
        raise ConvergenceError(f"no restart reached residual {cfg.tolerance:g} (best {best:.3g})")
    k = min(ok, key=lambda i: (traces[i].objective, i))
    t = traces[k]
    return QuotientResult(t.objective, GridFunction(spec.mesh, t.x), t.residual_norm,
                          t.iterations, k, len(traces), [tr.history for tr in traces])


def minimize_r1(spec, cfg=None, warm_start=None):
    """``lambda*`` and a minimizer of the first Rayleigh quotient.

    The residual reported is the weak residual at ``lam = lambda*``: a
    minimizer of ``R1`` is an eigenfunction for its own quotient value.
    """
    return _minimize_quotient(_R1(spec), spec, cfg or QuotientConfig(), warm_start)


def minimize_r2(spec, cfg=None, warm_start=None):
    """``lambda_*`` and a minimizer of the second Rayleigh quotient.

    The residual reported is the stationarity residual of ``R2``.
    """
    return _minimize_quotient(_R2(spec), spec, cfg or QuotientConfig(), warm_start)


def solve_at(lam, spec, cfg=None, warm_start=None):
    """Minimize ``N(v) = E1(v) - lam E2(v)`` from several starts.

    Returns the lowest-energy nontrivial converged restart.  When every
    restart collapses below ``cfg.floor`` the status is ``trivial_only``;
    when nontrivial restarts exist but none meets the tolerance it is
    ``max_iter``.
    """
    cfg = cfg or QuotientConfig()
    obj = _N(spec, lam)
    traces = []
    quotient = _R1(spec)
    for v in _starts(spec, cfg, warm_start):
        if warm_start is not None and not traces:
            x0 = v
        else:
            x0 = _scale_search(obj, v)
            if not _safe_value(obj, x0) < 0:
                # no negative energy on this ray: descend R1 until R1 < lam, i.e. N < 0
                pre = _descend(quotient, _scale_search(quotient, v), cfg, target=lam)
                if pre.objective < lam:
                    x0 = _scale_search(obj, pre.x)
        trace = _descend(obj, x0, cfg, collapse=True)
        traces.append(trace)
    nontrivial = []
    for i, t in enumerate(traces):
        if t.reason == "collapsed" or not np.isfinite(t.objective):
            continue
        u = GridFunction(spec.mesh, t.x)
        if luxemburg_norm(u, spec.p2) + gradient_norm(u, spec.p2) < cfg.floor:
            continue
        t.residual_norm = _final_residual(obj, t.x)
        nontrivial.append(i)
    histories = [t.history for t in traces]
    if not nontrivial:
        zero = GridFunction.zeros(spec.mesh)
        return EigenResult(lam, zero, 0.0, np.nan, np.nan, sum(t.iterations for t in traces),
                           len(traces), "trivial_only", 0.0, histories)
    converged = [i for i in nontrivial if traces[i].residual_norm <= cfg.tolerance]
    pool = converged or nontrivial
    k = min(pool, key=lambda i: (traces[i].objective, i))
    t = traces[k]
    u = GridFunction(spec.mesh, t.x)
    status = "converged" if converged else "max_iter"
    return EigenResult(lam, u, t.residual_norm, r1(u, spec), r2(u, spec), t.iterations,
                       len(traces), status, t.objective, histories)


def random_rays(spec, count, seed):
    """Random directions used for ray certificates: sine modes mixed with noise."""
    rng = np.random.default_rng(seed)
    modes = np.array(sine_modes(spec.mesh, 3))
    rays = []
    for _ in range(count):
        v = rng.normal(size=3) @ modes + 0.1 * rng.uniform(-1, 1, spec.mesh.n_interior)
        rays.append(v)
    return rays


def ray_minimum(lam, spec, rays, scales=np.logspace(-4, 4, 33)):
    """Smallest ``N(t v)`` over rays ``v`` and scales ``t``."""
    obj = _N(spec, lam)
    return min(_safe_value(obj, t * v) for v in rays for t in scales)


def certify_nonexistence(lam, spec, cfg=None, lambda_lower=None, rays=200):
    """Certify that no eigenfunction exists for ``lam < lambda_*``.

    Testing the weak form against ``u`` itself gives ``R.u = Num2(u) -
    lam Den2(u)``, so a solution would satisfy ``lam = R2(u) >=
    lambda_*``.  The report records the gap, a numerical check of that
    identity and, as corroborating evidence, the minimum of ``N`` along
    random rays (which must be nonnegative).
    """
    cfg = cfg or QuotientConfig()
    if lambda_lower is None:
        lambda_lower = minimize_r2(spec, cfg).value
    if not lam < lambda_lower:
        raise PreconditionError(f"lambda = {lam} is not below lambda_* = {lambda_lower}")
    directions = random_rays(spec, rays, cfg.seed)
    worst = 0.0
    for v in directions[:10]:
        p = assemble(spec, v, gradient=True, second=True)
        lhs = float((p.grad_e1 - lam * p.grad_e2) @ v)
        rhs = p.num2 - lam * p.den2
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300))
    ray_min = ray_minimum(lam, spec, directions)
    certified = ray_min >= -1e-14 and worst < 1e-10
    notes = ["lambda_lower is a computed minimum of R2; it bounds the discrete infimum from above"]
    return CertificateReport(lam, lambda_lower, lambda_lower - lam, certified, len(directions),
                             ray_min, worst, notes)
