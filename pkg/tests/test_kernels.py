import numpy as np
import pytest
from scipy import integrate as spi

from doublephase import (
    BUILTIN_KERNELS, Domain, ExponentField, SampleGrid, make_expression_kernel, make_kernel,
    flux_estimate_check, validate_ellipticity, validate_growth, validate_comparison,
)
from doublephase.kernels import density_by_quadrature

I = Domain.interval(0.0, 1.0)
SQ = Domain.rectangle(0.0, 1.0, 0.0, 1.0)
X1 = np.array([[0.5]])


def const(v, d=I):
    return ExponentField.const(v, d)


def k(name, p):
    return make_kernel(name, const(p) if np.isscalar(p) else p)


def test_power_kernel_examples():
    assert np.allclose(k("power", 2).value(np.full((5, 1), 0.3), np.logspace(-3, 3, 5)), 1.0)
    k3 = k("power", 3)
    assert k3.value(X1, np.array([2.0]))[0] == 2.0
    assert k3.density(X1, np.array([2.0]))[0] == pytest.approx(8 / 3)
    kv = k("power", ExponentField.from_expression("2 + x", I))
    assert kv.value(X1, np.array([4.0]))[0] == pytest.approx(2.0)


def test_power_flux_vanishes_at_zero():
    kk = k("power", 1.5)
    assert kk.flux_coefficient(np.zeros((1, 1)), np.array([0.0]))[0] == 0.0
    assert np.isfinite(kk.flux_coefficient(np.zeros((2, 1)), np.array([0.0, 1e-8]))).all()


def test_mean_curvature_examples():
    k2 = k("mean_curvature", 2)
    assert np.allclose(k2.value(np.zeros((3, 1)), np.array([0.1, 1, 10])), 1.0)
    assert k2.density(X1, np.array([1.7]))[0] == pytest.approx(1.7 ** 2 / 2)
    assert k("mean_curvature", 4).value(X1, np.array([1.0]))[0] == pytest.approx(2.0)
    k3 = k("mean_curvature", 3)
    assert k3.density(X1, np.array([1.0]))[0] == pytest.approx((2 * np.sqrt(2) - 1) / 3, abs=1e-12)


def test_capillarity_examples():
    assert k("capillarity", 2).value(X1, np.array([1.0]))[0] == pytest.approx(1 + 1 / np.sqrt(2))
    assert k("capillarity", 2.5).value(X1, np.array([1e-12]))[0] < 1e-5


def test_capillarity_density_two_quadrature_orders():
    integrand = lambda s: (1 + s * s / np.sqrt(1 + s ** 4)) * s
    adaptive, _ = spi.quad(integrand, 0, 1, epsabs=1e-15, epsrel=1e-14)
    kk = k("capillarity", 2)
    gl32 = density_by_quadrature(kk.value, X1, np.array([1.0]))[0]
    gl16 = density_by_quadrature(kk.value, X1, np.array([1.0]), order=16)[0]
    assert abs(gl32 - gl16) <= 1e-10
    assert abs(gl32 - adaptive) <= 1e-10
    assert kk.density(X1, np.array([1.0]))[0] == pytest.approx(adaptive, abs=1e-12)


@pytest.mark.parametrize("name", sorted(BUILTIN_KERNELS))
@pytest.mark.parametrize("p", [1.3, 2.0, 3.5, "1.5 + x"])
def test_density_matches_quadrature_of_value(name, p):
    field = ExponentField.from_expression(p, I) if isinstance(p, str) else const(p)
    kk = k(name, field)
    x = np.linspace(0, 1, 7)[:, None].repeat(6, axis=0)
    t = np.tile([1e-3, 0.1, 0.9, 2.5, 7.0, 20.0], 7)
    ref = np.array([spi.quad(lambda s: kk.value(xx[None], np.array([s]))[0] * s, 0, tt,
                             epsabs=0, epsrel=1e-13, limit=400)[0] for xx, tt in zip(x, t)])
    assert np.allclose(kk.density(x, t), ref, rtol=1e-9, atol=0)


@pytest.mark.parametrize("name", sorted(BUILTIN_KERNELS))
def test_density_derivative_is_flux(name):
    field = ExponentField.from_expression("1.5 + 2*x", I)
    kk = k(name, field)
    x = np.linspace(0, 1, 5)[:, None].repeat(5, axis=0)
    t = np.tile([0.05, 0.5, 1.0, 3.0, 10.0], 5)
    h = 1e-5 * np.maximum(1.0, t)
    fd = (kk.density(x, t + h) - kk.density(x, t - h)) / (2 * h)
    assert np.allclose(fd, kk.value(x, t) * t, rtol=1e-6)


@pytest.mark.parametrize("name", sorted(BUILTIN_KERNELS))
def test_density_zero_and_monotone(name):
    kk = k(name, ExponentField.from_expression("1.2 + 3*x", I))
    x = np.full((200, 1), 0.4)
    t = np.linspace(0, 30, 200)
    d = kk.density(x, t)
    assert d[0] == 0.0 and np.all(np.diff(d) > 0)


@pytest.mark.parametrize("name", sorted(BUILTIN_KERNELS))
def test_flux_monotone_on_random_pairs(name):
    kk = k(name, ExponentField.from_expression("1.3 + 2*x + y", SQ))
    rng = np.random.default_rng(1)
    pts = rng.uniform(size=(2000, 2))
    u, v = rng.normal(size=(2, 2000, 2)) * 10 ** rng.uniform(-3, 3, size=(2, 2000, 1))
    fu = kk.flux_coefficient(pts, np.linalg.norm(u, axis=1))[:, None] * u
    fv = kk.flux_coefficient(pts, np.linalg.norm(v, axis=1))[:, None] * v
    assert np.all(np.sum((fu - fv) * (u - v), axis=1) >= 0)


def test_growth_examples():
    rep = validate_growth(k("power", 3))
    assert rep.passed and rep.b_estimate <= 1.0
    rep = validate_growth(k("capillarity", 2))
    assert rep.passed and rep.b_estimate <= 2.0
    bad = validate_growth(make_expression_kernel("exp(xi)", const(2)))
    assert not bad.passed and bad.violations and not bad


def test_ellipticity_examples():
    rep = validate_ellipticity(k("power", 3))
    assert rep.passed and rep.c_estimate == pytest.approx(1.0)
    rep = validate_ellipticity(k("mean_curvature", 4))
    assert rep.passed and rep.c_estimate >= 1.0 - 1e-12
    bad = validate_ellipticity(make_expression_kernel("xi^(p-2)*sin(xi)^2", const(3)))
    assert not bad.passed and bad.approximate


@pytest.mark.parametrize("name", sorted(BUILTIN_KERNELS))
@pytest.mark.parametrize("p", ["1.1", "1.1 + x", "4 + sin(7*x)"])
def test_builtins_pass_growth_and_ellipticity(name, p):
    kk = k(name, ExponentField.from_expression(p, I))
    assert validate_growth(kk).passed
    assert validate_ellipticity(kk).passed


def test_growth_report_pass_iff_no_violations():
    rep = validate_growth(make_expression_kernel("exp(xi)", const(2)))
    assert rep.passed == (not rep.violations)


def test_comparison_equality_case():
    phi, psi = k("power", 2), k("power", 2)
    rep = validate_comparison(phi, psi, 2.0)
    assert rep.passed and abs(rep.comparison_margin) <= 1e-10 * 1e12


def test_comparison_literal_fails_for_power_pair():
    rep = validate_comparison(k("power", 2), k("power", 5), 2.0)
    assert not rep.passed and rep.comparison_margin < 0


def test_comparison_variant_with_p2_plus_passes():
    assert validate_comparison(k("power", 2), k("power", 5), 5.0).passed


def test_flux_identical_arguments():
    kk = k("capillarity", 2.5)
    u = np.array([[0.3, -1.2]])
    rep = flux_estimate_check(kk, np.array([[0.1, 0.2]]), u, u, c=1.0)
    assert rep.passed


def test_flux_linear_case():
    kk = k("power", 2)
    rng = np.random.default_rng(3)
    pts = rng.uniform(size=(50, 1))
    u, v = rng.normal(size=(2, 50, 3))
    rep = flux_estimate_check(kk, pts, u, v)
    assert rep.passed
    assert rep.details["min lhs/rhs"] == pytest.approx(4.0)


def test_flux_capillarity_random_pairs():
    kk = k("capillarity", 2.5)
    rng = np.random.default_rng(4)
    pts = rng.uniform(size=(1000, 1))
    u, v = rng.normal(size=(2, 1000, 2)) * 10 ** rng.uniform(-2, 2, size=(2, 1000, 1))
    rep = flux_estimate_check(kk, pts, u, v)
    assert rep.passed and rep.details["violations"] == 0


def test_expression_kernel_density_and_flag():
    kk = make_expression_kernel("xi^(p-2)", const(3))
    assert kk.approximate_derivative
    assert kk.density(X1, np.array([2.0]))[0] == pytest.approx(8 / 3, rel=1e-12)
    assert kk.xi_derivative(X1, np.array([2.0]))[0] == pytest.approx(1.0, rel=1e-6)


def test_default_grid_shape():
    g = SampleGrid.default(I)
    assert g.points.shape == (64, 1) and len(g.xi) == 121
    assert g.xi[0] == pytest.approx(1e-6) and g.xi[-1] == pytest.approx(1e6)
