import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from doublephase import (
    UNBOUNDED, Domain, DomainError, ExponentField, NonFiniteExponent, PowerPair,
    bounds, conjugate, critical_exponent, validate_ordering, validate_subcritical,
)

I = Domain.interval(0.0, 1.0)
SQ = Domain.rectangle(0.0, 1.0, 0.0, 1.0)


def const(v, d=I):
    return ExponentField.const(v, d)


def test_domain_invariants():
    assert SQ.dim == 2 and SQ.kind == "rectangle" and I.kind == "interval"
    with pytest.raises(DomainError):
        Domain(((1.0, 0.0),))
    with pytest.raises(DomainError):
        Domain(((0, 1), (0, 1), (0, 1)))


def test_bounds_constant():
    assert bounds(const(2.0), 16) == (2.0, 2.0)


def test_bounds_monotone_field():
    assert bounds(ExponentField.from_expression("2 + x", I), 16) == (2.0, 3.0)


def test_bounds_2d_against_dense_scan():
    p = ExponentField.from_expression("2 + sin(pi*x)*sin(pi*y)", SQ, samples=101)
    lo, hi = bounds(p, 101)
    olo, ohi = oracles.scan_sup(lambda X, Y: 2 + np.sin(np.pi * X) * np.sin(np.pi * Y))
    assert abs(lo - olo) < 1e-3 and abs(hi - ohi) < 1e-3


def test_bounds_refinement_stays_inside_true_range():
    p = ExponentField.from_expression("2 + sin(3*x)", I)
    coarse, fine = bounds(p, 11), bounds(p, 21)
    true_lo, true_hi = 2 + np.sin(0.0), 2 + 1.0
    assert true_lo - 1e-15 <= fine[0] <= coarse[0]
    assert coarse[1] <= fine[1] <= true_hi + 1e-15


def test_bounds_rejects_non_finite():
    with pytest.raises(NonFiniteExponent), np.errstate(divide="ignore"):
        ExponentField(lambda pts: 2.0 + 1.0 / (pts[:, 0] - 0.5), I, samples=5, label="bad")


def test_bounds_needs_two_samples():
    with pytest.raises(DomainError):
        bounds(const(2.0), 1)


def test_exponent_must_exceed_one():
    with pytest.raises(DomainError):
        const(1.0)


@pytest.mark.parametrize("p, q", [(2, 2), (3, 1.5), (1.5, 3)])
def test_conjugate_examples(p, q):
    assert conjugate(p) == pytest.approx(q)


def test_conjugate_domain():
    with pytest.raises(DomainError):
        conjugate(1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1.01, 100.0))
def test_conjugate_involution(p):
    assert abs(conjugate(conjugate(p)) - p) <= 1e-12 * p


@pytest.mark.parametrize("p, n, expected", [(1.5, 2, 6.0), (2, 3, 6.0)])
def test_critical_exponent_formula(p, n, expected):
    assert critical_exponent(p, n) == pytest.approx(expected)


def test_critical_exponent_unbounded():
    assert critical_exponent(2, 2) is UNBOUNDED
    assert critical_exponent(2, 1) is UNBOUNDED


def test_critical_exponent_increasing():
    # N p / (N - p) has derivative N^2 / (N - p)^2 > 0
    ps = np.linspace(1.01, 1.99, 50)
    vals = [critical_exponent(p, 2) for p in ps]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_power_pair_order():
    with pytest.raises(DomainError):
        PowerPair(4, 3)


def test_ordering_pass():
    assert validate_ordering(const(2), const(5), const(3.5), PowerPair(3, 4)).passed


def test_ordering_boundary_fails_strictly():
    rep = validate_ordering(const(2), const(5), const(3.5), PowerPair(2, 4))
    assert not rep.passed
    assert any("p1+ < r violated" in f for f in rep.failures)


def test_ordering_variable_p1():
    p1 = ExponentField.from_expression("2 + x", I)
    assert validate_ordering(p1, const(5), const(3.5), PowerPair(3.5, 4)).passed


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(1.1, 8.0), min_size=6, max_size=6))
def test_ordering_iff_all_inequalities(v):
    p1, r, p3, s, p2, _ = v
    r_, s_ = min(r, s), max(r, s)
    rep = validate_ordering(const(p1), const(p2), const(p3), PowerPair(r_, s_))
    expected = p1 < r_ <= p3 <= s_ < p2
    assert rep.passed == expected


def test_subcritical_examples():
    assert validate_subcritical(const(2), const(5)).passed
    assert validate_subcritical(const(1.5, SQ), const(5, SQ)).passed
    rep = validate_subcritical(const(1.5, SQ), const(6, SQ))
    assert not rep.passed and rep.details["gap"] == pytest.approx(0.0, abs=1e-12)
