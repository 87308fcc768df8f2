import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from fracbec.errors import NoInteriorMinimum, NonpositiveDenominator, PreconditionError
from fracbec.thresholds import (
    compute_thresholds, gamma_bounds, golden_section, kappa, kappa_inf, kappa_inf_closed_form,
)

A = 2.4693776727513992
frac = st.floats(0.01, 0.99)


def test_threshold_examples():
    th = compute_thresholds(0.4 * A, 0.4 * A, A)
    assert th.beta_lower == pytest.approx(0.6 * A) and th.beta_upper == pytest.approx(0.6 * A)
    th = compute_thresholds(0.0, 0.0, A)
    assert th.beta_lower == A and th.beta_upper == A
    th = compute_thresholds(0.2 * A, 0.8 * A, A)
    assert th.beta_lower == pytest.approx(0.4 * A, rel=1e-15)
    assert th.beta_upper == pytest.approx(0.5 * A, rel=1e-15)


def test_threshold_undefined_above_a_star():
    th = compute_thresholds(1.1 * A, 0.5 * A, A)
    assert not th.lower_defined and th.t0 is None
    assert th.beta_upper == pytest.approx(0.2 * A)
    with pytest.raises(PreconditionError):
        compute_thresholds(0.1, 0.1, 0.0)


@given(frac, frac)
def test_lower_below_upper(u1, u2):
    th = compute_thresholds(u1 * A, u2 * A, A)
    assert th.beta_lower <= th.beta_upper * (1 + 1e-15)


@settings(max_examples=200)
@given(frac, frac)
def test_kappa_one_at_t0(u1, u2):
    a1, a2 = u1 * A, u2 * A
    th = compute_thresholds(a1, a2, A)
    assert kappa(th.t0, a1, a2, th.beta_lower, A) == pytest.approx(1.0, abs=1e-12)
    km = kappa_inf(a1, a2, th.beta_lower, A)
    assert km.value == pytest.approx(1.0, abs=1e-10)
    assert km.t_min == pytest.approx(th.t0, rel=1e-4)


@settings(max_examples=200)
@given(frac, frac)
def test_kappa_above_one_below_lower(u1, u2):
    a1, a2 = u1 * A, u2 * A
    th = compute_thresholds(a1, a2, A)
    assert kappa_inf(a1, a2, 0.9 * th.beta_lower, A).value > 1


def test_kappa_limits_and_flat_case():
    a1, a2, b = 0.3 * A, 0.6 * A, 0.2 * A
    assert kappa(1e-9, a1, a2, b, A) == pytest.approx(A / a1, rel=1e-6)
    assert kappa(1e9, a1, a2, b, A) == pytest.approx(A / a2, rel=1e-6)
    for t in (0.1, 1.0, 7.0):
        assert kappa(t, 0.5 * A, 0.5 * A, 0.0, A) == pytest.approx(2.0, rel=1e-15)
    km = kappa_inf(0.5 * A, 0.5 * A, 0.0, A)
    assert km.flat and km.value == pytest.approx(2.0)


def test_kappa_errors():
    with pytest.raises(NonpositiveDenominator):
        kappa(1.0, -1.0, -1.0, 0.0, A)
    with pytest.raises(PreconditionError):
        kappa(0.0, 1.0, 1.0, 0.0, A)
    with pytest.raises(NoInteriorMinimum) as exc:
        kappa_inf(0.3 * A, 0.6 * A, 0.0, A)
    assert exc.value.side == "inf" and exc.value.limit == pytest.approx(A / (0.6 * A))
    with pytest.raises(NoInteriorMinimum) as exc:
        kappa_inf(0.6 * A, 0.3 * A, 0.0, A)
    assert exc.value.side == "0"
    with pytest.raises(NonpositiveDenominator):
        kappa_inf(0.0, 0.0, 0.0, A)


def test_kappa_inf_below_lower_against_scan():
    a1, a2 = 0.3 * A, 0.6 * A
    b = 0.9 * compute_thresholds(a1, a2, A).beta_lower
    t = np.logspace(-3, 3, 200001)
    scan = np.min(A * (1 + t**2) / (a1 + a2 * t**2 + 2 * b * t))
    assert scan > 1
    assert kappa_inf(a1, a2, b, A).value == pytest.approx(scan, rel=1e-8)


@settings(max_examples=200)
@given(frac, frac, st.floats(0.001, 2.0))
def test_kappa_inf_matches_scan_and_eigenvalue(u1, u2, ub):
    a1, a2, b = u1 * A, u2 * A, ub * A
    km = kappa_inf(a1, a2, b, A)
    t = np.exp(np.linspace(math.log(km.t_min) - 0.5, math.log(km.t_min) + 0.5, 20001))
    scan = np.min(A * (1 + t**2) / (a1 + a2 * t**2 + 2 * b * t))
    assert km.value == pytest.approx(scan, rel=1e-8)
    assert km.value == pytest.approx(kappa_inf_closed_form(a1, a2, b, A), rel=1e-10)


def test_golden_section_parabola():
    x, f = golden_section(lambda s: (s - 0.3) ** 2 + 1, -2, 2)
    assert x == pytest.approx(0.3, abs=1e-6) and f == pytest.approx(1.0, abs=1e-12)


@given(frac, frac, st.floats(-1.0, 1.0))
def test_gamma_bounds_order_and_diagonal(u1, u2, ub):
    lo, hi = gamma_bounds(u1 * A, u2 * A, ub * A, A)
    assert lo <= hi * (1 + 1e-14)
    assume(ub >= 0)
    lo, hi = gamma_bounds(u1 * A, u1 * A, ub * A, A)
    assert lo == pytest.approx(hi, rel=1e-14)
    assert lo == pytest.approx(1 / (u1 + ub), rel=1e-12)


def test_gamma_bounds_negative_beta_equals_zero():
    assert gamma_bounds(0.3 * A, 0.6 * A, -0.4 * A, A) == gamma_bounds(0.3 * A, 0.6 * A, 0.0, A)
    with pytest.raises(PreconditionError):
        gamma_bounds(0.0, 0.0, -1.0, A)
