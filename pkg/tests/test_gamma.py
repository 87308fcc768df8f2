import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbec.constrained import SystemParams
from fracbec.errors import NoConvergence, PreconditionError
from fracbec.gamma import (
    GAMMA_GRID, find_gamma_crossing, gamma_estimate, j_quotient, lipschitz_bound, lipschitz_check,
)
from fracbec.options import SolverOptions
from fracbec.spectral import Field, Grid1D, dilate
from fracbec.thresholds import compute_thresholds


def P(a_star, u1, u2, ub):
    return SystemParams(u1 * a_star, u2 * a_star, ub * a_star)


@pytest.mark.parametrize("ub", [0.1, 0.3])
def test_diagonal_value(gs, ub):
    est = gamma_estimate(P(gs.a_star, 0.5, 0.5, ub), gs=gs)
    assert est.method == "numeric"
    assert est.value == pytest.approx(1 / (0.5 + ub), rel=0.02)
    assert est.within_bounds()


def test_zero_beta_is_closed_form(gs):
    est = gamma_estimate(P(gs.a_star, 0.3, 0.6, 0.0), gs=gs)
    assert est.route == "closed_form"
    assert est.value == pytest.approx(1 / 0.6)


@pytest.mark.parametrize("ub", [-0.2, -1.5])
def test_negative_beta_equals_zero_beta(gs, ub):
    a = gamma_estimate(P(gs.a_star, 0.3, 0.6, ub), gs=gs)
    b = gamma_estimate(P(gs.a_star, 0.3, 0.6, 0.0), gs=gs)
    assert a.value == b.value


def test_above_one_at_beta_lower(gs):
    a1, a2 = 0.3 * gs.a_star, 0.5 * gs.a_star
    th = compute_thresholds(a1, a2, gs.a_star)
    assert abs(a1 - a2) <= 2 * th.beta_lower
    est = gamma_estimate(SystemParams(a1, a2, th.beta_lower), gs=gs)
    assert est.method == "numeric" and est.value > 1


@settings(max_examples=6, deadline=None)
@given(st.floats(0.1, 0.9), st.floats(0.1, 0.9), st.floats(0.02, 0.8))
def test_estimate_within_bounds(gs, u1, u2, ub):
    est = gamma_estimate(P(gs.a_star, u1, u2, ub), gs=gs)
    assert est.method == "numeric"
    assert est.within_bounds(slack=1e-3 * est.upper_bound)
    as_dict = est.as_dict()
    assert as_dict["value"] == est.value and as_dict["route"] in ("flow", "spread_limit")


def test_minimizing_pair_reproduces_value(gs):
    p = P(gs.a_star, 0.3, 0.5, 0.2)
    est = gamma_estimate(p, gs=gs)
    u, v = est.minimizing_pair
    assert u.grid == GAMMA_GRID
    assert j_quotient(u, v, p.a1, p.a2, p.beta) == pytest.approx(est.raw_value, rel=1e-9)


def test_failed_flow_gives_bounds_only(gs):
    est = gamma_estimate(P(gs.a_star, 0.3, 0.5, 0.2), gs=gs, opts=SolverOptions(tol=1e-6, max_iter=3))
    assert est.method == "bounds_only" and math.isnan(est.value)
    assert est.lower_bound < est.upper_bound


def test_j_quotient_dilation_invariant():
    g = Grid1D(4096, 128.0)
    x = np.asarray(g.x)
    u = Field(g, np.exp(-x**2 / 2))
    v = Field(g, np.exp(-(x - 1) ** 2))
    du, dv = Field(g, dilate(g, u.values, 1.8)), Field(g, dilate(g, v.values, 1.8))
    assert j_quotient(du, dv, 1.0, 0.5, 0.3) == pytest.approx(j_quotient(u, v, 1.0, 0.5, 0.3), rel=1e-4)


def test_lipschitz_reports(a_star):
    p = (0.5 * a_star, 0.5 * a_star, 0.2 * a_star)
    rep = lipschitz_check(p, p, (1.4, 1.4), a_star)
    assert rep.difference == 0 and rep.bound == 0 and rep.passed
    q = (0.5 * a_star, 0.5 * a_star, 0.25 * a_star)
    exact = (a_star / (p[0] + p[2]), a_star / (q[0] + q[2]))
    rep = lipschitz_check(p, q, exact, a_star)
    assert rep.passed and rep.difference < rep.bound
    assert not lipschitz_check(p, q, (exact[0], exact[0] + 10 * rep.bound), a_star).passed
    with pytest.raises(PreconditionError):
        lipschitz_bound((0, 0, 0), q, a_star)


def test_crossing_preconditions(gs):
    with pytest.raises(PreconditionError):
        find_gamma_crossing(0.4 * gs.a_star, 0.4 * gs.a_star, gs)
    with pytest.raises(PreconditionError):
        find_gamma_crossing(1.2 * gs.a_star, 0.4 * gs.a_star, gs)


def test_crossing_inside_threshold_window(gs):
    a1, a2 = 0.3 * gs.a_star, 0.5 * gs.a_star
    th = compute_thresholds(a1, a2, gs.a_star)
    trace = []
    beta = find_gamma_crossing(a1, a2, gs, trace=trace)
    assert th.beta_lower < beta <= th.beta_upper
    assert math.sqrt(0.35) * gs.a_star < beta <= 0.6 * gs.a_star
    # the bracketing evaluations straddle 1 and Gamma decreases with beta
    pts = sorted(trace)
    assert all(g1 <= g0 + 1e-6 for (_, g0), (_, g1) in zip(pts, pts[1:]))
    below = [g for b, g in pts if b < beta - 1e-4 * gs.a_star]
    above = [g for b, g in pts if b > beta + 1e-4 * gs.a_star]
    assert all(g > 1 for g in below) and all(g < 1 for g in above)


def test_crossing_symmetric_limit(gs):
    a = 0.4 * gs.a_star
    for d in (0.02, 0.005):
        a1, a2 = a, a + d * gs.a_star
        beta = find_gamma_crossing(a1, a2, gs)
        # on the diagonal Gamma = a*/(a + beta) crosses 1 at a* - a
        assert abs(beta - (gs.a_star - 0.5 * (a1 + a2))) <= d * gs.a_star


def test_crossing_fails_loudly_when_flow_fails(gs):
    with pytest.raises(NoConvergence):
        find_gamma_crossing(0.3 * gs.a_star, 0.5 * gs.a_star, gs, opts=SolverOptions(tol=1e-6, max_iter=3))
