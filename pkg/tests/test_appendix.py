import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbec.appendix import coupled_soliton, p_functional, system_pohozaev, system_residual
from fracbec.errors import PreconditionError, SingularCouplings, ZeroDenominator
from fracbec.spectral import Field

pos = st.floats(0.05, 5.0)


@settings(max_examples=50, deadline=None)
@given(pos, pos)
def test_amplitudes_and_rho1(gs, a, beta):
    if abs(a - beta) < 1e-6:
        return
    c = coupled_soliton(a, beta, gs)
    assert c.k == pytest.approx(1 / (a + beta), rel=1e-12, abs=1e-12)
    assert c.s == pytest.approx(1 / (a + beta), rel=1e-12, abs=1e-12)
    assert c.rho1 == pytest.approx(gs.a_star / (a + beta), rel=1e-10)


@pytest.mark.parametrize("a,beta", [(1.0, 0.5), (2.0, 0.3), (0.4, 1.7)])
def test_system_residual_and_pohozaev(gs, a, beta):
    c = coupled_soliton(a, beta, gs)
    assert c.system_residual < 10 * 1e-8 * max(c.u0.max_abs(), 1.0)
    assert c.pohozaev_residual < 1e-4
    assert system_residual(c.u0, c.v0, a, beta) == c.system_residual
    assert c.as_dict()["k"] == c.k


def test_equal_couplings_need_theta(gs):
    with pytest.raises(SingularCouplings):
        coupled_soliton(1.0, 1.0, gs)
    with pytest.raises(PreconditionError):
        coupled_soliton(1.0, 1.0, gs, theta=0.0)
    with pytest.raises(PreconditionError):
        coupled_soliton(-1.0, 0.5, gs)


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, 1.2])
def test_theta_family_attains_p_minimum(gs, theta):
    a = 0.8
    c = coupled_soliton(a, a, gs, theta=theta)
    assert c.k + c.s == pytest.approx(1 / a)
    assert p_functional(c.u0, c.v0, a) == pytest.approx(gs.a_star / (2 * a), rel=1e-4)
    assert c.system_residual < 1e-7 * max(1.0, c.u0.max_abs())


def test_p_at_half_split(gs):
    a = 1.3
    u = Field(gs.grid, gs.q.values / math.sqrt(2 * a))
    assert p_functional(u, u, a) == pytest.approx(gs.a_star / (2 * a), rel=1e-4)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_p_bounded_below_on_random_pairs(gs, seed):
    rng = np.random.default_rng(seed)
    x = np.asarray(gs.grid.x)
    c = rng.uniform(-2, 2, size=4)
    w = rng.uniform(0.3, 3, size=2)
    u = Field(gs.grid, np.exp(-((x - c[0]) / w[0]) ** 2) * (1 + 0.3 * np.cos(c[1] * x)))
    v = Field(gs.grid, rng.uniform(0.1, 2) * np.exp(-((x - c[2]) / w[1]) ** 2))
    a = rng.uniform(0.2, 3)
    assert p_functional(u, v, a) >= gs.a_star / (2 * a) * (1 - 1e-4)


def test_p_zero_denominator(gs):
    z = Field.zeros(gs.grid)
    with pytest.raises(ZeroDenominator):
        p_functional(z, z, 1.0)


def test_system_pohozaev_of_scaled_q(gs):
    q = gs.q
    # a = beta = 1/2 with equal split: k = s = 1, so (Q, Q) solves the system
    assert system_pohozaev(q, q, 0.5, 0.5) < 1e-4
    assert system_pohozaev(q * 0.5, q * 0.5, 0.5, 0.5) > 0.1
