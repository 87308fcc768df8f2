"""Coupled solitons of

    |D|u + u = a u^3 + beta v^2 u,   |D|v + v = a v^3 + beta u^2 v

built from Q, and the quotient P whose infimum is a*/(2a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError, SingularCouplings, ZeroDenominator
from .ground_state import GroundState
from .spectral import Field


@dataclass
class CoupledSoliton:
    a: float
    beta: float
    k: float
    s: float
    theta: float | None
    u0: Field
    v0: Field
    rho1: float
    system_residual: float
    pohozaev_residual: float

    def as_dict(self):
        return {
            "a": self.a,
            "beta": self.beta,
            "k": self.k,
            "s": self.s,
            "theta": self.theta,
            "rho1": self.rho1,
            "system_residual": self.system_residual,
            "pohozaev_residual": self.pohozaev_residual,
        }


def system_residual(u: Field, v: Field, a, beta):
    g = u.grid
    uu, vv = u.values, v.values
    r1 = g.sqrt_lap(uu) + uu - a * uu**3 - beta * vv**2 * uu
    r2 = g.sqrt_lap(vv) + vv - a * vv**3 - beta * uu**2 * vv
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def system_pohozaev(u: Field, v: Field, a, beta):
    """Relative gap in int(u^2 + v^2) = 1/2 int(a u^4 + a v^4 + 2 beta u^2 v^2)."""
    g = u.grid
    uu, vv = u.values, v.values
    lhs = g.integrate(uu**2 + vv**2)
    rhs = 0.5 * g.integrate(a * uu**4 + a * vv**4 + 2 * beta * uu**2 * vv**2)
    return abs(lhs - rhs) / lhs


def coupled_soliton(a, beta, gs: GroundState, theta=None) -> CoupledSoliton:
    if not (a > 0 and beta > 0):
        raise PreconditionError("needs a > 0 and beta > 0")
    q = np.asarray(gs.q.values)
    if a == beta:
        if theta is None:
            raise SingularCouplings("a = beta: the amplitudes form a one-parameter family; pass theta")
        if not 0 < theta < 2 * math.pi:
            raise PreconditionError("theta must lie in (0, 2 pi)")
        k = math.sin(theta) ** 2 / a
        s = math.cos(theta) ** 2 / a
        u = q * math.sin(theta) / math.sqrt(a)
        v = q * math.cos(theta) / math.sqrt(a)
    else:
        k, s = np.linalg.solve([[a, beta], [beta, a]], [1.0, 1.0])
        k, s = float(k), float(s)
        if k <= 0 or s <= 0:
            raise PreconditionError("amplitude system has no positive solution")
        u = math.sqrt(k) * q
        v = math.sqrt(s) * q
    uf, vf = Field(gs.grid, u), Field(gs.grid, v)
    return CoupledSoliton(
        a=a, beta=beta, k=k, s=s, theta=theta, u0=uf, v0=vf,
        rho1=0.5 * gs.a_star * (k + s),
        system_residual=system_residual(uf, vf, a, beta),
        pohozaev_residual=system_pohozaev(uf, vf, a, beta),
    )


def p_functional(u1: Field, u2: Field, a) -> float:
    g = u1.grid
    x, y = u1.values, u2.values
    den = a * g.integrate(x**4 + y**4 + 2 * x**2 * y**2)
    if not den > 0:
        raise ZeroDenominator("P denominator vanished")
    kin = g.kinetic(x) + g.kinetic(y)
    mass = g.integrate(x**2 + y**2)
    return kin * mass / den
