"""Closed-form thresholds and the one-dimensional curve kappa(t)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoInteriorMinimum, NonpositiveDenominator, PreconditionError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class Thresholds:
    a_star: float
    a1: float
    a2: float
    beta_lower: float | None
    beta_upper: float
    t0: float | None

    @property
    def lower_defined(self):
        return self.beta_lower is not None

    def as_dict(self):
        return {
            "a_star": self.a_star,
            "a1": self.a1,
            "a2": self.a2,
            "beta_lower": self.beta_lower,
            "beta_upper": self.beta_upper,
            "t0": self.t0,
        }


def compute_thresholds(a1, a2, a_star) -> Thresholds:
    if not a_star > 0:
        raise PreconditionError("a_star must be positive")
    d1, d2 = a_star - a1, a_star - a2
    lower = math.sqrt(d1 * d2) if (d1 >= 0 and d2 >= 0) else None
    t0 = math.sqrt(d1 / d2) if (d1 > 0 and d2 > 0) else None
    return Thresholds(a_star, a1, a2, lower, 0.5 * d1 + 0.5 * d2, t0)


def kappa(t, a1, a2, beta_plus, a_star):
    """a*(1 + t^2) / (a1 + a2 t^2 + 2 beta+ t)."""
    if not t > 0:
        raise PreconditionError("t must be positive")
    den = a1 + a2 * t * t + 2.0 * beta_plus * t
    if not den > 0:
        raise NonpositiveDenominator(f"denominator {den:.3e} at t={t:g}")
    return a_star * (1.0 + t * t) / den


def _kappa_log(s, a1, a2, bp, a_star):
    return kappa(math.exp(s), a1, a2, bp, a_star)


@dataclass(frozen=True)
class KappaMin:
    t_min: float
    value: float
    flat: bool = False

    def __iter__(self):
        yield self.t_min
        yield self.value


def golden_section(f, lo, hi, tol=1e-12, max_iter=500):
    """Minimize a unimodal f on [lo, hi]."""
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(hi - lo) < tol * max(1.0, abs(c) + abs(d)):
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def kappa_inf(a1, a2, beta_plus, a_star, span=40.0, scan=801) -> KappaMin:
    """Infimum of kappa over t in (0, inf), searched on s = log t.

    A coarse scan brackets the minimum, golden section refines it.  When the
    infimum is a limit at t -> 0+ or t -> inf, NoInteriorMinimum carries the
    boundary value instead of a fake interior point.
    """
    if beta_plus < 0:
        raise PreconditionError("beta_plus must be >= 0")
    if a1 < 0 or a2 < 0 or (a1 == 0 and a2 == 0 and beta_plus == 0):
        raise NonpositiveDenominator("kappa denominator vanishes identically")
    if beta_plus == 0 and a1 == a2:
        return KappaMin(1.0, a_star / a1, flat=True)
    if beta_plus == 0:
        # monotone between a*/a1 (t -> 0) and a*/a2 (t -> inf)
        if a1 > a2:
            raise NoInteriorMinimum("0", a_star / a1)
        raise NoInteriorMinimum("inf", a_star / a2)
    s = np.linspace(-span, span, scan)
    vals = np.array([_kappa_log(si, a1, a2, beta_plus, a_star) for si in s])
    k = int(np.argmin(vals))
    if k == 0:
        raise NoInteriorMinimum("0", a_star / a1 if a1 > 0 else math.inf)
    if k == scan - 1:
        raise NoInteriorMinimum("inf", a_star / a2 if a2 > 0 else math.inf)
    sm, val = golden_section(
        lambda x: _kappa_log(x, a1, a2, beta_plus, a_star), s[k - 1], s[k + 1]
    )
    return KappaMin(math.exp(sm), val)


def kappa_inf_closed_form(a1, a2, beta_plus, a_star):
    """a* / lambda_max([[a1, b], [b, a2]]): kappa is a* over a Rayleigh quotient."""
    lam = 0.5 * (a1 + a2) + math.hypot(0.5 * (a1 - a2), beta_plus)
    return a_star / lam


def gamma_bounds(a1, a2, beta, a_star):
    """a*/max(a_i + beta+) <= Gamma <= 2a*/(a1 + a2 + 2 beta+)."""
    bp = max(beta, 0.0)
    s = a1 + a2 + 2.0 * bp
    if not s > 0:
        raise PreconditionError("a1 + a2 + 2 beta+ must be positive")
    return a_star / max(a1 + bp, a2 + bp), 2.0 * a_star / s
