"""Existence verdicts for the constrained problem at a parameter point.

Rules, first match wins:

1. a_i > a* or beta > beta_upper: no minimizer.
2. 0 < a1, a2 < a* and beta < beta_lower: a minimizer exists.
3. a1 = a2 = a* - beta (the critical diagonal): no minimizer when
   inf(V1 + V2) = 0; a minimizer when the diagonal energy lies below
   inf(V1 + V2); otherwise undecided.
4. a1 != a2 below a*, |a1 - a2| <= 2 beta_lower and beta = beta_lower:
   a minimizer exists (Gamma > 1 there).
5. Gamma against 1 with an undecided band |Gamma - 1| < band.  When only
   the bounds are known they decide if they clear the band.

Rule names are theorem labels so rows can be audited against the theory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constrained import SystemParams, minimize
from .gamma import GAMMA_GRID, GammaEstimate, gamma_estimate
from .ground_state import GroundState, load_or_solve
from .options import SolverOptions
from .spectral import Grid1D
from .thresholds import compute_thresholds, gamma_bounds

VERDICTS = ("Exists", "NotExists", "ExistsNearBetaLower", "Indeterminate")
GAMMA_BAND = 0.02
DIAG_TOL = 1e-3
DIAG_GRID = Grid1D(2048, 16.0)


@dataclass
class Classification:
    verdict: str
    rule: str
    gamma: GammaEstimate | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "verdict": self.verdict,
            "rule": self.rule,
            "gamma": None if self.gamma is None else self.gamma.as_dict(),
            "details": self.details,
        }


def _close(x, y, a_star, rel=1e-12):
    return abs(x - y) <= rel * a_star


def on_critical_diagonal(a1, a2, beta, a_star):
    return _close(a1, a2, a_star) and 0 < a1 < a_star and _close(beta, a_star - a1, a_star)


def decide(a1, a2, beta, a_star, gamma_value=math.nan, gamma_lo=None, gamma_hi=None,
           band=GAMMA_BAND, diag_energy=math.nan, inf_v_sum=math.nan, diag_tol=DIAG_TOL):
    """Pure verdict from the row data; returns (verdict, rule)."""
    th = compute_thresholds(a1, a2, a_star)
    if a1 > a_star or a2 > a_star:
        return "NotExists", "Thm 1.1(ii): a_i > a*"
    if beta > th.beta_upper:
        return "NotExists", "Thm 1.1(ii): beta > beta_upper"
    below = 0 < a1 < a_star and 0 < a2 < a_star
    if below and beta < th.beta_lower and not _close(beta, th.beta_lower, a_star):
        return "Exists", "Thm 1.1(i)"
    if on_critical_diagonal(a1, a2, beta, a_star):
        if math.isfinite(inf_v_sum) and abs(inf_v_sum) <= diag_tol:
            return "NotExists", "Thm 1.3(i): inf(V1+V2) = 0"
        if math.isfinite(inf_v_sum) and math.isfinite(diag_energy) and diag_energy < inf_v_sum - diag_tol:
            return "Exists", "Thm 1.3(ii): e < inf(V1+V2)"
        return "Indeterminate", "Thm 1.3: energy not below inf(V1+V2)"
    if (below and a1 != a2 and abs(a1 - a2) <= 2 * th.beta_lower
            and _close(beta, th.beta_lower, a_star)):
        return "ExistsNearBetaLower", "Thm 1.2: beta = beta_lower"
    if math.isfinite(gamma_value):
        if gamma_value > 1 + band:
            return "Exists", "Thm 2.4(i): Gamma > 1"
        if gamma_value < 1 - band:
            return "NotExists", "Thm 2.4(ii): Gamma < 1"
        return "Indeterminate", "Thm 2.4: |Gamma - 1| within band"
    if gamma_lo is not None and gamma_lo > 1 + band:
        return "Exists", "Thm 2.4(i): Gamma lower bound > 1"
    if gamma_hi is not None and gamma_hi < 1 - band:
        return "NotExists", "Thm 2.4(ii): Gamma upper bound < 1"
    return "Indeterminate", "Gamma unavailable"


def inf_potential_sum(params: SystemParams, grid: Grid1D):
    v1, v2 = params.potentials(grid)
    return float(np.min(v1.values + v2.values))


def classify(params: SystemParams, gs: GroundState | None = None, grid: Grid1D = GAMMA_GRID,
             opts: SolverOptions | None = None, band=GAMMA_BAND, gamma="always",
             diag_grid: Grid1D = DIAG_GRID, diag_opts: SolverOptions | None = None) -> Classification:
    """Classify one parameter point.

    ``gamma`` is "always" (estimate Gamma even when an analytic rule fires,
    so the two can be cross-checked) or "needed".  The diagonal energy is only
    computed on the critical diagonal with inf(V1 + V2) > 0, by minimizing on
    ``diag_grid`` from the default start.
    """
    if gamma not in ("always", "needed"):
        raise ValueError("gamma must be 'always' or 'needed'")
    gs = gs or load_or_solve()
    a_star = gs.a_star
    a1, a2, beta = params.a1, params.a2, params.beta
    th = compute_thresholds(a1, a2, a_star)
    lo, hi = gamma_bounds(a1, a2, beta, a_star)
    details = {
        "a_star": a_star,
        "beta_lower": th.beta_lower,
        "beta_upper": th.beta_upper,
        "a1_below_a_star": a1 < a_star,
        "a2_below_a_star": a2 < a_star,
        "beta_below_lower": th.beta_lower is not None and beta < th.beta_lower,
        "beta_above_upper": beta > th.beta_upper,
        "gamma_lo": lo,
        "gamma_hi": hi,
    }
    diag_e = inf_v = math.nan
    if on_critical_diagonal(a1, a2, beta, a_star):
        inf_v = inf_potential_sum(params, diag_grid)
        details["inf_v_sum"] = inf_v
        if abs(inf_v) > DIAG_TOL:
            res = minimize(params, diag_grid, diag_opts)
            diag_e = res.energy
            details["diag_energy"] = diag_e
            details["diag_converged"] = res.converged
    verdict, rule = decide(a1, a2, beta, a_star, band=band, diag_energy=diag_e, inf_v_sum=inf_v,
                           gamma_lo=lo, gamma_hi=hi)
    est = None
    if gamma == "always" or verdict == "Indeterminate" and rule == "Gamma unavailable":
        est = gamma_estimate(params, grid, gs, opts)
        verdict, rule = decide(a1, a2, beta, a_star, est.value, lo, hi, band, diag_e, inf_v)
        details["gamma_value"] = est.value
    return Classification(verdict, rule, est, details)
