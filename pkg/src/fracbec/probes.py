"""Energy along the L2-preserving dilation family and the concentrating trial state.

Dilation: u_lam(x) = lam^{1/2} u(lam x).  Kinetic, quartic and cross terms all
scale by lam; only the trap term sees the change of variables,

    int V(x) u_lam^2 dx = int V(y / lam) u(y)^2 dy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constrained import SystemParams, energy_terms
from .errors import PreconditionError, ResolutionTooCoarse, SupportTooWide
from .ground_state import GroundState
from .spectral import Field, Grid1D, dilate


@dataclass
class EnergyTrace:
    lambdas: np.ndarray
    energy: np.ndarray
    energy_resampled: np.ndarray = field(repr=False)
    linear_coeff: float = 0.0  # exact coefficient of lam
    rho0: float = math.nan
    analytic_coeff: float = math.nan

    def fitted_slope(self, tail=0.5):
        """Least-squares slope of E(lam) over the upper part of the range."""
        k = int(len(self.lambdas) * (1 - tail))
        lam, e = self.lambdas[k:], self.energy[k:]
        if len(lam) < 2:
            return math.nan
        return float(np.polyfit(lam, e, 1)[0])

    def is_decreasing(self):
        return bool(np.all(np.diff(self.energy) < 0))

    def rows(self):
        return list(zip(self.lambdas.tolist(), self.energy.tolist()))


def _support_check(u: Field, frac=0.5, rel=1e-10):
    g = u.grid
    outside = np.abs(np.asarray(g.x)) > frac * g.L
    peak = u.max_abs()
    if peak == 0:
        raise PreconditionError("zero field")
    if np.any(outside) and np.max(np.abs(u.values[outside])) > rel * peak:
        raise SupportTooWide("field is not negligible outside the box core [-L/2, L/2]")


def scaling_probe(u1: Field, u2: Field, params: SystemParams, lambdas, resample_tol=1e-8) -> EnergyTrace:
    """E(u1_lam, u2_lam) for each lam >= 1.

    ``energy`` uses the exact change of variables above.  While the dilated
    fields stay resolved (spectral mass beyond xi_max/lam below
    ``resample_tol``) they are also spectrally resampled and the energy
    recomputed directly (``energy_resampled``); elsewhere that column is NaN.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.any(lam < 1):
        raise PreconditionError("lambdas must be >= 1")
    _support_check(u1)
    _support_check(u2)
    g = u1.grid
    t = energy_terms(u1, u2, params)
    v1, v2 = params.potentials(g)
    lin = (t["kin1"] + t["kin2"] - 0.5 * params.a1 * t["quart1"]
           - 0.5 * params.a2 * t["quart2"] - params.beta * t["cross"])
    x = np.asarray(g.x)
    d1, d2 = u1.values**2, u2.values**2
    e = np.array([l * lin + g.integrate(v1(x / l) * d1) + g.integrate(v2(x / l) * d2) for l in lam])
    # the dilated spectrum is the original one stretched by lam; resample only
    # while what would be pushed past Nyquist is negligible
    tail = _spectral_tail(u1, u2)
    er = np.full(lam.shape, np.nan)
    for i, l in enumerate(lam):
        if tail(g.xi_max / l) <= resample_tol:
            w1 = Field(g, dilate(g, u1.values, l, core=0.5))
            w2 = Field(g, dilate(g, u2.values, l, core=0.5))
            tt = energy_terms(w1, w2, params)
            er[i] = (tt["kin1"] + tt["kin2"] + tt["pot1"] + tt["pot2"]
                     - 0.5 * params.a1 * tt["quart1"] - 0.5 * params.a2 * tt["quart2"]
                     - params.beta * tt["cross"])
    bp = max(params.beta, 0.0)
    den = params.a1 * t["quart1"] + params.a2 * t["quart2"] + 2 * bp * t["cross"]
    rho0 = 2 * (t["kin1"] + t["kin2"]) / den
    analytic = (rho0 - 1) * (0.5 * params.a1 * t["quart1"] + 0.5 * params.a2 * t["quart2"]
                             + params.beta * t["cross"])
    return EnergyTrace(lam, e, er, lin, rho0, analytic)


def _spectral_tail(*fields):
    """Function xi -> largest share of spectral mass above xi among the fields."""
    g = fields[0].grid
    xi = g._rxi
    cums = []
    for f in fields:
        c = np.abs(np.fft.rfft(f.values)) ** 2
        c[1:-1] *= 2.0
        above = np.cumsum(c[::-1])[::-1]  # mass at index >= k
        cums.append(above / above[0])

    def tail(cut):
        k = int(np.searchsorted(xi, cut, side="right"))
        if k >= len(xi):
            return 0.0
        return float(max(cm[k] for cm in cums))

    return tail


# --- cutoff and trial state ---------------------------------------------------

def _h(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def cutoff(x, inner=0.5, outer=1.0):
    """Smooth plateau: 1 for |x| <= inner, 0 for |x| >= outer, C-infinity between."""
    r = np.abs(np.asarray(x, dtype=float))
    a = _h(outer - r)
    b = _h(r - inner)
    return a / (a + b)


def truncated_soliton(grid: Grid1D, gs: GroundState, radius=None):
    """Unit-mass cutoff(x / radius) Q(x); radius defaults to L/2."""
    radius = grid.L / 2 if radius is None else radius
    x = np.asarray(grid.x)
    w = cutoff(x / radius) * gs.evaluate(x)
    w /= math.sqrt(grid.integrate(w**2))
    return Field(grid, w)


def trial_psi_R(grid: Grid1D, gs: GroundState, x0: float, R: float, return_amp=False):
    """A_R R^{1/2}/||Q|| cutoff(x - x0) Q(R(x - x0)) at unit mass."""
    if not R > 1:
        raise PreconditionError("R must exceed 1")
    if R * grid.dx > 0.5:
        raise ResolutionTooCoarse(f"R*dx = {R * grid.dx:.3g} > 0.5")
    if abs(x0) + 1.0 > grid.L:
        raise PreconditionError("cutoff support leaves the box")
    x = np.asarray(grid.x) - x0
    phi = cutoff(x)
    inside = phi > 0
    w = np.zeros(grid.n)
    w[inside] = math.sqrt(R / gs.a_star) * phi[inside] * gs.evaluate(R * x[inside])
    amp2 = 1.0 / grid.integrate(w**2)
    f = Field(grid, math.sqrt(amp2) * w)
    return (f, amp2) if return_amp else f


@dataclass
class SlopeFit:
    Rs: list
    kinetic: list
    quartic: list
    amp2: list
    kinetic_slope: float
    quartic_slope: float
    expected_kinetic: float
    expected_quartic: float

    def rel_errors(self):
        return (abs(self.kinetic_slope / self.expected_kinetic - 1),
                abs(self.quartic_slope / self.expected_quartic - 1))


def _weighted_slope(R, y, sigma):
    w = 1.0 / np.asarray(sigma) ** 2
    A = np.vstack([R, np.ones_like(R)]).T
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], np.asarray(y) * sw, rcond=None)
    return float(coef[0])


def psi_r_slopes(grid: Grid1D, gs: GroundState, Rs=(8, 16, 32, 64), x0=0.0) -> SlopeFit:
    """Weighted fits of <|D|psi, psi> and int psi^4 against R.

    Weights follow the remainder orders R^{-3/2} (kinetic) and R^{-2} (quartic).
    """
    R = np.asarray(Rs, dtype=float)
    kin, quart, amps = [], [], []
    for r in R:
        f, a2 = trial_psi_R(grid, gs, x0, r, return_amp=True)
        kin.append(grid.kinetic(f.values))
        quart.append(grid.integrate(f.values**4))
        amps.append(a2)
    ks = _weighted_slope(R, kin, R**-1.5)
    qs = _weighted_slope(R, quart, R**-2.0)
    return SlopeFit(list(R), kin, quart, amps, ks, qs, 1.0, 2.0 / gs.a_star)
