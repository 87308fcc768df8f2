"""Two-component energy on the double mass constraint and its minimization.

    E(u1, u2) = sum_i [<|D| u_i, u_i> + int V_i u_i^2 - a_i/2 int u_i^4]
                - beta int u1^2 u2^2
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, NoConvergence, PreconditionError
from .options import SolverOptions
from .potentials import PotentialSpec, V_EDGE_MIN
from .spectral import Field, Grid1D

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemParams:
    a1: float
    a2: float
    beta: float
    v1: PotentialSpec = PotentialSpec()
    v2: PotentialSpec = PotentialSpec()
    v_edge_min: float = V_EDGE_MIN

    def __post_init__(self):
        for name in ("a1", "a2"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise PreconditionError(f"{name} must be finite and positive, got {val}")
        if not math.isfinite(self.beta):
            raise PreconditionError("beta must be finite")

    @property
    def beta_plus(self):
        return max(self.beta, 0.0)

    def potentials(self, grid):
        return (self.v1.build(grid, self.v_edge_min), self.v2.build(grid, self.v_edge_min))


@dataclass
class DivergenceEvidence:
    reason: str
    energy_trace: list = field(repr=False)


@dataclass
class MinimizeResult:
    u1: Field
    u2: Field
    energy: float
    mu1: float
    mu2: float
    iterations: int
    converged: bool
    el_residual: float
    diverged: DivergenceEvidence | None = None
    energy_trace: list = field(default_factory=list, repr=False)
    locations: tuple = ()

    @property
    def diverged_evidence(self):
        return self.diverged is not None

    @property
    def masses(self):
        g = self.u1.grid
        return (g.integrate(self.u1.values**2), g.integrate(self.u2.values**2))

    def summary(self):
        return {
            "energy": self.energy,
            "mu1": self.mu1,
            "mu2": self.mu2,
            "iterations": self.iterations,
            "converged": self.converged,
            "el_residual": self.el_residual,
            "masses": list(self.masses),
            "diverged_evidence": self.diverged_evidence,
            "divergence_reason": self.diverged.reason if self.diverged else None,
            "locations": list(self.locations),
        }


def _check(u1, u2):
    if u1.grid != u2.grid:
        raise GridMismatch(f"{u1.grid} vs {u2.grid}")
    return u1.grid


def energy_terms(u1: Field, u2: Field, params: SystemParams):
    g = _check(u1, u2)
    v1, v2 = params.potentials(g)
    a, b = u1.values, u2.values
    return {
        "kin1": g.kinetic(a),
        "kin2": g.kinetic(b),
        "pot1": g.integrate(v1.values * a**2),
        "pot2": g.integrate(v2.values * b**2),
        "quart1": g.integrate(a**4),
        "quart2": g.integrate(b**4),
        "cross": g.integrate(a**2 * b**2),
    }


def _combine(t, params):
    return (
        t["kin1"] + t["kin2"] + t["pot1"] + t["pot2"]
        - 0.5 * params.a1 * t["quart1"] - 0.5 * params.a2 * t["quart2"]
        - params.beta * t["cross"]
    )


def energy(u1: Field, u2: Field, params: SystemParams) -> float:
    return _combine(energy_terms(u1, u2, params), params)


def decomposition(u1: Field, u2: Field, params: SystemParams, a_star: float):
    """Split E into the three groups that are each >= 0 on the critical diagonal.

    gn_i = <|D|u_i,u_i> - a*/2 int u_i^4 (Gagliardo-Nirenberg at unit mass),
    trap = int V1 u1^2 + V2 u2^2, mix = beta/2 int (u1^2 - u2^2)^2.
    The identity E = gn_1 + gn_2 + trap + mix needs a1 = a2 = a* - beta.
    """
    t = energy_terms(u1, u2, params)
    g = u1.grid
    return {
        "gn1": t["kin1"] - 0.5 * a_star * t["quart1"],
        "gn2": t["kin2"] - 0.5 * a_star * t["quart2"],
        "trap": t["pot1"] + t["pot2"],
        "mix": 0.5 * params.beta * g.integrate((u1.values**2 - u2.values**2) ** 2),
        "energy": _combine(t, params),
    }


def _grad_arrays(g, a, b, v1, v2, params):
    ga = g.sqrt_lap(a) + v1 * a - params.a1 * a**3 - params.beta * b**2 * a
    gb = g.sqrt_lap(b) + v2 * b - params.a2 * b**3 - params.beta * a**2 * b
    return 2.0 * ga, 2.0 * gb


def grad_energy(u1: Field, u2: Field, params: SystemParams):
    g = _check(u1, u2)
    v1, v2 = params.potentials(g)
    ga, gb = _grad_arrays(g, u1.values, u2.values, v1.values, v2.values, params)
    return Field(g, ga), Field(g, gb)


def chemical_potentials(u1: Field, u2: Field, params: SystemParams):
    ga, gb = grad_energy(u1, u2, params)
    g = u1.grid
    m1 = g.integrate(u1.values**2)
    m2 = g.integrate(u2.values**2)
    return (
        0.5 * g.integrate(ga.values * u1.values) / m1,
        0.5 * g.integrate(gb.values * u2.values) / m2,
    )


def el_residual(u1: Field, u2: Field, params: SystemParams):
    """max_i || half-gradient_i - mu_i u_i ||_inf / ||u_i||_inf."""
    ga, gb = grad_energy(u1, u2, params)
    mu1, mu2 = chemical_potentials(u1, u2, params)
    r1 = np.max(np.abs(0.5 * ga.values - mu1 * u1.values)) / np.max(np.abs(u1.values))
    r2 = np.max(np.abs(0.5 * gb.values - mu2 * u2.values)) / np.max(np.abs(u2.values))
    return float(max(r1, r2))


# --- flow ---------------------------------------------------------------------

class _Implicit:
    """Solves (I + tau (|D| + V)) w = r by preconditioned CG.

    The preconditioner is S F^-1 (1 + tau|xi|)^-1 F S with the diagonal
    S = sqrt(m / (m + tau V)), m the mean of 1 + tau|xi|.
    """

    def __init__(self, grid, v, tol=1e-11, maxit=2000):
        self.grid = grid
        self.v = v
        self.xi = grid.multiplier_r()
        self.tol = tol
        self.maxit = maxit
        self._tau = None

    def _setup(self, tau):
        if tau != self._tau:
            self._tau = tau
            self.dxi = 1.0 + tau * self.xi
            m = float(np.mean(self.dxi))
            self.s = np.sqrt(m / (m + tau * self.v))

    def apply(self, w, tau):
        return w + tau * (self.grid.sqrt_lap(w) + self.v * w)

    def solve(self, r, tau, x0):
        self._setup(tau)
        n = self.grid.n
        s, dxi = self.s, self.dxi

        def prec(y):
            return s * np.fft.irfft(np.fft.rfft(s * y) / dxi, n=n)

        x = x0.copy()
        res = r - self.apply(x, tau)
        nb = np.linalg.norm(r)
        if np.linalg.norm(res) <= self.tol * nb:
            return x
        z = prec(res)
        p = z.copy()
        rz = res @ z
        for _ in range(self.maxit):
            ap = self.apply(p, tau)
            alpha = rz / (p @ ap)
            x += alpha * p
            res -= alpha * ap
            if np.linalg.norm(res) <= self.tol * nb:
                return x
            z = prec(res)
            rz_new = res @ z
            p = z + (rz_new / rz) * p
            rz = rz_new
        return x


def _normalize(g, w):
    m = g.integrate(w**2)
    if not m > 0:
        raise NoConvergence(0, math.nan, "component lost all mass")
    return w / math.sqrt(m)


def top_band_fraction(g: Grid1D, w):
    """Share of spectral mass above half the Nyquist frequency."""
    c = np.abs(np.fft.rfft(w)) ** 2
    c[1:-1] *= 2.0
    k = np.arange(len(c))
    return float(np.sum(c[k > g.n // 4]) / np.sum(c))


def default_init(grid: Grid1D, params: SystemParams, seed=0, noise=0.0):
    """Gaussian bumps at each potential's grid minimizer (plus optional seeded noise)."""
    x = np.asarray(grid.x)
    rng = np.random.default_rng(seed)
    width = min(max(1.0, 8 * grid.dx), grid.L / 8)
    out = []
    for pot in params.potentials(grid):
        w = np.exp(-((x - pot.argmin) ** 2) / (2 * width**2))
        if noise:
            w = w * (1.0 + noise * rng.standard_normal(grid.n))
        out.append(Field(grid, _normalize(grid, w)))
    return tuple(out)


def resolved_trial_init(grid: Grid1D, q_profile, cells=8.0, centers=(0.0, 0.0)):
    """Unit-mass eps^{-1/2} Q((x - c)/eps) in both components with eps = cells * dx.

    ``q_profile`` evaluates Q at arbitrary points (GroundState.evaluate).  On
    the critical diagonal the flow from this start slides toward the origin
    scale; the collapse guard stops it where the grid still resolves Q.
    """
    eps = cells * grid.dx
    x = np.asarray(grid.x)
    out = []
    for c in centers:
        w = np.asarray(q_profile((x - c) / eps), dtype=float)
        out.append(Field(grid, _normalize(grid, w)))
    return tuple(out)


def minimize(params: SystemParams, grid: Grid1D, opts: SolverOptions | None = None, init=None,
             collapse_band=1e-3, strict=False) -> MinimizeResult:
    """Normalized gradient flow, backward Euler in |D| + V, explicit interaction.

    Running out of iterations returns the last iterate with converged=False,
    or raises NoConvergence when ``strict``.  Divergence evidence is a
    result, never an exception.
    """
    opts = opts or SolverOptions(tol=1e-7)
    if init is None:
        init = default_init(grid, params, opts.seed)
    u1, u2 = init
    _check(u1, u2)
    if u1.grid != grid:
        raise GridMismatch("init fields are not on the requested grid")
    g = grid
    if not (g.integrate(u1.values**2) > 0 and g.integrate(u2.values**2) > 0):
        raise PreconditionError("init fields need positive mass")
    pots = params.potentials(g)
    v1, v2 = pots[0].values, pots[1].values
    solvers = (_Implicit(g, v1), _Implicit(g, v2))
    a = _normalize(g, np.array(u1.values))
    b = _normalize(g, np.array(u2.values))

    def terms(a, b):
        return {
            "kin1": g.kinetic(a), "kin2": g.kinetic(b),
            "pot1": g.integrate(v1 * a**2), "pot2": g.integrate(v2 * b**2),
            "quart1": g.integrate(a**4), "quart2": g.integrate(b**4),
            "cross": g.integrate(a**2 * b**2),
        }

    def residual(a, b):
        ga, gb = _grad_arrays(g, a, b, v1, v2, params)
        mu1 = 0.5 * g.integrate(ga * a)
        mu2 = 0.5 * g.integrate(gb * b)
        r1 = np.max(np.abs(0.5 * ga - mu1 * a)) / np.max(np.abs(a))
        r2 = np.max(np.abs(0.5 * gb - mu2 * b)) / np.max(np.abs(b))
        return float(max(r1, r2)), mu1, mu2

    e = _combine(terms(a, b), params)
    e0 = e
    trace = [e]
    tau = opts.dt
    evidence = None
    res, mu1, mu2 = residual(a, b)
    it = 0
    monotone_drop = True
    while it < opts.max_iter:
        if res < opts.tol:
            break
        it += 1
        # carrying mu u on the explicit side makes fixed points exact
        ra = a + tau * (params.a1 * a**3 + params.beta * b**2 * a + mu1 * a)
        rb = b + tau * (params.a2 * b**3 + params.beta * a**2 * b + mu2 * b)
        na = _normalize(g, solvers[0].solve(ra, tau, a))
        nb = _normalize(g, solvers[1].solve(rb, tau, b))
        en = _combine(terms(na, nb), params)
        noise = opts.energy_slack * max(1.0, abs(e))
        accept = en < e - noise
        if not accept and en <= e + noise:
            # energy flat to round-off: an unstable mode would still show in
            # the residual, so let that decide
            res_n, mu1_n, mu2_n = residual(na, nb)
            accept = res_n <= res
        if not accept:
            tau *= 0.5
            if tau < 1e-14:
                raise NoConvergence(it, res, "time step collapsed while energy kept rising")
            continue
        a, b, e = na, nb, en
        trace.append(e)
        tau = min(tau * opts.dt_grow, opts.dt_max)
        res, mu1, mu2 = residual(a, b)
        if it % 500 == 0:
            log.debug("it %d E %.15g res %.3e tau %.3g", it, e, res, tau)
        # evidence that the infimum is -infinity
        if e < opts.diverge_floor:
            evidence = DivergenceEvidence("energy below floor", trace)
        elif e0 - e > opts.diverge_factor * abs(e0) and abs(e0) > 0:
            evidence = DivergenceEvidence("energy fell by the divergence factor", trace)
        elif collapse_band is not None and e < e0 and max(top_band_fraction(g, a), top_band_fraction(g, b)) > collapse_band:
            evidence = DivergenceEvidence("focusing to grid scale with decreasing energy", trace)
        if evidence is not None:
            break
    converged = evidence is None and res < opts.tol
    if not converged and evidence is None:
        if strict:
            raise NoConvergence(it, res)
        log.warning("minimize stopped after %d iterations, residual %.3e", it, res)
    locs = (float(g.x[int(np.argmax(np.abs(a)))]), float(g.x[int(np.argmax(np.abs(b)))]))
    return MinimizeResult(
        u1=Field(g, a), u2=Field(g, b), energy=e, mu1=mu1, mu2=mu2,
        iterations=it, converged=converged, el_residual=res,
        diverged=evidence, energy_trace=trace, locations=locs,
    )


@dataclass
class SandwichReport:
    energy: float
    lower: float
    upper: float
    inf_v_sum: float
    tol: float
    passed: bool


def sandwich_check(params: SystemParams, result: MinimizeResult, a_star: float, tol=1e-3):
    """0 - tol <= e <= min_grid(V1 + V2) + tol on the critical diagonal."""
    b = params.beta
    if not (0 < b < a_star):
        raise PreconditionError("needs 0 < beta < a*")
    if abs(params.a1 - (a_star - b)) > 1e-12 * a_star or abs(params.a2 - (a_star - b)) > 1e-12 * a_star:
        raise PreconditionError("needs a1 = a2 = a* - beta")
    g = result.u1.grid
    v1, v2 = params.potentials(g)
    inf_v = float(np.min(v1.values + v2.values))
    e = result.energy
    ok = (-tol <= e <= inf_v + tol)
    return SandwichReport(e, -tol, inf_v + tol, inf_v, tol, ok)
