"""Periodic pseudospectral grid, half-Laplacian and quadratures.

Functions are sampled on ``x_j = -L + j*dx`` (``j = 0..n-1``) of the periodic
box ``[-L, L)``.  Spectral coefficients use the continuum convention

    F u(xi) = (2*pi)**-1/2 * integral exp(-i*xi*x) u(x) dx,

discretized by the rectangle rule, so ``sum |c_k|**2 * dxi`` equals
``dx * sum |f_j|**2`` exactly (Plancherel) and ``c_k`` approximates
``F u(xi_k)`` directly.  Frequencies are ``xi_k = pi*k/L``.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.signal import czt

from .errors import GridMismatch, ImaginaryResidueTooLarge

# Fourier symbol of the kinetic operator as a function of |xi|.  Overridable
# only for fault injection in the verification suite.
_SYMBOL: contextvars.ContextVar[Callable[[np.ndarray], np.ndarray] | None] = (
    contextvars.ContextVar("fracbec_symbol", default=None)
)


@contextlib.contextmanager
def symbol_override(symbol):
    """Temporarily replace the multiplier |xi| by ``symbol(|xi|)``."""
    token = _SYMBOL.set(symbol)
    try:
        yield
    finally:
        _SYMBOL.reset(token)


def _symbol(abs_xi):
    fn = _SYMBOL.get()
    return abs_xi if fn is None else fn(abs_xi)


@dataclass(frozen=True)
class Grid1D:
    n: int
    L: float

    def __post_init__(self):
        n = int(self.n)
        if n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"half_length must be positive, got {self.L}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", float(self.L))

    @property
    def half_length(self):
        return self.L

    @property
    def dx(self):
        return 2.0 * self.L / self.n

    @property
    def dxi(self):
        return math.pi / self.L

    @cached_property
    def x(self):
        x = -self.L + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def freqs(self):
        """All n frequencies, ascending: k = -n/2 .. n/2-1."""
        k = np.arange(-self.n // 2, self.n // 2)
        f = math.pi * k / self.L
        f.flags.writeable = False
        return f

    @cached_property
    def _rxi(self):
        # |xi| in numpy rfft layout (k = 0..n/2)
        r = math.pi * np.arange(self.n // 2 + 1) / self.L
        r.flags.writeable = False
        return r

    @cached_property
    def _shift_sign(self):
        # exp(i*xi_k*L) = (-1)**k for the ascending frequency ladder
        s = np.where(np.arange(-self.n // 2, self.n // 2) % 2 == 0, 1.0, -1.0)
        s.flags.writeable = False
        return s

    @property
    def xi_max(self):
        return math.pi * self.n / (2.0 * self.L)

    # array-level kernels used by the solvers
    def multiplier_r(self):
        return _symbol(self._rxi)

    def sqrt_lap(self, values):
        return np.fft.irfft(self.multiplier_r() * np.fft.rfft(values), n=self.n)

    def integrate(self, values):
        return self.dx * float(np.sum(values))

    def kinetic(self, values):
        """<sqrt(-Lap) u, u> from the spectral side."""
        c = np.fft.rfft(values)
        w = np.abs(c) ** 2
        w[1:-1] *= 2.0
        return self.dx / self.n * float(np.sum(self.multiplier_r() * w))


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite samples")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, fn(np.asarray(grid.x)))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.n))

    def __add__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c):
        return Field(self.grid, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    grid: Grid1D
    coeffs: np.ndarray

    def conjugate_symmetry_error(self):
        """max |c(-xi) - conj c(xi)| over the pairs k, -k (k = 1..n/2-1)."""
        c = self.coeffs
        h = self.grid.n // 2
        pos = c[h + 1 :]
        neg = c[1:h][::-1]
        err = np.max(np.abs(neg - np.conj(pos))) if len(pos) else 0.0
        # DC and Nyquist must be real
        err = max(err, abs(c[h].imag), abs(c[0].imag))
        return float(err)


def _same_grid(f, g):
    if f.grid != g.grid:
        raise GridMismatch(f"fields live on different grids: {f.grid} vs {g.grid}")


def forward_transform(f: Field) -> SpectralCoeffs:
    g = f.grid
    raw = np.fft.fftshift(np.fft.fft(f.values))
    c = (g.dx / math.sqrt(2.0 * math.pi)) * g._shift_sign * raw
    return SpectralCoeffs(g, c)


def inverse_transform(s: SpectralCoeffs, check=True) -> Field:
    g = s.grid
    raw = np.fft.ifftshift(s.coeffs * g._shift_sign) * (math.sqrt(2.0 * math.pi) / g.dx)
    v = np.fft.ifft(raw)
    if check:
        _check_imag(v)
    return Field(g, v.real)


def _norm(v):
    """l2 norm that does not underflow for tiny amplitudes."""
    m = float(np.max(np.abs(v))) if len(v) else 0.0
    return m * float(np.linalg.norm(v / m)) if m > 0 else 0.0


def _check_imag(v, scale=None):
    scale = _norm(v.real) if scale is None else scale
    resid = float(np.max(np.abs(v.imag))) if len(v) else 0.0
    if resid > 1e-8 * max(scale, np.finfo(float).tiny):
        raise ImaginaryResidueTooLarge(f"imaginary residue {resid:.3e} vs scale {scale:.3e}")
    return resid


def apply_sqrt_laplacian(f: Field) -> Field:
    g = f.grid
    mult = _symbol(np.abs(g.freqs))
    s = forward_transform(f)
    out = np.fft.ifft(
        np.fft.ifftshift(mult * s.coeffs * g._shift_sign) * (math.sqrt(2.0 * math.pi) / g.dx)
    )
    _check_imag(out, scale=math.sqrt(g.dx) * _norm(f.values))
    return Field(g, out.real)


def quarter_seminorm_sq(f: Field) -> float:
    """||(-Lap)^{1/4} f||_2^2 = integral |xi| |F f(xi)|^2 dxi."""
    s = forward_transform(f)
    mult = _symbol(np.abs(f.grid.freqs))
    return float(np.sum(mult * np.abs(s.coeffs) ** 2) * f.grid.dxi)


def spectral_l2_sq(f: Field) -> float:
    s = forward_transform(f)
    return float(np.sum(np.abs(s.coeffs) ** 2) * f.grid.dxi)


def lp_norm_pow(f: Field, p: int) -> float:
    if p not in (2, 4):
        raise ValueError("p must be 2 or 4")
    return f.grid.dx * float(np.sum(np.abs(f.values) ** p))


def inner_product(f: Field, g: Field) -> float:
    _same_grid(f, g)
    return f.grid.dx * float(np.dot(f.values, g.values))


# --- interpolation -----------------------------------------------------------

def trig_eval(grid: Grid1D, values, points, chunk=2048):
    """Evaluate the trigonometric interpolant of ``values`` at ``points``."""
    values = np.asarray(values, dtype=float)
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    n = grid.n
    c = np.fft.rfft(values) / n
    c[1:-1] *= 2.0
    k = np.arange(n // 2 + 1)
    out = np.empty(pts.shape[0])
    for start in range(0, pts.shape[0], chunk):
        y = pts[start : start + chunk] + grid.L
        theta = np.outer(y, k * (math.pi / grid.L))
        # the Nyquist term of a real trigonometric interpolant is a cosine
        out[start : start + chunk] = (np.cos(theta) @ c.real) - (np.sin(theta[:, :-1]) @ c.imag[:-1])
    return out.reshape(np.shape(points)) if np.ndim(points) else float(out[0])


def dilate(grid: Grid1D, values, lam, core=0.5):
    """Samples of lam**0.5 * u(lam*x) by spectral interpolation.

    Points where ``|lam*x|`` leaves ``[-core*L, core*L]`` are set to zero,
    which is exact when u is supported in the core.  The interpolant at the
    uniformly scaled nodes lam*x_j is a chirp-z transform of the coefficients.
    """
    n = grid.n
    c = np.fft.rfft(np.asarray(values, dtype=float)) / n
    c[1:-1] *= 2.0
    c[-1] = c[-1].real  # Nyquist term of a real interpolant is a cosine
    k = np.arange(n // 2 + 1)
    # lam*x_j + L = (1 - lam) L + lam j dx
    coef = c * np.exp(1j * math.pi * k * (1.0 - lam))
    vals = czt(coef, n, w=np.exp(2j * math.pi * lam / n), a=1.0).real
    y = lam * np.asarray(grid.x)
    return np.where(np.abs(y) <= core * grid.L, math.sqrt(lam) * vals, 0.0)


def resample(src: Grid1D, values, dst: Grid1D, tail_power=None):
    """Interpolate a field onto another grid.

    Points of ``dst`` outside ``src``'s box are zero, or follow a
    ``|x|**-tail_power`` continuation of the edge value when ``tail_power``
    is given.
    """
    x = np.asarray(dst.x)
    inside = (x >= -src.L) & (x < src.L)
    out = np.zeros(dst.n)
    out[inside] = trig_eval(src, values, x[inside])
    if tail_power is not None and not np.all(inside):
        edge = abs(float(values[0]))
        out[~inside] = edge * (src.L / np.abs(x[~inside])) ** tail_power
    return out
