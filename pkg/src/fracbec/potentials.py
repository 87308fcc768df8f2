"""Trapping potentials on a truncated box.

A :class:`PotentialSpec` is a grid-independent description.  ``build`` turns it
into a :class:`Potential` on a particular grid: the shape is shifted so its
grid minimum is zero and scaled so the value at the box edge is at least
``v_edge_min`` (the truncated-box stand-in for V -> infinity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import PreconditionError
from .spectral import Grid1D

V_EDGE_MIN = 1e3
KINDS = ("harmonic", "power", "shifted_well", "double_well", "custom_table", "zero")


@dataclass(frozen=True)
class PotentialSpec:
    """``kind`` plus its parameters.

    harmonic: V = c x^2;  power: c |x|^p;  shifted_well: c (x - x0)^2;
    double_well: c (x^2 - b^2)^2;  custom_table: linear interpolation of
    (xs, vs);  zero: V = 0 (diagnostic only, violates confinement).

    ``coef`` = None picks the smallest coefficient meeting the edge condition.
    """

    kind: str = "harmonic"
    coef: float | None = None
    p: float = 2.0
    x0: float = 0.0
    b: float = 1.0
    xs: tuple = field(default=(), repr=False)
    vs: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown potential kind {self.kind!r}")
        if self.kind == "power" and not self.p > 0:
            raise PreconditionError("power potential needs p > 0")
        if self.kind == "custom_table":
            if len(self.xs) < 2 or len(self.xs) != len(self.vs):
                raise PreconditionError("custom_table needs matching xs, vs with >= 2 points")
            if np.any(np.diff(self.xs) <= 0):
                raise PreconditionError("custom_table xs must be increasing")
        if self.coef is not None and not (math.isfinite(self.coef) and self.coef > 0):
            raise PreconditionError("coef must be positive")

    def shape(self, x):
        x = np.asarray(x, dtype=float)
        k = self.kind
        if k == "harmonic":
            return x**2
        if k == "power":
            return np.abs(x) ** self.p
        if k == "shifted_well":
            return (x - self.x0) ** 2
        if k == "double_well":
            return (x**2 - self.b**2) ** 2
        if k == "custom_table":
            return np.interp(x, self.xs, self.vs)
        return np.zeros_like(x)

    def build(self, grid: Grid1D, v_edge_min=V_EDGE_MIN) -> "Potential":
        return _build(self, grid, float(v_edge_min))

    def describe(self):
        d = {"kind": self.kind}
        if self.coef is not None:
            d["coef"] = self.coef
        if self.kind == "power":
            d["p"] = self.p
        if self.kind == "shifted_well":
            d["x0"] = self.x0
        if self.kind == "double_well":
            d["b"] = self.b
        return d


@dataclass(frozen=True, eq=False)
class Potential:
    spec: PotentialSpec
    grid: Grid1D
    coef: float
    offset: float
    values: np.ndarray = field(repr=False)

    def __call__(self, x):
        """V at arbitrary points, with the same shift and scale as on the grid."""
        return self.coef * (self.spec.shape(x) - self.offset)

    @property
    def argmin(self):
        return float(self.grid.x[int(np.argmin(self.values))])

    @property
    def edge_value(self):
        return float(min(self.values[0], self(self.grid.L)))


@lru_cache(maxsize=64)
def _build(spec: PotentialSpec, grid: Grid1D, v_edge_min: float) -> Potential:
    x = np.asarray(grid.x)
    raw = spec.shape(x)
    offset = float(np.min(raw))
    if spec.kind == "zero":
        v = np.zeros(grid.n)
        v.flags.writeable = False
        return Potential(spec, grid, 1.0, 0.0, v)
    edge = float(min(spec.shape(-grid.L), spec.shape(grid.L))) - offset
    if spec.coef is None:
        if edge <= 0:
            raise PreconditionError(f"{spec.kind} potential does not grow toward the box edge")
        coef = v_edge_min / edge
    else:
        coef = spec.coef
        if coef * edge < v_edge_min * (1 - 1e-12):
            raise PreconditionError(
                f"edge value {coef * edge:.4g} below the confinement floor {v_edge_min:g}"
            )
    v = coef * (raw - offset)
    v.flags.writeable = False
    return Potential(spec, grid, coef, offset, v)


def parse_potential(text: str) -> PotentialSpec:
    """'harmonic', 'power:4', 'shifted_well:2.5', 'double_well:1.5', 'zero'.

    An optional trailing '@c' fixes the coefficient, e.g. 'harmonic@0.5'.
    """
    coef = None
    if "@" in text:
        text, c = text.split("@", 1)
        coef = float(c)
    kind, _, arg = text.partition(":")
    kind = kind.strip().replace("-", "_")
    if kind == "power":
        return PotentialSpec("power", coef, p=float(arg or 2))
    if kind == "shifted_well":
        return PotentialSpec("shifted_well", coef, x0=float(arg or 0))
    if kind == "double_well":
        return PotentialSpec("double_well", coef, b=float(arg or 1))
    if arg:
        raise PreconditionError(f"potential {kind!r} takes no argument")
    return PotentialSpec(kind, coef)
