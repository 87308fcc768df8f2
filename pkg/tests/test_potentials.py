import numpy as np
import pytest

from fracbec.errors import PreconditionError
from fracbec.potentials import PotentialSpec, parse_potential
from fracbec.spectral import Grid1D

G = Grid1D(512, 16.0)


@pytest.mark.parametrize("spec", [
    PotentialSpec("harmonic"), PotentialSpec("power", p=4), PotentialSpec("shifted_well", x0=3.0),
    PotentialSpec("double_well", b=2.0),
    PotentialSpec("custom_table", xs=(-16.0, 0.0, 16.0), vs=(5.0, 1.0, 5.0)),
])
def test_confinement_surrogates(spec):
    v = spec.build(G)
    assert np.all(np.isfinite(v.values))
    assert v.values.min() == pytest.approx(0.0, abs=1e-12)
    assert np.all(v.values >= 0)
    assert v.edge_value >= 1e3 * (1 - 1e-12)
    assert np.allclose(v(np.asarray(G.x)), v.values)


def test_argmin_and_shift():
    v = PotentialSpec("shifted_well", x0=3.0).build(G)
    assert v.argmin == pytest.approx(3.0)
    assert v(3.0) == pytest.approx(0.0)


def test_fixed_coefficient_checked_against_edge_floor():
    v = PotentialSpec("harmonic", coef=10.0).build(G)
    assert v.coef == 10.0
    with pytest.raises(PreconditionError):
        PotentialSpec("harmonic", coef=1.0).build(G)


def test_zero_potential_is_diagnostic():
    v = PotentialSpec("zero").build(G)
    assert np.all(v.values == 0)


def test_invalid_specs():
    with pytest.raises(PreconditionError):
        PotentialSpec("quartic")
    with pytest.raises(PreconditionError):
        PotentialSpec("power", p=-1)
    with pytest.raises(PreconditionError):
        PotentialSpec("custom_table", xs=(0.0, 0.0), vs=(1.0, 1.0))
    with pytest.raises(PreconditionError):
        PotentialSpec("harmonic", coef=-2.0)


def test_parse_potential():
    assert parse_potential("harmonic") == PotentialSpec("harmonic")
    assert parse_potential("power:4").p == 4
    assert parse_potential("shifted-well:2.5").x0 == 2.5
    assert parse_potential("double_well:1.5").b == 1.5
    assert parse_potential("harmonic@7").coef == 7.0
    with pytest.raises(PreconditionError):
        parse_potential("harmonic:3")
