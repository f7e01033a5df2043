"""Grid container and stencil behaviour."""

import numpy as np
import pytest

from monolab import GridSpec, ScalarField, TensorField, integrate, lp_norm
from monolab.grid import d1, d2

TWO_PI = 2.0 * np.pi


def keff(phi, h):
    # symbol of the 7-point first-derivative stencil at phase phi
    return (45 * np.sin(phi) - 9 * np.sin(2 * phi) + np.sin(3 * phi)) / (30 * h)


def test_gridspec_basics():
    g = GridSpec((8, 8, 16, 8), (TWO_PI, TWO_PI, 2 * TWO_PI, TWO_PI))
    assert g.node_count == 8 * 8 * 16 * 8
    assert np.allclose(g.spacing, TWO_PI / 8)
    assert np.isclose(g.cell_volume, (TWO_PI / 8) ** 4)
    assert g.coordinate(2).shape == (16,)
    assert g.mesh(2).shape == g.dims
    assert g.compatible(GridSpec((8, 8, 16, 8), (TWO_PI, TWO_PI, 2 * TWO_PI, TWO_PI)))
    assert not g.compatible(GridSpec((8,) * 4, (TWO_PI,) * 4))


def test_gridspec_rejects_bad_input():
    with pytest.raises(ValueError):
        GridSpec((3, 8, 8, 8), (TWO_PI,) * 4)
    with pytest.raises(ValueError):
        GridSpec((8,) * 4, (0.0, TWO_PI, TWO_PI, TWO_PI))


def test_field_shape_validation():
    g = GridSpec((8,) * 4, (TWO_PI,) * 4)
    with pytest.raises(ValueError):
        ScalarField(g, np.zeros((8, 8, 8, 7)))
    with pytest.raises(ValueError):
        TensorField(g, np.zeros(g.dims), rank=1)


def test_d1_exact_on_resolved_mode():
    # translation invariance makes the stencil act by its symbol exactly
    g = GridSpec((8,) * 4, (TWO_PI,) * 4)
    h = g.spacing[0]
    x = g.mesh(0)
    for k in (1, 2, 3):
        got = d1(np.sin(k * x), 0, h)
        want = keff(k * h, h) * np.cos(k * x)
        assert np.max(np.abs(got - want)) < 1e-12


def test_d1_constant_is_zero():
    g = GridSpec((8,) * 4, (TWO_PI,) * 4)
    assert np.max(np.abs(d1(np.full(g.dims, 0.7), 1, g.spacing[1]))) < 1e-13
    assert np.max(np.abs(d2(np.full(g.dims, 0.7), 1, g.spacing[1]))) < 1e-13


def order_between(err_coarse, err_fine, ratio):
    return np.log(err_coarse / err_fine) / np.log(ratio)


def test_stencils_are_sixth_order():
    errs1, errs2 = [], []
    for n in (16, 32):
        x = np.arange(n) * (TWO_PI / n)
        h = TWO_PI / n
        f = np.exp(np.sin(x))
        want1 = np.cos(x) * f
        want2 = (np.cos(x) ** 2 - np.sin(x)) * f
        errs1.append(np.max(np.abs(d1(f, 0, h) - want1)))
        errs2.append(np.max(np.abs(d2(f, 0, h) - want2)))
    assert order_between(errs1[0], errs1[1], 2.0) > 5.5
    assert order_between(errs2[0], errs2[1], 2.0) > 5.5


def test_d1_antisymmetric():
    rng = np.random.default_rng(3)
    g = GridSpec((8,) * 4, (TWO_PI,) * 4)
    f = rng.standard_normal(g.dims)
    w = rng.standard_normal(g.dims)
    lhs = np.sum(d1(f, 2, g.spacing[2]) * w)
    rhs = -np.sum(f * d1(w, 2, g.spacing[2]))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_integrate_and_norms(m8):
    g = m8.grid
    vol = TWO_PI**4
    ones = ScalarField(g, np.ones(g.dims))
    assert np.isclose(integrate(ones, metric=m8), vol, rtol=0, atol=1e-10)
    assert np.isclose(integrate(np.ones(g.dims), grid=g), vol)
    f = 2.0 * np.ones(g.dims)
    assert np.isclose(lp_norm(f, 2, grid=g), 2.0 * np.sqrt(vol))
    assert np.isclose(lp_norm(f, np.inf, grid=g), 2.0)
    assert np.isclose(lp_norm(f, 4, grid=g), 2.0 * vol**0.25)
