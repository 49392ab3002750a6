import numpy as np
import pytest

from kahler_hodge.checks import check_green
from kahler_hodge.fields import FormField, GridSpec, Region
from kahler_hodge.green import (
    energy_norm,
    green_identity_residual,
    scalar_product_one,
    scalar_product_zero,
)

G = GridSpec.cube(3, -1.0, 1.0, 7)


def const(comps):
    return FormField(G, {k: np.full(G.shape, v) for k, v in comps.items()})


def test_scalar_product_examples():
    assert np.all(scalar_product_zero(const({(1,): 1.0}), const({(1,): 1.0})) == 1.0)
    assert np.all(scalar_product_zero(const({(1,): 1.0}), const({(1, 2): 1.0})) == 0.0)
    assert np.all(scalar_product_zero(const({(1, 2): 1.0}), const({(1, 2): 1.0})) == 1.0)
    assert np.all(scalar_product_zero(const({(1, 2, 3): 2.0}), const({(1, 2, 3): 3.0})) == 6.0)


def test_scalar_product_is_symmetric(rng):
    u = FormField(G, {k: rng.normal(size=G.shape) for k in [(), (1,), (2, 3), (1, 2, 3)]})
    v = FormField(G, {k: rng.normal(size=G.shape) for k in [(), (1,), (1, 3), (1, 2, 3)]})
    assert np.allclose(scalar_product_zero(u, v), scalar_product_zero(v, u))


def test_first_order_product_has_grade_n_minus_one():
    one = scalar_product_one(const({(1,): 1.0}), const({(): 1.0}))
    assert one.grades() == {2}


def test_constants_give_zero_residual():
    r = green_identity_residual(const({(): 1.0, (1,): 2.0}), const({(2,): 1.0, (1, 3): 0.5}))
    assert r.pointwise == 0.0
    assert r.integrated < 1e-12


def test_linear_fields_are_exact():
    m = G.mesh()
    u = FormField(G, {(): 1 + m[0], (1, 2): m[2]})
    v = FormField(G, {(1,): np.ones(G.shape), (2,): np.ones(G.shape), (3,): 2.0 + 0 * m[0]})
    r = green_identity_residual(u, v)
    assert r.pointwise < 1e-12
    assert r.integrated < 1e-12


def test_energy_norm_of_unit_form():
    g = GridSpec.cube(3, 0.0, 1.0, 5)
    assert energy_norm(FormField(g, {(1,): np.ones(g.shape)})) == pytest.approx(1.0)
    sub = Region(GridSpec.cube(3, 0.0, 2.0, 9), ((0, 4), (0, 4), (0, 4)))
    big = FormField(sub.grid, {(1,): np.ones(sub.grid.shape)})
    assert energy_norm(big, sub) == pytest.approx(1.0)


@pytest.mark.slow
def test_green_suite_passes():
    assert check_green().passed
