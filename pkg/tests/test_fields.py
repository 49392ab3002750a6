import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kahler_hodge.algebra import Multivector as MV
from kahler_hodge.fields import (
    FormField,
    GridError,
    GridSpec,
    Region,
    central_weights,
    exterior_derivative,
    field_product,
    interior_derivative,
    kahler_derivative,
    laplacian,
    partial_derivative,
)
from kahler_hodge.checks import calculus_identities, product_rule_ratios, random_field

GRID = GridSpec.cube(3, -1.0, 3.0, 9)


def test_partial_of_square():
    f = FormField.from_function(GRID, {(): lambda x, y, z: x * x})
    d1 = partial_derivative(f, 1)[()]
    i = list(GRID.coordinates(1)).index(2.0)
    assert d1[i, 3, 3] == pytest.approx(4.0, abs=1e-12)


def test_d_of_x1_dx2():
    f = FormField.from_function(GRID, {(2,): lambda x, y, z: x})
    out = exterior_derivative(f)
    assert np.allclose(out[(1, 2)], 1.0)
    assert all(np.all(v == 0) for k, v in out.components.items() if k != (1, 2))


def test_delta_of_x1_dx1_dx2():
    f = FormField.from_function(GRID, {(1, 2): lambda x, y, z: x})
    out = interior_derivative(f)
    assert np.allclose(out[(2,)], 1.0)
    assert np.allclose(out[(1,)], 0.0)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_laplacian_of_r2(order):
    f = FormField.from_function(GRID, {(): lambda x, y, z: x * x + y * y + z * z})
    assert np.allclose(laplacian(f, order)[()], 6.0, atol=1e-9)


def test_product_is_harmonic():
    f = FormField.from_function(GRID, {(): lambda x, y, z: x * y})
    assert np.allclose(laplacian(f)[()], 0.0, atol=1e-12)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_kahler_derivative_squares_to_laplacian(order):
    u = random_field(GridSpec.cube(3, 0.0, 1.0, 11), np.random.default_rng(3))
    assert (kahler_derivative(kahler_derivative(u, order), order) - laplacian(u, order)).max_abs() < 1e-9


@pytest.mark.parametrize("order", [2, 4, 6])
def test_dd_and_deltadelta_vanish(order):
    u = random_field(GridSpec.cube(4, 0.0, 1.0, 9), np.random.default_rng(4))
    assert exterior_derivative(exterior_derivative(u, order), order).max_abs() < 1e-9
    assert interior_derivative(interior_derivative(u, order), order).max_abs() < 1e-9


def test_central_weights_are_antisymmetric_and_consistent():
    for order in (2, 4, 6):
        w = central_weights(order)
        assert np.allclose(w, -w[::-1])
        offsets = np.arange(len(w)) - len(w) // 2
        assert np.dot(w, offsets) == pytest.approx(1.0)


@pytest.mark.parametrize("order, expected", [(2, 2.0), (4, 4.0), (6, 6.0)])
def test_derivative_order_of_accuracy(order, expected):
    errs = []
    for p in (41, 81):
        g = GridSpec.cube(3, -2.0, 2.0, p)
        f = FormField.from_function(g, {(): lambda x, y, z: np.sin(x) + 0 * y})
        m = g.interior_mask(order // 2 + 1)
        errs.append(np.max(np.abs(partial_derivative(f, 1, order)[()] - np.cos(g.mesh()[0]))[m]))
    assert np.log2(errs[0] / errs[1]) == pytest.approx(expected, abs=0.4)


def test_bad_order():
    with pytest.raises(ValueError):
        exterior_derivative(FormField.zeros(GRID), 3)


def test_grid_validation():
    with pytest.raises(GridError):
        GridSpec(((0.0, 1.0, 2),))
    with pytest.raises(GridError):
        GridSpec(((1.0, 0.0, 5),))


def test_quadrature_weights_integrate_the_box():
    g = GridSpec(((0.0, 2.0, 5), (-1.0, 1.0, 7), (0.0, 3.0, 4)))
    assert g.quadrature_weights().sum() == pytest.approx(12.0)


def test_region_restrict_and_classify():
    g = GridSpec.cube(3, 0.0, 1.0, 7)
    r = Region(g, ((1, 5), (0, 6), (2, 4)))
    assert r.shape == (5, 7, 3)
    f = FormField.scalar(g, g.mesh()[0])
    assert np.allclose(r.restrict(f)[()][:, 0, 0], g.coordinates(1)[1:6])
    labels = r.classify()
    assert labels[3, 3, 3] == 2 and labels[1, 3, 3] == 1 and labels[0, 3, 3] == 0


def test_region_out_of_bounds():
    with pytest.raises(GridError):
        Region(GRID, ((0, 9), (0, 8), (0, 8)))


def test_field_arithmetic_checks_grids():
    a = FormField.zeros(GRID)
    b = FormField.zeros(GridSpec.cube(3, 0.0, 1.0, 5))
    with pytest.raises(GridError):
        a + b


def test_constant_field_clifford_product_matches_algebra():
    u = FormField.constant(GRID, MV(3, {(1,): 2.0, (2, 3): 1.0}))
    v = FormField.constant(GRID, MV(3, {(1, 2): 1.0}))
    w = field_product(u, v)
    assert w.at((0, 0, 0)) == MV(3, {(1,): 2.0, (2, 3): 1.0}) * MV(3, {(1, 2): 1.0})


@given(st.integers(0, 10_000))
def test_exact_discrete_identities_hold(seed):
    rng = np.random.default_rng(seed)
    u = random_field(GridSpec.cube(3, 0.0, 1.0, 7), rng)
    c = MV(3, {(1,): rng.normal(), (2, 3): rng.normal(), (): rng.normal()})
    for name, value in calculus_identities(u, c).items():
        assert value < 1e-11, name


def test_product_rules_converge_at_second_order():
    ratios = product_rule_ratios()
    assert all(3.5 <= r <= 4.5 for r in ratios.values()), ratios
