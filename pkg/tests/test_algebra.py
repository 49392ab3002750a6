import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kahler_hodge import algebra as alg
from kahler_hodge.algebra import AlgebraError, Multivector as MV
from kahler_hodge.checks import check_algebra, oracle_clifford, oracle_product


def b(n, *axes, value=1.0):
    return MV.basis(n, axes, value)


# -- worked examples -----------------------------------------------------------

def test_clifford_examples():
    assert b(3, 1) * b(3, 1) == MV.scalar(3, 1.0)
    assert b(3, 1, 2) * b(3, 2) == b(3, 1)
    assert b(3, 1) * b(3, 2) == b(3, 1, 2)
    v = MV(3, {(1,): 2.0, (2, 3): -1.5, (): 4.0})
    assert MV.scalar(3) * v == v


def test_exterior_examples():
    assert (b(3, 1) ^ b(3, 1)) == MV(3)
    assert (b(3, 2) ^ b(3, 1)) == -b(3, 1, 2)
    assert (b(3, 1, 2) ^ b(3, 3)) == b(3, 1, 2, 3)


def test_interior_examples():
    assert alg.interior_product(b(3, 1), b(3, 1)) == MV.scalar(3, 1.0)
    assert alg.interior_product(b(3, 1), b(3, 2)) == MV(3)
    assert alg.interior_product(b(3, 1), b(3, 1, 2)) == b(3, 2)


def test_interior_needs_one_form():
    with pytest.raises(AlgebraError):
        alg.interior_product(b(3, 1, 2), b(3, 1, 2))


def test_eta_and_reversion_examples():
    assert alg.eta(b(3, 1)) == -b(3, 1)
    assert alg.eta(b(3, 1, 2)) == b(3, 1, 2)
    assert alg.eta(MV(3, {(): 3.0, (1,): 1.0})) == MV(3, {(): 3.0, (1,): -1.0})
    assert alg.reversion(b(3, 1)) == b(3, 1)
    assert alg.reversion(b(3, 1, 2)) == -b(3, 1, 2)
    assert alg.reversion(b(3, 1, 2, 3)) == -b(3, 1, 2, 3)


@pytest.mark.parametrize("n, square", [(1, 1.0), (3, -1.0), (4, 1.0)])
def test_unit_n_form_square(n, square):
    z = alg.unit_n_form(n)
    assert z * z == MV.scalar(n, square)


def test_unit_one_form():
    assert alg.unit_n_form(1) == b(1, 1)


@pytest.mark.parametrize("index, comp, sign", [((1,), (2, 3), 1), ((2,), (1, 3), -1), ((), (1, 2, 3), 1)])
def test_complement_examples(index, comp, sign):
    assert alg.complement(index, 3) == (comp, sign)


def test_complement_wedge_gives_z():
    for n in range(1, 6):
        z = alg.unit_n_form(n)
        for a in alg.all_indices(n):
            assert (MV(n, {a: 1.0}) ^ alg.complement_monomial(a, n)) == z


# -- validation ----------------------------------------------------------------

@pytest.mark.parametrize("axes", [(2, 1), (1, 1), (0,), (4,)])
def test_bad_basis_index(axes):
    with pytest.raises(AlgebraError):
        MV(3, {axes: 1.0})


def test_dimension_mismatch():
    with pytest.raises(AlgebraError):
        b(3, 1) * b(4, 1)


def test_unsorted_basis_constructor():
    assert b(3, 2, 1) == -b(3, 1, 2)
    assert b(3, 1, 2, 1) == -b(3, 2)


def test_labels():
    assert alg.index_label(()) == "0"
    assert alg.index_label((1, 3)) == "13"
    assert alg.index_label((2, 10)) == "2[10]"


def test_multivector_is_immutable():
    v = b(3, 1)
    with pytest.raises(AttributeError):
        v.foo = 1


# -- oracle --------------------------------------------------------------------

def test_algebra_suite_has_no_mismatches():
    res = check_algebra(5)
    assert res.passed, [r for r in res.rows if not r.passed]
    assert res.seconds < 10.0


def test_oracle_catches_a_planted_sign_error(monkeypatch):
    real = alg.reorder_sign

    def broken(a, c):
        s = real(a, c)
        return -s if (a, c) == (0b10, 0b01) else s

    monkeypatch.setattr(alg, "reorder_sign", broken)
    bad = alg.blade_clifford(0b10, 0b01)
    assert bad[1] != oracle_clifford((2,), (1,))[1]


def test_oracle_small_cases():
    assert oracle_clifford((2, 1), ()) == ((1, 2), -1)
    assert oracle_clifford((1, 2), (1, 2)) == ((), -1)
    assert oracle_product((1,), (1, 2), "exterior") is None
    assert oracle_product((1, 2), (1,), "left") is None


# -- properties ------------------------------------------------------------------

def multivectors(n):
    keys = st.sampled_from(alg.all_indices(n))
    coeff = st.floats(-4, 4, allow_nan=False).map(lambda x: round(x, 3))
    return st.dictionaries(keys, coeff, max_size=6).map(lambda d: MV(n, d))


@given(multivectors(4), multivectors(4), multivectors(4))
def test_clifford_associative(u, v, w):
    assert ((u * v) * w).isclose(u * (v * w), atol=1e-9)


@given(multivectors(4), multivectors(4), multivectors(4))
def test_exterior_associative(u, v, w):
    assert ((u ^ v) ^ w).isclose(u ^ (v ^ w), atol=1e-9)


@given(multivectors(5))
def test_involutions(u):
    assert alg.eta(alg.eta(u)) == u
    assert alg.reversion(alg.reversion(u)) == u


@given(multivectors(4), multivectors(4))
def test_reversion_is_an_anti_automorphism(u, v):
    assert alg.reversion(u * v).isclose(alg.reversion(v) * alg.reversion(u), atol=1e-9)


@given(st.sampled_from(alg.all_indices(4)), multivectors(4))
def test_one_form_splits_into_interior_plus_exterior(axis_idx, u):
    if len(axis_idx) != 1:
        return
    w = MV(4, {axis_idx: 1.0})
    assert (w * u).isclose(alg.interior_product(w, u) + (w ^ u), atol=1e-12)
    assert (u * w).isclose(alg.right_interior_product(u, w) + (u ^ w), atol=1e-12)


@given(multivectors(3))
def test_grade_projection_keys(u):
    for k in range(4):
        assert all(len(key) == k for key in u.grade_part(k).coeffs)


def test_scalar_product_matches_clifford_scalar_part():
    for a, c in itertools.product(alg.all_indices(3), repeat=2):
        u, v = MV(3, {a: 2.0}), MV(3, {c: 3.0})
        assert alg.scalar_product(u, v) == (u * v).scalar_part()
