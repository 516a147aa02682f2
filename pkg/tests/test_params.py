import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dstab.errors import CapacityError, InputError
from dstab.oracle import cofactor_det, expand_state_space
from dstab.params import (MAX_PARAMS, MonomialPolynomial, ParameterBox, evaluate, scale_box,
                          value_set_vertex_images, verify_multilinearity, vertices)

from _instances import FOUR_STATE_BOX, four_state


def _cofactor_value(poly, z, q):
    m = z * np.eye(poly.degree) - poly.matrix(q)
    return cofactor_det(m.tolist())


# -- boxes

def test_box_rejects_inverted_bounds():
    with pytest.raises(InputError):
        ParameterBox((1.0,), (0.0,))


def test_box_rejects_nominal_outside():
    with pytest.raises(InputError):
        ParameterBox((0.0,), (1.0,), (2.0,))


def test_box_default_nominal_is_center():
    assert ParameterBox((0.0, 0.0), (1.0, 3.0)).nominal == (0.5, 1.5)


def test_vertices_one_dimensional():
    assert vertices(ParameterBox((0.0,), (1.0,))) == [(0.0,), (1.0,)]


def test_vertices_binary_order():
    assert vertices(FOUR_STATE_BOX) == [(0.0, 0.0), (1.0, 0.0), (0.0, 3.0), (1.0, 3.0)]


def test_vertices_degenerate_edge_keeps_duplicates():
    assert vertices(ParameterBox((2.0, 0.0), (2.0, 1.0))) == [(2.0, 0.0), (2.0, 0.0), (2.0, 1.0), (2.0, 1.0)]


def test_too_many_parameters():
    n = MAX_PARAMS + 1
    with pytest.raises(CapacityError):
        ParameterBox((0.0,) * n, (1.0,) * n)


def test_scale_box_identity_and_collapse():
    assert scale_box(FOUR_STATE_BOX, 1.0) == FOUR_STATE_BOX
    point = scale_box(FOUR_STATE_BOX, 0.0)
    assert point.lower == point.upper == (0.5, 1.5)


def test_scale_box_doubles_about_center():
    box = scale_box(FOUR_STATE_BOX, 2.0)
    assert box.lower == (-0.5, -1.5)
    assert box.upper == (1.5, 4.5)


@given(st.floats(0, 50), st.floats(0, 50))
def test_scale_box_nesting(k1, k2):
    k1, k2 = sorted((k1, k2))
    small = scale_box(FOUR_STATE_BOX, k1)
    big = scale_box(FOUR_STATE_BOX, k2)
    assert big.contains_box(small)


# -- evaluation

def test_eval_identity_case():
    poly = MonomialPolynomial((((1.0, (1,)),), ((1.0, (0,)),)), 1)
    assert evaluate(poly, 1j, (0.0,)) == 1j


def test_state_space_is_monic():
    coeffs = four_state().coefficients((0.3, 2.0))
    assert coeffs[-1] == pytest.approx(1.0)
    assert len(coeffs) == 5


def test_eval_matches_cofactor_oracle():
    poly = four_state()
    got = poly.eval(9.78j, (0.0, 0.0))
    want = _cofactor_value(poly, 9.78j, (0.0, 0.0))
    assert abs(got - want) <= 1e-9 * abs(want)


def test_vertex_images_of_linear_family():
    poly = MonomialPolynomial((((1.0, (1,)),), ((1.0, (0,)),)), 1)
    images = value_set_vertex_images(poly, 0j, ParameterBox((-1.0,), (1.0,))).images
    assert list(images) == [-1.0, 1.0]


def test_vertex_images_of_point_box():
    poly = four_state()
    box = ParameterBox((0.5, 1.5), (0.5, 1.5))
    images = value_set_vertex_images(poly, 2j, box).images
    assert np.all(images == poly.eval(2j, (0.5, 1.5)))


def test_vertex_images_match_cofactor_oracle():
    poly = four_state()
    vs = value_set_vertex_images(poly, 9.78j, scale_box(FOUR_STATE_BOX, 1.4))
    assert len(vs.images) == 4
    for q, got in zip(vs.vertices, vs.images):
        want = _cofactor_value(poly, 9.78j, q)
        assert abs(got - want) <= 1e-9 * abs(want)


def test_backends_agree_with_symbolic_expansion():
    poly = four_state()
    mono = expand_state_space(poly)
    rng = np.random.default_rng(0)
    for _ in range(100):
        z = complex(rng.normal(), 10 * rng.normal())
        q = rng.uniform(-2, 4, 2)
        a, b = poly.eval(z, q), mono.eval(z, q)
        assert abs(a - b) <= 1e-9 * max(abs(a), 1.0)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        four_state().eval(1j, (0.0, 0.0, 0.0))


# -- multilinearity

def test_four_state_is_multilinear():
    assert verify_multilinearity(four_state(), FOUR_STATE_BOX)


def test_square_term_is_not_multilinear():
    poly = MonomialPolynomial((((1.0, (2,)),), ((1.0, (0,)),)), 1)
    assert not verify_multilinearity(poly, ParameterBox((0.0,), (1.0,)))


def test_cross_product_is_multilinear():
    poly = MonomialPolynomial((((1.0, (1, 1)),), ((1.0, (0, 0)),)), 2)
    assert verify_multilinearity(poly, ParameterBox((0.0, 0.0), (1.0, 1.0)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_random_multilinear_families_verify(seed):
    from _instances import random_multilinear

    poly, box = random_multilinear(seed, 3)
    assert verify_multilinearity(poly, box)
