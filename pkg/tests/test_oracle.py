import math

import numpy as np
import pytest

from dstab.bounds import frequency_bounds
from dstab.errors import CapacityError
from dstab.oracle import cofactor_det, oracle_k_m, winding_inclusion
from dstab.params import MonomialPolynomial, ParameterBox, scale_box

from _instances import FOUR_STATE_BOX, four_state, random_frequencies, random_multilinear

# q1 + q2*s, which at z = j is the identity map q1 + j*q2
IDENTITY = MonomialPolynomial((((1.0, (1, 0)),), ((1.0, (0, 1)),)), 2)


def test_identity_map_encloses_origin():
    assert abs(winding_inclusion(IDENTITY, 1j, ParameterBox((-1.0, -1.0), (1.0, 1.0))).winding) == 1


def test_identity_map_away_from_origin():
    res = winding_inclusion(IDENTITY, 1j, ParameterBox((1.0, 1.0), (2.0, 2.0)))
    assert res.winding == 0 and res.min_abs_on_grid > 1


def test_winding_needs_two_parameters():
    poly = MonomialPolynomial((((1.0, (1,)),), ((1.0, (0,)),)), 1)
    with pytest.raises(CapacityError):
        winding_inclusion(poly, 1j, ParameterBox((0.0,), (1.0,)))


@pytest.mark.xfail(strict=True, reason="no member of kQ is singular at 9.78j, so nothing is enclosed")
def test_inclusion_above_lower_bound_at_978():
    poly = four_state()
    fb = frequency_bounds(poly, 9.78j, FOUR_STATE_BOX)
    res = winding_inclusion(poly, 9.78j, scale_box(FOUR_STATE_BOX, 1.5 * fb.k_l))
    assert res.winding != 0 or res.min_abs_on_grid <= 1e-6


def test_inclusion_above_lower_bound_at_916():
    poly = four_state()
    fb = frequency_bounds(poly, 9.16j, FOUR_STATE_BOX)
    assert winding_inclusion(poly, 9.16j, scale_box(FOUR_STATE_BOX, 1.5 * fb.k_l)).winding != 0


@pytest.mark.parametrize("seed", range(50))
def test_winding_agrees_with_bounds(seed):
    poly, box = random_multilinear(seed, 2)
    z = random_frequencies(seed, 1)[0]
    fb = frequency_bounds(poly, z, box)
    if not math.isfinite(fb.k_l):
        return
    outside = winding_inclusion(poly, z, scale_box(box, 0.99 * fb.k_l))
    assert outside.winding == 0 and outside.min_abs_on_grid > 0
    if fb.capped:
        return  # a capped k_u is not a witness
    inside = winding_inclusion(poly, z, scale_box(box, 1.01 * fb.k_u))
    assert inside.winding != 0 or inside.min_abs_on_grid <= 1e-9


def test_oracle_linear_case():
    poly = MonomialPolynomial((((1.0, (0,)), (1.0, (1,))), ((1.0, (0,)),)), 1)
    k = oracle_k_m(poly, 0j, ParameterBox((-2.0,), (2.0,), (0.0,)))
    assert abs(k - 0.5) <= 1e-4


def test_oracle_two_parameter_case():
    # zeros of 1 + q1 + q2 lie on q1 + q2 = -1; the nearest in box gauge is (-0.5, -0.5)
    poly = MonomialPolynomial((((1.0, (0, 0)), (1.0, (1, 0)), (1.0, (0, 1))), ((1.0, (0, 0)),)), 2)
    k = oracle_k_m(poly, 0j, ParameterBox((-1.0, -1.0), (1.0, 1.0)))
    assert abs(k - 0.5) <= 1e-4


def test_oracle_zero_at_nominal():
    poly = MonomialPolynomial((((1.0, (1,)),), ((1.0, (0,)),)), 1)
    assert oracle_k_m(poly, 0j, ParameterBox((-1.0,), (1.0,))) == 0.0


def test_oracle_capacity():
    poly, box = random_multilinear(0, 4)
    with pytest.raises(CapacityError):
        oracle_k_m(poly, 1j, box)


def test_oracle_reference_at_978():
    # the lower bound there is about 4.73 but no zero exists below the cap
    assert oracle_k_m(four_state(), 9.78j, FOUR_STATE_BOX) == math.inf


def test_cofactor_examples():
    assert cofactor_det(np.eye(4).tolist()) == 1
    assert cofactor_det(np.diag([1, 2j, 3, -1]).tolist()) == -6j
    with pytest.raises(CapacityError):
        cofactor_det(np.eye(7).tolist())


def test_cofactor_matches_lu():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        ref = np.linalg.det(m)
        assert abs(cofactor_det(m.tolist()) - ref) <= 1e-10 * max(abs(ref), 1e-300) + 1e-14
