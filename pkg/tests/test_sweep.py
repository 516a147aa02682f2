import dataclasses
import math

import numpy as np
import pytest

from dstab.bounds import BoundsConfig, model_for
from dstab.errors import InputError
from dstab.oracle import oracle_k_m
from dstab.params import MonomialPolynomial, ParameterBox
from dstab.region import left_half_plane, nominal_roots_in_region
from dstab.sweep import (BACKWARD, FORWARD, PRESENT, SweepConfig, algorithm1, algorithm2, classic_frequency,
                         classify_prune, compare)

from _instances import FOUR_STATE_BOX, four_state, random_multilinear

SMALL = SweepConfig(n_r=4, n_c=5, eps=0.01)
REGION = left_half_plane(0.1, 3.0)


def _stable_instances(n_params, count, start=0):
    out = []
    seed = start
    while len(out) < count:
        poly, box = random_multilinear(seed, n_params)
        if nominal_roots_in_region(poly, REGION, box.nominal):
            out.append((seed, poly, box))
        seed += 1
    return out


def _strip(report):
    return dataclasses.replace(report, wall_time=0.0)


def test_prune_kinds():
    assert classify_prune((0, 3.0), (0, 9.78)) == BACKWARD
    assert classify_prune((0, 12.0), (0, 9.78)) == FORWARD
    assert classify_prune((0, 9.78), (0, 9.78)) == PRESENT


def test_config_validation():
    with pytest.raises(InputError):
        SweepConfig(eps=0.0)
    with pytest.raises(InputError):
        SweepConfig(n_r=1)


@pytest.mark.parametrize("seed,poly,box", _stable_instances(1, 5))
def test_one_parameter_needs_no_splits(seed, poly, box):
    rep = algorithm2(poly, REGION, box, SMALL)
    assert rep.domains_evaluated == SMALL.n_r * SMALL.n_c
    assert all(r == 1 for r in rep.column_iterations)
    exact = [f.k_l_min for f in rep.per_freq]
    assert rep.k_hat == min(exact)
    cla = algorithm1(poly, REGION, box, 0.01, SMALL)
    assert all(f.iterations == 1 for f in cla.per_freq)
    assert compare(poly, REGION, box, SMALL).ratio == 1.0


@pytest.mark.parametrize("seed,poly,box", _stable_instances(2, 8, 100) + _stable_instances(3, 4, 200))
def test_epsilon_band_against_classic(seed, poly, box):
    eps_r = SMALL.eps / 10
    rep = algorithm2(poly, REGION, box, SMALL)
    cla = algorithm1(poly, REGION, box, eps_r, SMALL)
    assert rep.converged and cla.converged
    if not math.isfinite(cla.k_tilde):
        assert not math.isfinite(rep.k_hat) or rep.k_hat >= cla.k_tilde_lower
        return
    gap = (rep.k_hat - cla.k_tilde) / cla.k_tilde
    assert -eps_r <= gap < SMALL.eps + eps_r


@pytest.mark.parametrize("seed,poly,box", _stable_instances(2, 6, 300))
def test_records_and_counters(seed, poly, box):
    rep = algorithm2(poly, REGION, box, SMALL)
    values = [r.value for r in rep.records]
    assert all(a > b for a, b in zip(values, values[1:]))
    if rep.records:
        assert rep.k_hat == values[-1]
        witnesses = [row.k_u for row in rep.trace if row.event == "split" and row.k_u < SMALL.bounds.k_cap]
        assert rep.k_hat == min(witnesses)
    assert sum(rep.prune_counts.values()) <= rep.domains_evaluated
    # every popped subdomain produced two children, and nothing was left behind
    pops = sum(f.iterations for f in rep.per_freq)
    assert rep.domains_evaluated == SMALL.n_r * SMALL.n_c + 2 * pops
    assert rep.converged


def test_deterministic():
    _, poly, box = _stable_instances(3, 1, 400)[0]
    a = algorithm2(poly, REGION, box, SMALL)
    b = algorithm2(poly, REGION, box, SMALL)
    assert _strip(a) == _strip(b)


def test_iteration_cap_flags_result():
    rep = algorithm2(four_state(), left_half_plane(0.01, 15.01), FOUR_STATE_BOX,
                     SweepConfig(n_r=30, n_c=50, max_iter=1))
    assert not rep.converged


def test_zero_at_nominal_short_circuits():
    poly = MonomialPolynomial((((1.0, (1,)),), ((1.0, (0,)),)), 1)  # q + s
    rep = algorithm2(poly, left_half_plane(0.0, 1.0), ParameterBox((-1.0,), (1.0,)),
                     SweepConfig(n_r=2, n_c=1))
    assert rep.k_hat == 0.0 and rep.zero_at_nominal


@pytest.mark.parametrize("seed,poly,box", _stable_instances(2, 4, 500))
def test_ratio_at_most_one(seed, poly, box):
    assert compare(poly, REGION, box, SMALL).ratio <= 1.0


def test_classic_single_frequency_at_978():
    # neither side finds a singular member at this frequency
    poly = four_state()
    res = classic_frequency(model_for(poly, 9.78j, FOUR_STATE_BOX), FOUR_STATE_BOX, 0.01, BoundsConfig())
    assert res.k_u == math.inf
    assert oracle_k_m(poly, 9.78j, FOUR_STATE_BOX) == math.inf


def test_classic_single_frequency_at_916():
    poly = four_state()
    res = classic_frequency(model_for(poly, 9.16j, FOUR_STATE_BOX), FOUR_STATE_BOX, 0.01, BoundsConfig())
    ref = oracle_k_m(poly, 9.16j, FOUR_STATE_BOX)
    assert abs(res.k_u - ref) <= 0.01 * ref
    assert np.isclose(res.k_l, res.k_u)
