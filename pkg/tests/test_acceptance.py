"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (printed again in the terminal
summary) and then asserts, so a failing criterion also fails the run.
"""

import json
import math
import subprocess
import sys
import time
from importlib import resources

import numpy as np
import pytest

from dstab.bounds import BoundsConfig, frequency_bounds, model_for
from dstab.hull import Location, classify_origin, convex_hull
from dstab.oracle import OracleConfig, oracle_k_m
from dstab.params import value_set_vertex_images
from dstab.split import CutScheme, nested_sequence
from dstab.sweep import SweepConfig, algorithm1, algorithm2

from _instances import FOUR_STATE_BOX, FOUR_STATE_REGION, four_state, random_frequencies, random_multilinear

FOUR_STATE = str(resources.files("dstab") / "data" / "four_state.json")
GRID = SweepConfig(n_r=30, n_c=50, delta_lo=0.01, delta_hi=15.01, eps=0.01)
CFG = BoundsConfig()


def _margin_cli(out):
    cmd = [sys.executable, "-m", "dstab.cli", "margin", FOUR_STATE, "--eps", "0.01", "--nr", "30",
           "--nc", "50", "--dl", "0.01", "--du", "15.01", "--out", str(out)]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True)
    return proc, time.perf_counter() - t0


@pytest.fixture(scope="module")
def parallel():
    return algorithm2(four_state(), FOUR_STATE_REGION, FOUR_STATE_BOX, GRID)


@pytest.fixture(scope="module")
def classic_tight():
    return algorithm1(four_state(), FOUR_STATE_REGION, FOUR_STATE_BOX, 0.001, GRID)


@pytest.fixture(scope="module")
def classic_matched():
    return algorithm1(four_state(), FOUR_STATE_REGION, FOUR_STATE_BOX, 0.01, GRID)


def test_criterion_1_example_reproduction(tmp_path, acceptance):
    proc, wall = _margin_cli(tmp_path)
    assert proc.returncode == 0, proc.stderr
    report = json.loads((tmp_path / "report.json").read_text())
    k_hat, delta = float(report["k_hat"]), float(report["argmin_delta"])
    ok = 1.41 <= k_hat <= 1.47 and abs(delta - 9.78) <= 0.05 and wall < 300
    acceptance(1, "example reproduction", ok,
               f"k_hat={k_hat:.6g} at delta={delta:.4g} (want [1.41, 1.47] near 9.78), wall={wall:.1f}s")
    assert ok


def test_criterion_2_algorithm_agreement(parallel, classic_tight, acceptance):
    k_hat, k_tilde = parallel.k_hat, classic_tight.k_tilde
    gap = abs(k_hat - k_tilde) / k_tilde
    ok = gap <= 0.011
    acceptance(2, "algorithm agreement", ok,
               f"k_hat={k_hat:.10g} k_tilde={k_tilde:.10g} relative gap={gap:.3e} (<= 0.011)")
    assert ok


def test_criterion_3_pruning_efficiency(parallel, classic_matched, acceptance):
    ratio = parallel.domains_evaluated / classic_matched.domains_evaluated
    ok = ratio <= 0.25
    acceptance(3, "pruning efficiency", ok,
               f"{parallel.domains_evaluated}/{classic_matched.domains_evaluated} = {ratio:.4f} (<= 0.25)")
    assert ok


def test_criterion_4_oracle_sandwich(acceptance):
    oracle_cfg = OracleConfig(k_res=1e-4, k_max=CFG.k_cap)
    violations, checked = [], 0
    for seed in range(50):
        poly, box = random_multilinear(seed, 2)
        for z in random_frequencies(seed, 5):
            fb = frequency_bounds(poly, z, box, CFG)
            k_m = oracle_k_m(poly, z, box, oracle_cfg)
            checked += 1
            # the oracle only searches up to k_cap, where a capped k_u also sits
            clipped = min(k_m, CFG.k_cap)
            low_ok = fb.k_l <= k_m + oracle_cfg.k_res
            high_ok = (not math.isfinite(fb.k_l)) or clipped <= fb.k_u + CFG.k_tol * fb.k_u
            if not (low_ok and high_ok):
                violations.append((seed, z, fb.k_l, k_m, fb.k_u))
    ok = not violations
    acceptance(4, "oracle sandwich", ok, f"{len(violations)} violations in {checked} checks")
    assert ok, violations[:5]


def test_criterion_5_exactness(acceptance):
    cfg = SweepConfig(n_r=2, n_c=3, delta_lo=0.1, delta_hi=3.0)
    region = FOUR_STATE_REGION
    bad, checked, split = [], 0, 0
    for seed in range(50):
        poly, box = random_multilinear(1000 + seed, 1)
        rep = algorithm2(poly, region, box, cfg)
        split += rep.domains_evaluated - cfg.n_r * cfg.n_c
        for f in rep.per_freq:
            checked += 1
            z = region.pieces[0].point(f.delta)
            k_m = oracle_k_m(poly, z, box)
            k_l = f.k_l_min
            if math.isinf(k_m) or math.isinf(k_l):
                same = k_m == k_l
            else:
                same = abs(k_l - k_m) <= 1e-3 * k_m and f.k_u_min == k_l
            if not same:
                bad.append((seed, f.delta, k_l, f.k_u_min, k_m))
    ok = not bad and split == 0
    acceptance(5, "exactness", ok, f"{len(bad)} mismatches in {checked} frequencies, {split} splits")
    assert ok, bad[:5]


def test_criterion_6_mapping_containment(acceptance):
    rng = np.random.default_rng(6)
    violations = 0
    for seed in range(20):
        poly, box = random_multilinear(2000 + seed, 2 + seed % 3)
        lower, upper = np.asarray(box.lower), np.asarray(box.upper)
        for _ in range(1000):
            z = complex(rng.normal(), 3 * rng.normal())
            q = lower + rng.random(box.dim) * (upper - lower)
            images = value_set_vertex_images(poly, z, box).images
            p = poly.eval(z, q)
            # move the probe to the origin and classify it against the hull
            cls = classify_origin(convex_hull(list(images - p)), tol=0.0)
            scale = np.max(np.abs(images))
            if cls.location is Location.OUTSIDE and cls.distance > 1e-9 * scale:
                violations += 1
    ok = violations == 0
    acceptance(6, "mapping containment", ok, f"{violations} violations in 20000 probes")
    assert ok


def test_criterion_7_convergence(acceptance):
    failures, used, seed = [], 0, 0
    while used < 20:
        poly, box = random_multilinear(3000 + seed, 2 + seed % 3)
        z = random_frequencies(3000 + seed, 1)[0]
        seed += 1
        fb = frequency_bounds(poly, z, box, CFG)
        if not math.isfinite(fb.k_l) or fb.pair.m < 2:
            continue
        used += 1
        model = model_for(poly, z, box)
        eta = 1e-4 * box.diameter
        for scheme in CutScheme:
            trace = nested_sequence(model, box, scheme, CFG, eta=eta, max_splits=200)
            if not (trace.terminated or trace.distances[-1] <= eta):
                failures.append((seed - 1, scheme.value, trace.distances[-1]))
    ok = not failures
    acceptance(7, "convergence", ok, f"{len(failures)} failures over 20 instances x 2 cut schemes")
    assert ok, failures


def test_criterion_8_determinism(tmp_path, acceptance):
    first, _ = _margin_cli(tmp_path / "a")
    second, _ = _margin_cli(tmp_path / "b")
    assert first.returncode == second.returncode == 0
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()
               for n in ("report.json", "trace.csv"))
    acceptance(8, "determinism", same, "report.json and trace.csv byte-identical" if same else "files differ")
    assert same
