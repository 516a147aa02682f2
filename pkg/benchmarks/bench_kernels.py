"""Compare the compiled and pure-Python kernels.

Runs the parallel sweep on the shipped four-state example and a
per-frequency bounds micro-benchmark under each available backend, checks
that both give the same answers, and prints a timing table.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time
from importlib import resources

import numpy as np

from dstab import kernels
from dstab.bounds import BoundsConfig, evaluate_polys, model_for
from dstab.cli import load_problem
from dstab.sweep import SweepConfig, algorithm2


def _best_of(fn, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    problem = load_problem(resources.files("dstab") / "data" / "four_state.json")
    sweep_cfg = SweepConfig(n_r=30, n_c=50, delta_lo=0.01, delta_hi=15.01, eps=0.01)
    bounds_cfg = BoundsConfig()
    box = problem.box
    polys = [model_for(problem.poly, 1j * w, box).vertex_polys(box.lower, box.upper)
             for w in np.linspace(0.01, 15.01, 300)]

    def sweep():
        rep = algorithm2(problem.poly, problem.region, box, sweep_cfg)
        return rep.k_hat, rep.domains_evaluated

    def bounds():
        return [evaluate_polys(pre, pim, box.lower, box.upper, bounds_cfg).k_l for pre, pim in polys]

    rows, answers = [], {}
    for name in kernels.available_backends():
        kernels.set_backend(name)
        t_sweep, a_sweep = _best_of(sweep, args.repeat)
        t_bounds, a_bounds = _best_of(bounds, args.repeat)
        answers[name] = (a_sweep, a_bounds)
        rows.append((name, t_sweep, t_bounds))

    print(f"{'backend':<8} {'sweep (s)':>10} {'300 bounds (s)':>15}")
    for name, t_sweep, t_bounds in rows:
        print(f"{name:<8} {t_sweep:>10.3f} {t_bounds:>15.3f}")
    if len(rows) == 2:
        (_, ps, pb), (_, cs, cb) = rows
        print(f"speedup  {ps / cs:>10.1f} {pb / cb:>15.1f}")
        print("answers identical:", answers["python"] == answers["cython"])
    k_hat, domains = answers[rows[0][0]][0]
    print(f"k_hat = {k_hat:.10g}, domains evaluated = {domains}")


if __name__ == "__main__":
    main()
