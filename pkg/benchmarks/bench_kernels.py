"""Time the numba and numpy kernel paths on the reference instance.

    python benchmarks/bench_kernels.py [--batch 64] [--repeats 20]

JIT compilation is excluded by a warm-up call. Both paths must agree; the
script exits non-zero if they do not.
"""
import argparse
import sys
import time

import numpy as np

from rostering import kernels
from rostering.aco import AcoParams, init_pheromone
from rostering.constraints import compile_instance
from rostering.model import reference_instance
from rostering.pso import POSITION_EPS


def best_time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    inst = reference_instance()
    c = compile_instance(inst)
    rng = np.random.default_rng(args.seed)
    k = inst.n_options
    shape = (args.batch, inst.n_nurses, inst.horizon_days)
    grids = rng.integers(0, k, shape).astype(np.int8)
    positions = rng.uniform(0, k, shape)
    uniforms = rng.random(shape)
    params = AcoParams()
    tau = init_pheromone(inst, params).tau
    eta_beta = params.eta ** params.beta

    def count(mod):
        out = np.zeros((args.batch, kernels.N_COUNTS), np.int64)
        mod.count_batch(grids, *c.kernel_args(), out)
        return out

    def construct(mod):
        out = np.zeros(shape, np.int8)
        mod.construct_colony(tau.copy(), c.option_ok, c.option_night, uniforms,
                             params.alpha, eta_beta, False, params.phi, params.tau0, out)
        return out

    def decode(mod):
        out = np.zeros(shape, np.int8)
        mod.decode_positions(positions, c.option_ok, c.option_night, k - POSITION_EPS, out)
        return out

    ok = True
    print(f"batch={args.batch} grid={inst.n_nurses}x{inst.horizon_days} repeats={args.repeats}")
    print(f"{'kernel':<12}{'numba ms':>11}{'numpy ms':>11}{'speedup':>9}  match")
    for name, fn in (("count", count), ("construct", construct), ("decode", decode)):
        same = np.array_equal(fn(kernels.loops), fn(kernels.vector))  # also warms the JIT
        ok &= same
        t_jit = best_time(lambda: fn(kernels.loops), args.repeats)
        t_np = best_time(lambda: fn(kernels.vector), args.repeats)
        print(f"{name:<12}{t_jit * 1e3:>11.3f}{t_np * 1e3:>11.3f}{t_np / t_jit:>9.1f}  {same}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
