"""Benchmark the compiled KMC event kernel against the pure-Python fallback.

Both kernels are driven with identical pre-drawn uniforms, so besides the
timing this doubles as a byte-identity check on a long trajectory.

Usage: python benchmarks/bench_kmc.py [n_events]
"""

import sys
import time

import numpy as np

from gkhydro import _kmc_py
from gkhydro.kmc import _KernelParams
from gkhydro.lattice import Torus
from gkhydro.localfn import LocalFunction
from gkhydro.rates import glauber_kawasaki_bistable, nongradient_model_1d

try:
    from gkhydro import _kmc_cy
except ImportError:
    _kmc_cy = None


def bench(label, model, torus, n_events, seed=0):
    p = _KernelParams.build(model, torus)
    rng = np.random.default_rng(seed)
    occ0 = rng.integers(0, 2, torus.n_sites).astype(np.uint8)
    u_sel = rng.random(n_events)
    u_acc = rng.random(n_events)
    args = (p.d, p.n_sites, p.w_exch, p.w_flip, p.exch_k, p.exch_tables,
            p.exch_maps, p.nbr_fwd, p.flip_k_p, p.flip_k_m, p.flip_table_p,
            p.flip_table_m, p.flip_map_p, p.flip_map_m, p.c_max, p.g_max)
    results = {}
    for name, kernel in (("python", _kmc_py), ("cython", _kmc_cy)):
        if kernel is None:
            continue
        occ = occ0.copy()
        t0 = time.perf_counter()
        counts = kernel.run_events(occ, n_events, u_sel, u_acc, *args)
        dt = time.perf_counter() - t0
        results[name] = (dt, counts, occ)
    print(f"== {label}: {n_events} proposals on {torus.n_sites} sites ==")
    for name, (dt, counts, _) in results.items():
        print(f"  {name:7s} {dt:8.3f} s   {n_events / dt / 1e6:7.2f} M props/s"
              f"   accepted {counts}")
    if len(results) == 2:
        (dt_py, _, occ_py), (dt_cy, counts_cy, occ_cy) = (
            results["python"], results["cython"])
        assert np.array_equal(occ_py, occ_cy), "kernel trajectories diverged"
        print(f"  speedup {dt_py / dt_cy:.1f}x, trajectories identical")
    print()


def main():
    n_events = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    bench("non-gradient d=1 with flips",
          nongradient_model_1d(K=2.0, flip_plus=LocalFunction.constant(1.0),
                               flip_minus=LocalFunction.occupancy((1,))),
          Torus(1, 4096), n_events)
    bench("bistable d=2", glauber_kawasaki_bistable(d=2, K=16.0),
          Torus(2, 128), n_events)


if __name__ == "__main__":
    main()
