#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python backend.

Run after building the extension:

    python3 benchmarks/compare_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from inarlim._backend import both_backends
from inarlim.immigration import bernoulli_immigration
from inarlim.inar import ModelSpec
from inarlim.montecarlo import _model_tables
from inarlim.schedules import near_critical_rho


def time_mc(impl, tables, replicates, horizon_label):
    rho, kinds, params, offsets, table = tables
    out = np.zeros(replicates, dtype=np.int64)
    t0 = time.perf_counter()
    impl.mc_terminal(rho, kinds, params, offsets, table, 42, 0, replicates, out)
    return time.perf_counter() - t0, out


def time_spectral(impl, M, n_factors, threads):
    m = np.arange(M // 2 + 1)
    z = np.exp(-2j * np.pi * m / M)
    U = 1.0 - z
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(np.where(U == 0, 1.0, U))
    L[0] = 0.0
    weights = np.linspace(1.0 / n_factors, 1.0, n_factors)
    gens = np.arange(1, n_factors + 1, dtype=np.int64)
    F = np.ones(M // 2 + 1, dtype=np.complex128)
    t0 = time.perf_counter()
    impl.heavy_tail_product(F, U, L, weights, gens, threads)
    return time.perf_counter() - t0, F


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    backends = both_backends()
    names = [n for n, _ in backends]
    print(f"backends available: {names}")

    replicates = 2_000 if args.quick else 20_000
    horizon = 200 if args.quick else 1_000
    model = ModelSpec(
        near_critical_rho(), bernoulli_immigration(lambda n: min(1.0, 1.0 / n))
    )
    tables = _model_tables(model, horizon)
    print(f"\nMonte Carlo terminal sampler: {replicates} replicates, horizon {horizon}")
    results = {}
    for name, impl in backends:
        reps = replicates if name == "cython" else max(replicates // 20, 200)
        dt, out = time_mc(impl, tables, reps, horizon)
        rate = reps / dt
        results[name] = (rate, out[: min(200, reps)])
        print(f"  {name:>7}: {reps} replicates in {dt:.3f}s  ({rate:,.0f} replicates/s)")
    if len(results) == 2:
        a, b = results["python"][1], results["cython"][1]
        k = min(a.size, b.size)
        match = "bit-identical" if np.array_equal(a[:k], b[:k]) else "MISMATCH"
        print(f"  shared replicates: {match}")
        print(f"  speedup: {results['cython'][0] / results['python'][0]:.0f}x")

    M = 1 << (18 if args.quick else 22)
    n_factors = 100 if args.quick else 500
    print(f"\nSpectral product kernel: grid 2^{M.bit_length() - 1}, {n_factors} factors")
    spectral = {}
    for name, impl in backends:
        threads = 2 if name == "cython" else 1
        dt, F = time_spectral(impl, M, n_factors, threads)
        spectral[name] = (dt, F)
        print(f"  {name:>7}: {dt:.3f}s  ({'threads=2' if threads == 2 else 'numpy'})")
    if len(spectral) == 2:
        diff = np.max(np.abs(spectral["python"][1] - spectral["cython"][1]))
        print(f"  max |F_python - F_cython| = {diff:.2e}")
        print(f"  speedup: {spectral['python'][0] / spectral['cython'][0]:.1f}x")


if __name__ == "__main__":
    main()
