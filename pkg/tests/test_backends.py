"""Parity between the compiled kernels and the pure-Python backend."""

import os
import subprocess
import sys

import numpy as np
import pytest

from inarlim._backend import backend_name, both_backends


def half_grid(M):
    m = np.arange(M // 2 + 1)
    z = np.exp(-2j * np.pi * m / M)
    U = 1.0 - z
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(np.where(U == 0, 1.0, U))
    L[0] = 0.0
    return U, L


class TestSpectralParity:
    def test_product_close(self):
        backends = both_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        M = 1 << 12
        U, L = half_grid(M)
        weights = np.linspace(0.02, 1.0, 80)
        gens = np.arange(1, 81, dtype=np.int64)
        outs = []
        for _, impl in backends:
            F = np.ones(M // 2 + 1, dtype=np.complex128)
            impl.heavy_tail_product(F, U, L, weights, gens, 2)
            outs.append(F)
        assert np.max(np.abs(outs[0] - outs[1])) < 1e-13

    def test_half_weight_singularity(self):
        # w = 1/2 puts the transform argument exactly at zero on the grid
        # point z = -1; both backends must take the series branch.
        backends = both_backends()
        M = 1 << 8
        U, L = half_grid(M)
        weights = np.array([0.5])
        gens = np.array([3], dtype=np.int64)
        for _, impl in backends:
            F = np.ones(M // 2 + 1, dtype=np.complex128)
            impl.heavy_tail_product(F, U, L, weights, gens, 1)
            assert np.isfinite(F).all()
            assert abs(F[-1] - (1.0 - 1.0 / 3.0)) < 1e-10

    def test_thread_count_invariance(self):
        backends = dict(both_backends())
        if "cython" not in backends:
            pytest.skip("compiled backend not built")
        impl = backends["cython"]
        M = 1 << 12
        U, L = half_grid(M)
        weights = np.linspace(0.1, 0.9, 30)
        gens = np.arange(1, 31, dtype=np.int64)
        outs = []
        for threads in (1, 2):
            F = np.ones(M // 2 + 1, dtype=np.complex128)
            impl.heavy_tail_product(F, U, L, weights, gens, threads)
            outs.append(F)
        assert np.array_equal(outs[0], outs[1])


class TestBackendSelection:
    def test_env_forces_python(self):
        code = (
            "from inarlim._backend import backend_name; print(backend_name())"
        )
        env = dict(os.environ, INARLIM_BACKEND="python")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True
        )
        assert out.stdout.strip() == "python"

    def test_default_prefers_compiled(self):
        if len(both_backends()) < 2:
            pytest.skip("compiled backend not built")
        assert backend_name() == "cython"
