"""Simulation of sample paths by binomial thinning plus immigration.

Reproducibility contract: replicate i draws from a counter-based stream
derived from (seed, i) alone, consuming draws in fixed order (thinning
before immigration, generations ascending).  The empirical law is therefore
a deterministic function of (model, seed, N, n) — worker partitioning only
changes who computes which replicate, never the result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels_py
from ._backend import backend_name, mc_terminal
from .immigration import MC_HEAVY_TAIL
from .inar import ModelSpec
from .pmf import Pmf
from .schedules import rho_values

__all__ = ["SimConfig", "ReplicateStream", "sample_path", "empirical_pmf"]


@dataclass(frozen=True)
class SimConfig:
    replicates: int
    horizon: int
    seed: int
    worker_hint: int | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.worker_hint is not None and self.worker_hint < 1:
            raise ValueError("worker_hint must be positive")


class ReplicateStream(_kernels_py.Stream):
    """Public handle on one replicate's uniform stream."""


@lru_cache(maxsize=32)
def _model_tables(model: ModelSpec, n: int):
    """Flattened per-generation sampling tables for the kernels."""
    rho = rho_values(model.rho, n)
    kinds = np.zeros(n, dtype=np.uint8)
    params = np.zeros(n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    chunks = []
    pos = 0
    fam = model.immigration
    for k in range(1, n + 1):
        offsets[k - 1] = pos
        if fam.mc_kind == MC_HEAVY_TAIL:
            kinds[k - 1] = 1
            params[k - 1] = fam.mc_param(k)
        else:
            cdf = np.ascontiguousarray(fam.mc_table(k), dtype=np.float64)
            if cdf.size == 0:
                raise ValueError(f"empty sampling table at generation {k}")
            chunks.append(cdf)
            pos += cdf.size
    offsets[n] = pos
    table = np.concatenate(chunks) if chunks else np.zeros(0)
    for arr in (rho, kinds, params, offsets, table):
        arr.flags.writeable = False
    return rho, kinds, params, offsets, table


def sample_path(model: ModelSpec, n: int, stream: ReplicateStream) -> int:
    """Terminal value X_n for one replicate, drawn from the exact process law."""
    rho, kinds, params, offsets, table = _model_tables(model, n)
    x = 0
    for i in range(n):
        if x > 0:
            x = _kernels_py.binomial_draw(x, float(rho[i]), stream)
        x += _kernels_py._immigration_draw(
            int(kinds[i]), float(params[i]), table, int(offsets[i]), int(offsets[i + 1]), stream
        )
    return x


def _worker_ranges(total: int, workers: int):
    base, extra = divmod(total, workers)
    start = 0
    for i in range(workers):
        size = base + (1 if i < extra else 0)
        if size:
            yield start, size
        start += size


def empirical_pmf(model: ModelSpec, config: SimConfig) -> tuple[Pmf, int]:
    """Histogram of independent terminal values, normalized to a law.

    Deterministic in (model, seed, replicates, horizon); ``worker_hint`` only
    sets how many threads fill disjoint replicate ranges.
    """
    n, N = config.horizon, config.replicates
    rho, kinds, params, offsets, table = _model_tables(model, n)
    values = np.zeros(N, dtype=np.int64)
    workers = config.worker_hint or 1
    ranges = list(_worker_ranges(N, workers))
    if len(ranges) == 1 or backend_name() == "python":
        for start, size in ranges:
            mc_terminal(
                rho, kinds, params, offsets, table,
                config.seed, start, size, values[start : start + size],
            )
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            futures = [
                pool.submit(
                    mc_terminal,
                    rho, kinds, params, offsets, table,
                    config.seed, start, size, values[start : start + size],
                )
                for start, size in ranges
            ]
            for f in futures:
                f.result()
    counts = np.bincount(values)
    return Pmf(counts / float(N)), N
