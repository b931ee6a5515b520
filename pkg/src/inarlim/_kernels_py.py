"""Pure-Python/numpy kernels: the fallback backend.

The compiled extension (`inarlim._kernels`) implements the same two entry
points with identical algorithms; the Monte Carlo sampler is bit-compatible
by construction (same integer stream, same draw order, same float
expressions).  Keep the two files in sync.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# Immigration sampling kinds.
KIND_TABLE = 0
KIND_HEAVY_TAIL = 1


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class Stream:
    """Counter-based uniform stream for one replicate: state depends only on
    (seed, replicate); draws are consumed strictly in order."""

    __slots__ = ("state",)

    def __init__(self, seed: int, replicate: int):
        self.state = mix64((seed + (replicate + 1) * GOLDEN) & MASK64)

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV53


def _binomial_inversion(n: int, q: float, stream: Stream) -> int:
    # q <= 1/2 and n*q <= 30: walk the CDF with one uniform.
    f = (1.0 - q) ** n
    u = stream.uniform()
    c = f
    k = 0
    ratio = q / (1.0 - q)
    while u > c and k < n:
        k += 1
        f *= (n - k + 1) * ratio / k
        c += f
    return k


def _binomial_btrs(n: int, p: float, stream: Stream) -> int:
    # Transformed-rejection sampler; exact for n*p >= 10, p <= 1/2.
    spq = math.sqrt(n * p * (1.0 - p))
    b = 1.15 + 2.53 * spq
    a = -0.0873 + 0.0248 * b + 0.01 * p
    c = n * p + 0.5
    vr = 0.92 - 4.2 / b
    alpha = (2.83 + 5.1 / b) * spq
    lpq = math.log(p / (1.0 - p))
    m = math.floor((n + 1) * p)
    h = math.lgamma(m + 1) + math.lgamma(n - m + 1)
    while True:
        u = stream.uniform() - 0.5
        v = stream.uniform()
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + c)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or k > n:
            continue
        v = math.log(v * alpha / (a / (us * us) + b))
        if v <= h - math.lgamma(k + 1) - math.lgamma(n - k + 1) + (k - m) * lpq:
            return k


def binomial_draw(n: int, p: float, stream: Stream) -> int:
    """Exact Binomial(n, p) variate; inversion for small n*min(p,1-p),
    transformed rejection otherwise.  No normal approximation anywhere."""
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    q = min(p, 1.0 - p)
    if n * q <= 30.0:
        k = _binomial_inversion(n, q, stream)
    else:
        k = _binomial_btrs(n, q, stream)
    return k if p <= 0.5 else n - k


def _immigration_draw(kind, param, table, lo, hi, stream: Stream) -> int:
    if kind == KIND_HEAVY_TAIL:
        u = stream.uniform()
        if u < 1.0 - param:
            return 0
        v = stream.uniform()
        if v < 8.673617379884035e-19:  # 2**-60; caps the jump at 2**60
            v = 8.673617379884035e-19
        return int(1.0 / v)
    # Inverse transform on the cumulative table; mass beyond the stored
    # support (already refined to ~1e-15) is resolved by rejection.
    for _ in range(64):
        u = stream.uniform()
        top = table[hi - 1]
        if u < top:
            j = lo
            while u >= table[j]:
                j += 1
            return j - lo
    return hi - lo - 1


def terminal_value(rho, kinds, params, offsets, table, seed: int, replicate: int) -> int:
    """X at the horizon for one replicate: thinning draw (when the state is
    positive) then immigration draw, generations ascending."""
    stream = Stream(seed, replicate)
    x = 0
    n = len(rho)
    for i in range(n):
        if x > 0:
            x = binomial_draw(x, rho[i], stream)
        x += _immigration_draw(
            kinds[i], params[i], table, offsets[i], offsets[i + 1], stream
        )
    return x


def mc_terminal(rho, kinds, params, offsets, table, seed, rep_start, count, out):
    """Fill out[i] with the terminal value of replicate rep_start + i."""
    rho_l = [float(v) for v in rho]
    kinds_l = [int(v) for v in kinds]
    params_l = [float(v) for v in params]
    offsets_l = [int(v) for v in offsets]
    table_l = [float(v) for v in table]
    for i in range(count):
        out[i] = terminal_value(
            rho_l, kinds_l, params_l, offsets_l, table_l, seed, rep_start + i
        )


def heavy_tail_product(F, U, L, weights, gens, num_threads=1):
    """Multiply F (half-spectrum, F[0] preset to 1) by the transforms of
    thinned heavy-tail immigration laws.

    Factor for (generation g, survival weight w):
        H(z) = 1 + t (log w + L) / (g (1 - t)),  t = w (1 - z),
    with the removable point at t = 1 filled by the series value.
    """
    for w, g in zip(weights, gens):
        w = float(w)
        g = int(g)
        if w == 0.0:
            continue
        lw = math.log(w)
        t = w * U
        denom = 1.0 - t
        inv_g = 1.0 / g
        with np.errstate(divide="ignore", invalid="ignore"):
            h = 1.0 + t * (lw + L) * (inv_g / denom)
        bad = np.abs(denom) < 1e-12
        if bad.any():
            h[bad] = (1.0 - inv_g) + denom[bad] * (0.5 * inv_g)
        h[0] = 1.0
        F *= h


def backend_name() -> str:
    return "python"
