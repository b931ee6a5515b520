# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: Monte Carlo terminal-value sampler and the spectral
product for thinned heavy-tail immigration transforms.

Mirrors `_kernels_py` exactly; the Monte Carlo path is bit-compatible with
the Python backend (same integer stream, same draw order, same float
expressions).
"""

import numpy as np

cimport cython
from cython.parallel cimport prange
from libc.math cimport fabs, floor, lgamma, log, pow, sqrt

ctypedef unsigned long long u64

cdef u64 GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0

KIND_TABLE = 0
KIND_HEAVY_TAIL = 1


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline u64 _stream_init(u64 seed, u64 replicate) nogil:
    return _mix64(seed + (replicate + 1) * GOLDEN)


cdef inline double _uniform(u64* state) nogil:
    state[0] = state[0] + GOLDEN
    return <double>(_mix64(state[0]) >> 11) * INV53


cdef long long _binomial_inversion(long long n, double q, u64* state) nogil:
    cdef double f = pow(1.0 - q, <double>n)
    cdef double u = _uniform(state)
    cdef double c = f
    cdef long long k = 0
    cdef double ratio = q / (1.0 - q)
    while u > c and k < n:
        k += 1
        f *= (<double>(n - k + 1)) * ratio / <double>k
        c += f
    return k


cdef long long _binomial_btrs(long long n, double p, u64* state) nogil:
    cdef double spq = sqrt(n * p * (1.0 - p))
    cdef double b = 1.15 + 2.53 * spq
    cdef double a = -0.0873 + 0.0248 * b + 0.01 * p
    cdef double c = n * p + 0.5
    cdef double vr = 0.92 - 4.2 / b
    cdef double alpha = (2.83 + 5.1 / b) * spq
    cdef double lpq = log(p / (1.0 - p))
    cdef long long m = <long long>floor((n + 1) * p)
    cdef double h = lgamma(m + 1.0) + lgamma(n - m + 1.0)
    cdef double u, v, us
    cdef long long k
    while True:
        u = _uniform(state) - 0.5
        v = _uniform(state)
        us = 0.5 - fabs(u)
        k = <long long>floor((2.0 * a / us + b) * u + c)
        if us >= 0.07 and v <= vr:
            return k
        if k < 0 or k > n:
            continue
        v = log(v * alpha / (a / (us * us) + b))
        if v <= h - lgamma(k + 1.0) - lgamma(n - k + 1.0) + (k - m) * lpq:
            return k


cdef long long _binomial_draw(long long n, double p, u64* state) nogil:
    cdef double q
    cdef long long k
    if n <= 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    q = p if p < 1.0 - p else 1.0 - p
    if n * q <= 30.0:
        k = _binomial_inversion(n, q, state)
    else:
        k = _binomial_btrs(n, q, state)
    return k if p <= 0.5 else n - k


cdef long long _immigration_draw(
    int kind, double param, const double* table, long long lo, long long hi, u64* state
) nogil:
    cdef double u, v, top
    cdef long long j
    cdef int attempt
    if kind == 1:
        u = _uniform(state)
        if u < 1.0 - param:
            return 0
        v = _uniform(state)
        if v < 8.673617379884035e-19:
            v = 8.673617379884035e-19
        return <long long>(1.0 / v)
    for attempt in range(64):
        u = _uniform(state)
        top = table[hi - 1]
        if u < top:
            j = lo
            while u >= table[j]:
                j += 1
            return j - lo
    return hi - lo - 1


cdef long long _terminal_value(
    const double* rho,
    const unsigned char* kinds,
    const double* params,
    const long long* offsets,
    const double* table,
    long long n,
    u64 seed,
    u64 replicate,
) nogil:
    cdef u64 state = _stream_init(seed, replicate)
    cdef long long x = 0
    cdef long long i
    for i in range(n):
        if x > 0:
            x = _binomial_draw(x, rho[i], &state)
        x += _immigration_draw(kinds[i], params[i], table, offsets[i], offsets[i + 1], &state)
    return x


def mc_terminal(
    const double[::1] rho,
    const unsigned char[::1] kinds,
    const double[::1] params,
    const long long[::1] offsets,
    const double[::1] table,
    u64 seed,
    long long rep_start,
    long long count,
    long long[::1] out,
):
    """Fill out[i] with the terminal value of replicate rep_start + i."""
    cdef long long i
    cdef long long n = rho.shape[0]
    cdef const double* table_ptr = &table[0] if table.shape[0] > 0 else NULL
    with nogil:
        for i in range(count):
            out[i] = _terminal_value(
                &rho[0], &kinds[0], &params[0], &offsets[0], table_ptr,
                n, seed, <u64>(rep_start + i),
            )


def heavy_tail_product(
    double complex[::1] F,
    const double complex[::1] U,
    const double complex[::1] L,
    const double[::1] weights,
    const long long[::1] gens,
    int num_threads=1,
):
    """Multiply F (half-spectrum, F[0] preset to 1) by thinned heavy-tail
    immigration transforms; same formula as the Python backend."""
    cdef Py_ssize_t m2 = F.shape[0]
    cdef Py_ssize_t nfac = weights.shape[0]
    cdef Py_ssize_t kk, m
    cdef double w, lw, inv_g
    cdef double complex t, denom, h
    for kk in range(nfac):
        w = weights[kk]
        if w == 0.0:
            continue
        lw = log(w)
        inv_g = 1.0 / <double>gens[kk]
        for m in prange(1, m2, nogil=True, num_threads=num_threads, schedule='static'):
            t = w * U[m]
            denom = 1.0 - t
            if sqrt(denom.real * denom.real + denom.imag * denom.imag) < 1e-12:
                h = (1.0 - inv_g) + denom * (0.5 * inv_g)
            else:
                h = 1.0 + t * (lw + L[m]) * (inv_g / denom)
            F[m] = F[m] * h


def backend_name():
    return "cython"
