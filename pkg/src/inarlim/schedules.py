"""Offspring-mean schedules and their suffix products.

Schedules are callables ``n -> rho_n`` on the positive integers with values
in [0, 1).  Suffix products of thousands of near-1 factors are where the
exact-law pipeline loses precision first, so they are accumulated in
compensated (double-double) arithmetic.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "near_critical_rho",
    "constant_rho",
    "explicit_rho",
    "rho_values",
    "suffix_products",
]

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


def near_critical_rho(c: float = 1.0, gamma: float = 1.0):
    """Schedule ``rho_n = 1 - c / n**gamma`` (clamped into [0, 1))."""
    if c <= 0.0 or gamma <= 0.0:
        raise ValueError("c and gamma must be positive")

    def rho(n: int) -> float:
        return max(0.0, 1.0 - c / float(n) ** gamma)

    rho.label = f"1-{c:g}/n^{gamma:g}"
    return rho


def constant_rho(value: float):
    if not 0.0 <= value < 1.0:
        raise ValueError("constant offspring mean must lie in [0, 1)")

    def rho(n: int) -> float:
        return value

    rho.label = f"const({value:g})"
    return rho


def explicit_rho(values):
    """Schedule from a 1-indexed array of offspring means."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.size == 0 or arr.min() < 0.0 or arr.max() >= 1.0:
        raise ValueError("explicit schedule entries must lie in [0, 1)")

    def rho(n: int) -> float:
        if not 1 <= n <= arr.size:
            raise ValueError(f"schedule defined for n <= {arr.size}, got {n}")
        return float(arr[n - 1])

    rho.label = f"explicit[{arr.size}]"
    return rho


def rho_values(rho, n: int) -> np.ndarray:
    """Schedule values rho_1..rho_n as an array (validated)."""
    out = np.empty(n)
    for i in range(1, n + 1):
        v = rho(i)
        if not 0.0 <= v < 1.0:
            raise ValueError(f"rho_{i} = {v!r} outside [0, 1)")
        out[i - 1] = v
    return out


def _two_prod(a: float, b: float) -> tuple[float, float]:
    x = a * b
    c = _SPLITTER * a
    a_hi = c - (c - a)
    a_lo = a - a_hi
    c = _SPLITTER * b
    b_hi = c - (c - b)
    b_lo = b - b_hi
    err = ((a_hi * b_hi - x) + a_hi * b_lo + a_lo * b_hi) + a_lo * b_lo
    return x, err


def compensated_cumprod(factors: np.ndarray) -> np.ndarray:
    """Running products with a compensated low-order term.

    Drift stays near machine precision even for 1e5 near-1 factors, where a
    plain running product loses ~n ulps.
    """
    out = np.empty(factors.size)
    hi, lo = 1.0, 0.0
    for i, f in enumerate(factors):
        f = float(f)
        hi, err = _two_prod(hi, f)
        lo = lo * f + err
        # Renormalize so hi stays the correctly rounded running product.
        s = hi + lo
        lo -= s - hi
        hi = s
        out[i] = hi
    return out


def suffix_products(rho_arr: np.ndarray, power: int = 1) -> np.ndarray:
    """Products ``prod_{l=k+1}^{n} rho_l**power`` for k = 1..n.

    Entry ``[k-1]`` is the survival weight attaching generation k to the
    horizon n = len(rho_arr); the last entry is the empty product 1.
    """
    if power < 1:
        raise ValueError("power must be a positive integer")
    base = rho_arr if power == 1 else rho_arr**power
    rev = compensated_cumprod(base[::-1][:-1])
    out = np.empty(rho_arr.size)
    out[-1] = 1.0
    out[:-1] = rev[::-1]
    return out
