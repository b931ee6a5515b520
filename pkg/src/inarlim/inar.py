"""The time-varying thinning-plus-immigration process itself.

``X_n = thin(rho_n, X_{n-1}) + eps_n`` with ``X_0 = 0``: each individual of
the previous generation survives independently with probability ``rho_n``,
and ``eps_n`` fresh immigrants arrive.  The exact law of ``X_n`` is computed
two independent ways:

* :func:`exact_law` — the convolution, over generations k, of the thinned
  immigration laws with survival weight ``prod_{l=k+1}^n rho_l``,
* :func:`brute_force_law` — a forward dynamic program on the transition
  kernel, used as the oracle for the first route.

Generating functions of the law come in two more independent flavours
(:func:`gf_product`, :func:`gf_recursive`) that the tests play against each
other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .immigration import ImmigrationFamily
from .laws import binomial_mixture
from .pmf import FactorialMoment, GfValue, Pmf, convolve
from .schedules import rho_values, suffix_products

__all__ = [
    "ModelSpec",
    "TriangularSpec",
    "ToleranceError",
    "rho_product",
    "exact_law",
    "gf_product",
    "gf_recursive",
    "mean",
    "brute_force_law",
    "triangular_law",
]


class ToleranceError(RuntimeError):
    """Accumulated truncation exceeded the caller's tolerance budget."""


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Offspring-mean schedule plus immigration family, under a report name."""

    rho: Callable[[int], float]
    immigration: ImmigrationFamily
    name: str = "model"


@dataclass(frozen=True, eq=False)
class TriangularSpec:
    """Row-indexed collections of (law, thinning probability) pairs."""

    rows: Mapping[int, Sequence[tuple[Pmf, float]]] | Callable[[int], Sequence[tuple[Pmf, float]]]
    name: str = "triangular"

    def row(self, n: int) -> Sequence[tuple[Pmf, float]]:
        row = self.rows(n) if callable(self.rows) else self.rows[n]
        for law, p in row:
            if not isinstance(law, Pmf):
                raise TypeError("row entries must be (Pmf, probability) pairs")
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"row probability {p!r} outside [0,1]")
        return row


@lru_cache(maxsize=64)
def _suffix_cache(model: ModelSpec, n: int, power: int = 1) -> np.ndarray:
    arr = suffix_products(rho_values(model.rho, n), power)
    arr.flags.writeable = False
    return arr


def rho_product(model: ModelSpec, k: int, n: int) -> float:
    """Survival weight ``prod_{l=k+1}^n rho_l`` (1 when k = n)."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    return float(_suffix_cache(model, n)[k - 1])


def exact_law(model: ModelSpec, n: int, tolerance: float = 1e-12) -> Pmf:
    """Exact law of X_n as a convolution of thinned immigration laws.

    The k-th factor is the immigration law of generation k thinned by the
    survival weight to horizon n; factors are convolved in ascending k
    (smallest weights first, keeping early supports small).  Raises
    :class:`ToleranceError` when the accumulated truncation uncertainty
    exceeds ten times ``tolerance``.
    """
    if n < 1:
        raise ValueError("horizon must be >= 1")
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    if model.immigration.spectral_only:
        from .spectral import spectral_exact_law

        law = spectral_exact_law(model, n, tolerance)
    else:
        weights = _suffix_cache(model, n)
        per_factor = tolerance / (4.0 * n)
        acc = None
        for k in range(1, n + 1):
            factor = model.immigration.thinned_pmf(k, float(weights[k - 1]), per_factor)
            acc = factor if acc is None else convolve(acc, factor, trim_tol=per_factor)
        law = acc
    if law.uncertainty > 10.0 * tolerance:
        raise ToleranceError(
            f"accumulated uncertainty {law.uncertainty:g} exceeds 10*{tolerance:g}"
        )
    return law


def gf_product(model: ModelSpec, n: int, z: complex) -> GfValue:
    """Generating function of X_n via the product over generations."""
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("generating functions live on the unit disk")
    if n < 1:
        raise ValueError("horizon must be >= 1")
    weights = _suffix_cache(model, n)
    acc = 1.0 + 0.0j
    rad = 0.0
    for k in range(1, n + 1):
        h = model.immigration.gf(k, 1.0 + weights[k - 1] * (z - 1.0))
        acc *= h.value
        rad = (1.0 + rad) * (1.0 + h.radius) - 1.0
    return GfValue(acc, rad)


def gf_recursive(model: ModelSpec, n: int, z: complex) -> GfValue:
    """Generating function of X_n by unwinding the one-step recursion.

    Walks ``F_k(z) = F_{k-1}(1 + rho_k (z-1)) H_k(z)`` down from the horizon,
    evaluating each immigration transform at an iterated composition point.
    """
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("generating functions live on the unit disk")
    if n < 1:
        raise ValueError("horizon must be >= 1")
    t = complex(z)
    acc = 1.0 + 0.0j
    rad = 0.0
    for k in range(n, 0, -1):
        h = model.immigration.gf(k, t)
        acc *= h.value
        rad = (1.0 + rad) * (1.0 + h.radius) - 1.0
        t = 1.0 + model.rho(k) * (t - 1.0)
    return GfValue(acc, rad)


def mean(model: ModelSpec, n: int) -> FactorialMoment:
    """E X_n by the one-step recursion; flagged when any immigration mean is
    a truncation lower bound (the value is then a lower bound too)."""
    if n < 0:
        raise ValueError("horizon must be >= 0")
    value = 0.0
    flagged = False
    for k in range(1, n + 1):
        m = model.immigration.moment(k, 1)
        value = model.rho(k) * value + m.value
        flagged = flagged or m.lower_bound
    return FactorialMoment(value, flagged)


def brute_force_law(model: ModelSpec, n: int, state_cap: int = 512) -> Pmf:
    """Oracle law of X_n by forward dynamic programming.

    Maintains the full state distribution below ``state_cap``; fails loudly
    if more than 1e-9 of mass ever escapes the cap.  Exponential in nothing
    but brutally quadratic in the support, so keep horizons small.
    """
    if n < 1:
        raise ValueError("horizon must be >= 1")
    if state_cap < 2:
        raise ValueError("state_cap too small")
    dist = np.zeros(1)
    dist[0] = 1.0
    lost = 0.0
    for k in range(1, n + 1):
        rho_k = model.rho(k)
        if not 0.0 <= rho_k < 1.0:
            raise ValueError(f"rho_{k} = {rho_k!r} outside [0, 1)")
        dist = _thin_distribution(dist, rho_k)
        imm = model.immigration.pmf(k, 1e-15)
        lost += imm.tail_mass + imm.l1_slack
        dist = np.convolve(dist, imm.probs)
        if dist.size > state_cap:
            lost += float(dist[state_cap:].sum())
            dist = dist[:state_cap]
        if lost > 1e-9:
            raise ValueError(
                f"mass {lost:g} escaped state_cap={state_cap} by generation {k}"
            )
    nz = np.flatnonzero(dist)
    dist = dist[: nz[-1] + 1] if nz.size else dist[:1]
    return Pmf(dist.copy(), lost)


def _thin_distribution(dist: np.ndarray, rho: float) -> np.ndarray:
    """Push a state distribution through one binomial thinning step."""
    if rho == 0.0:
        out = np.zeros(1)
        out[0] = dist.sum()
        return out
    n = dist.size
    out = np.zeros(n)
    q = 1.0 - rho
    row = np.zeros(n)
    row[0] = 1.0
    out[0] = dist[0]
    for y in range(1, n):
        row[1 : y + 1] = q * row[1 : y + 1] + rho * row[0:y]
        row[0] *= q
        if dist[y] != 0.0:
            out[: y + 1] += dist[y] * row[: y + 1]
    return out


def triangular_law(spec: TriangularSpec, n: int, tolerance: float = 1e-12) -> Pmf:
    """Law of the row-n sum: convolution of thinned laws across the row."""
    row = spec.row(n)
    if len(row) == 0:
        raise ValueError(f"row {n} is empty")
    per_factor = tolerance / (4.0 * len(row))
    acc = None
    for law, p in row:
        factor = binomial_mixture(law, p)
        acc = factor if acc is None else convolve(acc, factor, trim_tol=per_factor)
    if acc.uncertainty > 10.0 * tolerance:
        raise ToleranceError(
            f"accumulated uncertainty {acc.uncertainty:g} exceeds 10*{tolerance:g}"
        )
    return acc
