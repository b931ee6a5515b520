"""Constructors for the named distributions: Bernoulli, Poisson, Dirac,
binomial mixtures, and compound Poisson laws driven by an intensity measure.

Convention: ``poisson(0)`` is the unit mass at 0.  This follows the
generating-function limit (``exp(lam*(z-1)) -> 1`` as ``lam -> 0``, the
transform of a point mass at 0); some treatments of near-critical limit
theorems instead declare the degenerate case to sit at 1, and callers relying
on that convention must handle ``lam == 0`` themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pmf import Pmf, _strip_trailing_zeros, convolve

__all__ = [
    "IntensityMeasure",
    "bernoulli",
    "poisson",
    "dirac",
    "binomial_mixture",
    "compound_poisson",
]

# Above this intensity support size the compound Poisson law is assembled
# spectrally instead of by per-atom convolution.
_CP_SPECTRAL_CUTOFF = 2048


@dataclass(frozen=True, eq=False)
class IntensityMeasure:
    """Finite measure on the positive integers; ``weights[i]`` is mu{i+1}.

    ``declared_total`` carries an analytically known total mass when the
    stored weights are a truncation; ``tail_bound`` bounds the mass dropped
    beyond the stored support.
    """

    weights: np.ndarray
    declared_total: float | None = None
    tail_bound: float = 0.0

    def __post_init__(self):
        arr = np.ascontiguousarray(self.weights, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("weights must be 1-D")
        if arr.size and arr.min() < 0.0:
            raise ValueError("weights must be non-negative")
        if self.tail_bound < 0.0:
            raise ValueError("tail_bound must be non-negative")
        if self.declared_total is not None:
            residual = self.declared_total - float(arr.sum())
            if residual < -1e-12 or residual > self.tail_bound + 1e-12:
                raise ValueError("declared_total inconsistent with weights/tail_bound")
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def total(self) -> float:
        """Total stored mass (excludes anything covered by tail_bound)."""
        return float(self.weights.sum())

    def weight(self, j: int) -> float:
        """mu{j} for j >= 1 over the stored support."""
        if j < 1:
            raise ValueError("intensity measures live on the positive integers")
        if j <= self.weights.size:
            return float(self.weights[j - 1])
        return 0.0


def bernoulli(p: float) -> Pmf:
    """Law on {0,1} with mean p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Bernoulli mean must be in [0,1], got {p!r}")
    if p == 0.0:
        return Pmf(np.array([1.0]))
    if p == 1.0:
        return Pmf(np.array([0.0, 1.0]))
    return Pmf(np.array([1.0 - p, p]))


def dirac(k: int) -> Pmf:
    """Point mass at the non-negative integer k."""
    if k < 0 or k != int(k):
        raise ValueError("point mass location must be a non-negative integer")
    probs = np.zeros(int(k) + 1)
    probs[-1] = 1.0
    return Pmf(probs)


def poisson(lam: float, tolerance: float = 1e-12) -> Pmf:
    """Poisson law truncated at the smallest K with upper-tail mass < tolerance.

    Terms are accumulated by direct summation; the stored tail mass is the
    analytic geometric-series bound on the remainder, so it never understates
    the truncation error.
    """
    if lam < 0.0:
        raise ValueError(f"Poisson rate must be non-negative, got {lam!r}")
    if not 0.0 < tolerance < 1.0:
        raise ValueError("tolerance must be in (0, 1)")
    if lam == 0.0:
        return Pmf(np.array([1.0]))
    terms = [math.exp(-lam)]
    cum = terms[0]
    k = 0
    while True:
        nxt = terms[-1] * lam / (k + 1)
        # Remainder bound: sum_{i>k} f_i <= f_{k+1} / (1 - lam/(k+2)).
        ratio = lam / (k + 2)
        if ratio < 1.0:
            rem = nxt / (1.0 - ratio)
            if rem < tolerance:
                break
        terms.append(nxt)
        cum += nxt
        k += 1
        if k > 10_000_000:
            raise ValueError("Poisson truncation failed to converge")
    arr = np.array(terms)
    tail = max(0.0, min(rem, 1.0 - cum + 1e-15))
    return Pmf(arr, tail)


def binomial_mixture(mu: Pmf, p: float) -> Pmf:
    """Mixture of Binomial(L, p) laws with L ~ mu (p-thinning of mu).

    Exact over the stored support; thinning cannot extend it, so the tail
    mass carries over unchanged.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"thinning probability must be in [0,1], got {p!r}")
    if p == 1.0:
        return mu
    probs = mu.probs
    if probs.size == 1 or p == 0.0:
        out = np.zeros(1)
        out[0] = float(probs.sum())
        return Pmf(out, mu.tail_mass)
    n = probs.size
    out = np.zeros(n)
    q = 1.0 - p
    row = np.zeros(n)
    row[0] = 1.0
    out[0] = probs[0]
    for ell in range(1, n):
        # Binomial(ell, p) row from the (ell-1) row, in place right-to-left.
        row[1 : ell + 1] = q * row[1 : ell + 1] + p * row[0:ell]
        row[0] *= q
        if probs[ell] != 0.0:
            out[: ell + 1] += probs[ell] * row[: ell + 1]
    return Pmf(_strip_trailing_zeros(out).copy(), mu.tail_mass)


def compound_poisson(mu: IntensityMeasure, tolerance: float = 1e-12) -> Pmf:
    """Law of ``Σ_j j·N_j`` for independent Poisson counts N_j with mean mu{j}.

    Assembled as the convolution over j of the law of ``j·N_j``; each factor
    is a truncated Poisson spread on the lattice jZ, with per-factor tail
    budgets summing below ``tolerance``.  Any ``tail_bound`` on the intensity
    measure adds directly to the result's tail mass (dropping intensity mass
    r moves the law by at most r in total variation).
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    if mu.tail_bound > 10.0 * tolerance:
        raise ValueError(
            f"intensity tail bound {mu.tail_bound:g} too large for tolerance {tolerance:g}"
        )
    weights = mu.weights
    support = np.flatnonzero(weights)
    if support.size == 0:
        return Pmf(np.array([1.0]), min(mu.tail_bound, 1.0))
    if weights.size > _CP_SPECTRAL_CUTOFF:
        from .spectral import compound_poisson_spectral

        return compound_poisson_spectral(mu, tolerance)
    per_factor = tolerance / (2.0 * support.size)
    acc = Pmf(np.array([1.0]))
    for idx in support:
        j = int(idx) + 1
        counts = poisson(float(weights[idx]), per_factor)
        spread = np.zeros((counts.probs.size - 1) * j + 1)
        spread[::j] = counts.probs
        factor = Pmf(spread, counts.tail_mass)
        acc = convolve(acc, factor)
    return _absorb_intensity_tail(acc, mu.tail_bound)


def _absorb_intensity_tail(law: Pmf, tail_bound: float) -> Pmf:
    """Account for intensity mass dropped beyond the stored support.

    If the dropped intensity mass is r, the full law equals the stored one
    convolved with a compound Poisson law that puts at least exp(-r) at 0, so
    scaling the stored entries by exp(-tail_bound) keeps them pointwise lower
    bounds; the deficit goes to the tail.
    """
    if tail_bound <= 0.0:
        return law
    scale = math.exp(-tail_bound)
    probs = law.probs * scale
    return Pmf(probs, 1.0 - float(probs.sum()), law.l1_slack)
