"""Truncated probability mass functions on the non-negative integers.

A :class:`Pmf` stores a dense probability vector ``probs`` (``probs[j]`` is
the mass at ``j``) together with an explicit ``tail_mass``: mass known to sit
beyond the stored support but never redistributed.  Carrying the tail makes
every derived quantity an interval statement rather than a guess: total
variation distances come with rigorous enclosures, generating-function values
with an error radius, factorial moments with a lower-bound flag.

All values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "Pmf",
    "TvInterval",
    "GfValue",
    "FactorialMoment",
    "canonicalize",
    "convolve",
    "tv_distance",
    "gf_eval",
    "factorial_moment",
]

# Unit-mass invariant band and negative-entry clipping threshold.
MASS_BAND = 1e-12
NEG_CLIP = 1e-15

# Below this support length direct convolution beats FFT.
_DIRECT_CONV_CUTOFF = 64


class TvInterval(NamedTuple):
    """Point estimate of a total variation distance with a rigorous enclosure.

    ``estimate`` is the half ℓ¹ distance over the stored supports plus half
    the tail-mass difference; ``lo``/``hi`` bracket the true distance once the
    unresolved tails are accounted for.
    """

    estimate: float
    lo: float
    hi: float

    def __float__(self) -> float:
        return self.estimate

    @property
    def width(self) -> float:
        return self.hi - self.lo


class GfValue(NamedTuple):
    """Generating-function value with an error radius from truncation."""

    value: complex
    radius: float

    def __complex__(self) -> complex:
        return self.value


class FactorialMoment(NamedTuple):
    """Factorial moment; ``lower_bound`` is set when tail mass was dropped."""

    value: float
    lower_bound: bool

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class Pmf:
    """Dense law on {0, 1, ...} with explicit truncation bookkeeping.

    ``tail_mass`` is mass sitting beyond the stored support.  ``l1_slack`` is
    any additional bound on the ℓ¹ distance between the stored vector and the
    true law (spectral aliasing, accumulated rounding); it does not enter the
    unit-mass invariant but widens every derived enclosure.
    """

    probs: np.ndarray
    tail_mass: float = 0.0
    l1_slack: float = 0.0

    def __post_init__(self):
        arr = np.ascontiguousarray(self.probs, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("probs must be a non-empty 1-D array")
        if arr.min(initial=0.0) < 0.0:
            raise ValueError("probs must be non-negative")
        if self.tail_mass < 0.0 or self.l1_slack < 0.0:
            raise ValueError("tail_mass and l1_slack must be non-negative")
        total = float(arr.sum()) + self.tail_mass
        if not (1.0 - MASS_BAND <= total <= 1.0 + MASS_BAND):
            raise ValueError(f"total mass {total!r} outside unit band")
        if arr.size > 1 and arr[-1] == 0.0:
            raise ValueError("trailing entry must be nonzero (canonical truncation)")
        arr.flags.writeable = False
        object.__setattr__(self, "probs", arr)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))
        object.__setattr__(self, "l1_slack", float(self.l1_slack))

    def __len__(self) -> int:
        return self.probs.size

    def p(self, j: int) -> float:
        """Mass at j over the stored support (0 beyond it)."""
        if 0 <= j < self.probs.size:
            return float(self.probs[j])
        return 0.0

    @property
    def mean_lower(self) -> float:
        return float(np.dot(np.arange(self.probs.size), self.probs))

    @property
    def uncertainty(self) -> float:
        """ℓ¹ bound on the distance between the stored vector and the law."""
        return self.tail_mass + self.l1_slack

    def is_tail_free(self) -> bool:
        return self.tail_mass == 0.0 and self.l1_slack == 0.0


def _strip_trailing_zeros(arr: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(arr)
    if nz.size == 0:
        return arr[:1]
    return arr[: nz[-1] + 1]


def _trim_tail(arr: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Move the longest trailing run with cumulative mass < tol into the tail."""
    if tol <= 0.0 or arr.size <= 1:
        return _strip_trailing_zeros(arr), 0.0
    rev_cum = np.cumsum(arr[::-1])
    drop = int(np.searchsorted(rev_cum, tol, side="left"))
    drop = min(drop, arr.size - 1)
    kept = _strip_trailing_zeros(arr[: arr.size - drop])
    trimmed = float(arr[kept.size :].sum())
    return kept, trimmed


def canonicalize(raw: Iterable[float], tolerance: float = 0.0) -> Pmf:
    """Build a canonical :class:`Pmf` from a raw mass sequence.

    Entries in ``(-1e-15, 0)`` (floating cancellation) are clipped to zero;
    trailing mass with cumulative sum below ``tolerance`` is moved into
    ``tail_mass``.  Total mass may deviate from 1 by at most ``1e-9``; the
    deviation is rescaled away so the unit-mass invariant holds exactly.
    """
    arr = np.ascontiguousarray(raw, dtype=np.float64).copy()
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("raw mass sequence must be non-empty and 1-D")
    if arr.min(initial=0.0) < -NEG_CLIP:
        raise ValueError("negative entry beyond clipping threshold")
    np.clip(arr, 0.0, None, out=arr)
    total = float(arr.sum())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"total mass {total!r} deviates from 1 by more than 1e-9")
    kept, trimmed = _trim_tail(arr, tolerance)
    kept = kept.copy()
    stored = float(kept.sum())
    if stored > 0.0:
        kept *= (1.0 - trimmed) / stored
    return Pmf(kept, trimmed)


def convolve(a: Pmf, b: Pmf, trim_tol: float = 0.0) -> Pmf:
    """Convolution of two truncated laws.

    Tail masses combine as ``ta + tb - ta*tb`` (mass escaping the stored
    grid); ``trim_tol`` optionally re-truncates the result, adding the
    trimmed trailing mass to the tail.
    """
    pa, pb = a.probs, b.probs
    if pa.size == 1 or pb.size == 1:
        out = pa * pb[0] if pb.size == 1 else pb * pa[0]
    elif min(pa.size, pb.size) <= _DIRECT_CONV_CUTOFF:
        out = np.convolve(pa, pb)
    else:
        out = _fft_convolve(pa, pb)
    tail = a.tail_mass + b.tail_mass - a.tail_mass * b.tail_mass
    kept, trimmed = _trim_tail(out, trim_tol)
    # l1 error is subadditive under convolution of sub-probability vectors.
    return Pmf(kept, tail + trimmed, a.l1_slack + b.l1_slack)


def _fft_convolve(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    n = pa.size + pb.size - 1
    size = 1 << (n - 1).bit_length()
    fa = np.fft.rfft(pa, size)
    fb = np.fft.rfft(pb, size)
    out = np.fft.irfft(fa * fb, size)[:n]
    if out.min() < -NEG_CLIP:
        raise ValueError("FFT convolution produced negatives beyond clip threshold")
    np.clip(out, 0.0, None, out=out)
    # Renormalization check only; mass is never silently rescaled here.
    defect = abs(out.sum() - pa.sum() * pb.sum())
    if defect > 1e-11:
        raise ValueError(f"FFT convolution mass defect {defect:g}")
    return out


def tv_distance(a: Pmf, b: Pmf) -> TvInterval:
    """Total variation distance ``(1/2) Σ_j |a{j} - b{j}|`` with enclosure.

    The estimate treats the two tails as if they coincided; the interval
    ``[est - (ta+tb)/2, est + (ta+tb)/2]`` (clipped to [0,1]) contains the
    true distance for any placement of the tail mass.
    """
    n = max(a.probs.size, b.probs.size)
    pa = np.zeros(n)
    pa[: a.probs.size] = a.probs
    pb = np.zeros(n)
    pb[: b.probs.size] = b.probs
    core = 0.5 * float(np.abs(pa - pb).sum())
    est = core + 0.5 * abs(a.tail_mass - b.tail_mass)
    slack = 0.5 * (a.uncertainty + b.uncertainty)
    # Enclosure is centered on the stored-support distance: each true law
    # differs from its stored vector by at most `uncertainty` in l1, so
    # |TV_true - core| <= slack by the triangle inequality.
    return TvInterval(est, max(0.0, core - slack), min(1.0, core + slack))


def gf_eval(a: Pmf, z: complex) -> GfValue:
    """Probability generating function ``Σ_j a{j} z^j`` on the unit disk.

    The untracked tail contributes at most ``tail_mass`` in modulus, which is
    reported as the error radius.
    """
    if abs(z) > 1.0 + 1e-12:
        raise ValueError("generating function only evaluated for |z| <= 1")
    # Horner in reverse keeps this exact-order deterministic.
    acc = 0.0 + 0.0j
    for coeff in a.probs[::-1]:
        acc = acc * z + coeff
    return GfValue(acc, a.uncertainty)


def factorial_moment(a: Pmf, j: int) -> FactorialMoment:
    """j-th factorial moment ``Σ_ℓ ℓ(ℓ-1)...(ℓ-j+1) a{ℓ}`` over the support.

    A lower bound whenever tail mass is present (tail contributions are
    non-negative and unknown).
    """
    if j < 1 or j != int(j):
        raise ValueError("moment order must be a positive integer")
    n = a.probs.size
    if n <= j:
        value = 0.0
    else:
        ell = np.arange(n, dtype=np.float64)
        fall = np.ones(n)
        for i in range(j):
            fall *= ell - i
        value = float(np.dot(fall[j:], a.probs[j:]))
    return FactorialMoment(value, a.uncertainty > 0.0)


def mean(a: Pmf) -> FactorialMoment:
    return factorial_moment(a, 1)
