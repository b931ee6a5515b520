"""Immigration-law families for time-varying models.

A family answers, for each generation n: the law of the immigration count,
its factorial moments, its generating function, and — where a closed form
makes it exact — the thinned law directly.  Parametric families (Bernoulli,
Poisson) use exact thinning identities; explicit per-generation laws fall
back to the generic binomial mixture.

The heavy-tailed family ``heavy_tail_immigration`` has P(count = j)
proportional to 1/(j(j+1)) and infinite mean for every n; its laws can only
be handled through closed-form generating functions, so models using it are
routed to the spectral pipeline.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable

import numpy as np

from .laws import bernoulli, binomial_mixture, poisson
from .pmf import FactorialMoment, GfValue, Pmf, factorial_moment, gf_eval

__all__ = [
    "ImmigrationFamily",
    "bernoulli_immigration",
    "poisson_immigration",
    "explicit_immigration",
    "heavy_tail_immigration",
]

# Monte Carlo sampling kinds understood by the kernels.
MC_TABLE = 0
MC_HEAVY_TAIL = 1


class ImmigrationFamily:
    """Base class; subclasses override the exact pieces they know."""

    label = "immigration"
    bernoulli_support = False  # P(count in {0,1}) = 1 for every n
    infinite_mean = False
    spectral_only = False  # laws representable only through their gf
    mc_kind = MC_TABLE

    def pmf(self, n: int, tol: float) -> Pmf:
        raise NotImplementedError

    def thinned_pmf(self, n: int, p: float, tol: float) -> Pmf:
        """Law of the p-thinned immigration count at generation n."""
        return binomial_mixture(self.pmf(n, tol), p)

    def moment(self, n: int, j: int) -> FactorialMoment:
        """j-th factorial moment at generation n (may be inf)."""
        return factorial_moment(self.pmf(n, 1e-13), j)

    def gf(self, n: int, z: complex) -> GfValue:
        return gf_eval(self.pmf(n, 1e-13), z)

    def mc_table(self, n: int) -> np.ndarray:
        """Cumulative masses for inverse-transform sampling (refined tol)."""
        law = self.pmf(n, 1e-15)
        return np.cumsum(law.probs)

    def mc_param(self, n: int) -> float:
        return 0.0


class _BernoulliImmigration(ImmigrationFamily):
    bernoulli_support = True

    def __init__(self, mean_fn: Callable[[int], float], label: str):
        self._mean = mean_fn
        self.label = label

    def rate(self, n: int) -> float:
        m = self._mean(n)
        if not 0.0 <= m <= 1.0:
            raise ValueError(f"Bernoulli immigration mean at n={n} is {m!r}")
        return m

    def pmf(self, n: int, tol: float) -> Pmf:
        return bernoulli(self.rate(n))

    def thinned_pmf(self, n: int, p: float, tol: float) -> Pmf:
        # Thinning a Bernoulli scales its mean.
        return bernoulli(self.rate(n) * p)

    def moment(self, n: int, j: int) -> FactorialMoment:
        return FactorialMoment(self.rate(n) if j == 1 else 0.0, False)

    def gf(self, n: int, z: complex) -> GfValue:
        return GfValue(1.0 + self.rate(n) * (z - 1.0), 0.0)


class _PoissonImmigration(ImmigrationFamily):
    def __init__(self, rate_fn: Callable[[int], float], label: str):
        self._rate = rate_fn
        self.label = label

    def rate(self, n: int) -> float:
        lam = self._rate(n)
        if lam < 0.0:
            raise ValueError(f"Poisson immigration rate at n={n} is {lam!r}")
        return lam

    def pmf(self, n: int, tol: float) -> Pmf:
        return poisson(self.rate(n), tol)

    def thinned_pmf(self, n: int, p: float, tol: float) -> Pmf:
        # Thinned Poisson counts stay Poisson with scaled rate.
        return poisson(self.rate(n) * p, tol)

    def moment(self, n: int, j: int) -> FactorialMoment:
        return FactorialMoment(self.rate(n) ** j, False)

    def gf(self, n: int, z: complex) -> GfValue:
        return GfValue(cmath.exp(self.rate(n) * (z - 1.0)), 0.0)


class _ExplicitImmigration(ImmigrationFamily):
    def __init__(self, law_fn: Callable[[int], Pmf], label: str):
        self._law = law_fn
        self.label = label

    def pmf(self, n: int, tol: float) -> Pmf:
        law = self._law(n)
        if not isinstance(law, Pmf):
            raise TypeError(f"immigration law at n={n} is not a Pmf")
        return law

    def mc_table(self, n: int) -> np.ndarray:
        return np.cumsum(self.pmf(n, 0.0).probs)


class _HeavyTailImmigration(ImmigrationFamily):
    """P(0) = 1 - 1/n, P(j) = 1/(n j (j+1)); infinite mean at every n."""

    label = "heavy-tail 1/(n j(j+1))"
    infinite_mean = True
    spectral_only = True
    mc_kind = MC_HEAVY_TAIL

    _MAX_SUPPORT = 50_000_000

    def pmf(self, n: int, tol: float) -> Pmf:
        # Mass beyond J is exactly 1/(n (J+1)).
        j_max = int(math.ceil(1.0 / (n * tol))) - 1
        j_max = max(j_max, 1)
        if j_max > self._MAX_SUPPORT:
            raise ValueError(
                f"heavy-tail law at n={n} needs support {j_max} for tol {tol:g}; "
                "use the spectral pipeline instead"
            )
        j = np.arange(1, j_max + 1, dtype=np.float64)
        probs = np.empty(j_max + 1)
        probs[0] = 1.0 - 1.0 / n
        probs[1:] = 1.0 / (n * j * (j + 1.0))
        return Pmf(probs, 1.0 / (n * (j_max + 1.0)))

    def thinned_pmf(self, n: int, p: float, tol: float) -> Pmf:
        from .spectral import heavy_tail_thinned_pmf

        return heavy_tail_thinned_pmf(n, p, tol)

    def moment(self, n: int, j: int) -> FactorialMoment:
        return FactorialMoment(math.inf, False)

    def gf(self, n: int, z: complex) -> GfValue:
        return GfValue(_heavy_tail_gf(z, n), 0.0)

    def mc_table(self, n: int) -> np.ndarray:
        raise NotImplementedError("heavy-tail immigration is sampled analytically")

    def mc_param(self, n: int) -> float:
        return 1.0 / n


def _heavy_tail_gf(z: complex, n: int) -> complex:
    """1 + (1-z) log(1-z) / (n z), with the removable points filled in."""
    if z == 1.0:
        return 1.0 + 0.0j
    if abs(z) < 1e-8:
        # Series: 1 - 1/n + z/(2n) + z^2/(6n) + O(z^3).
        return 1.0 - 1.0 / n + z / (2.0 * n) + z * z / (6.0 * n)
    w = 1.0 - z
    return 1.0 + w * cmath.log(w) / (n * z)


def bernoulli_immigration(mean_fn: Callable[[int], float], label: str = "Be(m_n)"):
    return _BernoulliImmigration(mean_fn, label)


def poisson_immigration(rate_fn: Callable[[int], float], label: str = "Po(l_n)"):
    return _PoissonImmigration(rate_fn, label)


def explicit_immigration(laws, label: str = "explicit"):
    """Family from a single Pmf, a dict {n: Pmf}, or a callable n -> Pmf."""
    if isinstance(laws, Pmf):
        fn = lambda n: laws
    elif isinstance(laws, dict):
        fn = lambda n: laws[n]
    elif callable(laws):
        fn = laws
    else:
        raise TypeError("laws must be a Pmf, a dict, or a callable")
    return _ExplicitImmigration(fn, label)


def heavy_tail_immigration():
    return _HeavyTailImmigration()
