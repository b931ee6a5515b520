"""Asymptotic diagnostics: summability weights, factorial-moment limit
profiles, the intensity measure they determine, and numerical checkers for
the limit-theorem hypotheses.

Verdicts here are finite-sample extrapolations, never proofs: a hypothesis
is reported "consistent" when the sampled trajectory has stabilized (last
three samples within a relative band of 1e-3 of each other and of the
declared target), "inconsistent" when it visibly drifts away, and
"inconclusive" otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .laws import IntensityMeasure
from .pmf import factorial_moment
from .schedules import rho_values, suffix_products

__all__ = [
    "FactorialLimitProfile",
    "ConditionReport",
    "BracketNotConverged",
    "toeplitz_weight",
    "toeplitz_weights",
    "toeplitz_transform",
    "intensity_from_lambdas",
    "lambdas_from_intensity",
    "check_hypotheses",
    "check_triangular",
    "HYPOTHESIS_CHECKS",
    "TRIANGULAR_CHECKS",
]

_BAND = 1e-3
_CAVEAT = "verdicts extrapolate from finitely many samples; they are not proofs"

HYPOTHESIS_CHECKS = ("poisson-bernoulli", "poisson-general", "cp-bounded", "cp-unbounded")
TRIANGULAR_CHECKS = ("triangular-poisson", "triangular-cp")


class BracketNotConverged(ValueError):
    """Alternating-series brackets too wide to pin the intensity weights."""


@dataclass(frozen=True)
class FactorialLimitProfile:
    """Limits of m_{n,j} / (j (1 - rho_n)); ``bounded_j`` marks a declared
    cutoff J with the J-th limit exactly zero, None means unbounded support.
    ``lower_bounds[j-1]`` flags entries that are truncation lower bounds."""

    lambdas: tuple[float, ...]
    bounded_j: int | None = None
    lower_bounds: tuple[bool, ...] = ()
    diverging: bool = False

    def __post_init__(self):
        if any(l < 0.0 for l in self.lambdas):
            raise ValueError("limit values must be non-negative")
        if self.bounded_j is not None:
            j = self.bounded_j
            if not 1 <= j <= len(self.lambdas):
                raise ValueError("bounded_j must index into lambdas")
            if self.lambdas[j - 1] != 0.0:
                raise ValueError("bounded profile requires an exact zero at the cutoff")
        if self.lower_bounds and len(self.lower_bounds) != len(self.lambdas):
            raise ValueError("lower_bounds length mismatch")


@dataclass
class ConditionReport:
    check: str
    hypotheses: dict
    partial_sums: list
    growth_rate: float | None
    max_rho: float | None
    caveat: str = _CAVEAT

    def verdict(self, name: str) -> str:
        return self.hypotheses[name]["verdict"]

    def to_dict(self) -> dict:
        def clean(x):
            if isinstance(x, float) and not math.isfinite(x):
                return "infinite"
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            return x

        return clean(
            {
                "check": self.check,
                "hypotheses": self.hypotheses,
                "partial_sums": self.partial_sums,
                "growth_rate": self.growth_rate,
                "max_rho": self.max_rho,
                "caveat": self.caveat,
            }
        )


def toeplitz_weights(rho, n: int, k: int = 1) -> np.ndarray:
    """Weights (1 - rho_j) prod_{l=j+1}^n rho_l^k for j = 1..n."""
    if k < 1:
        raise ValueError("power must be >= 1")
    vals = rho_values(rho, n)
    return (1.0 - vals) * suffix_products(vals, k)


def toeplitz_weight(rho, n: int, j: int, k: int = 1) -> float:
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got j={j}, n={n}")
    return float(toeplitz_weights(rho, n, k)[j - 1])


def toeplitz_transform(rho, x: Sequence[float], k: int, n: int) -> float:
    """Weighted sum sum_j (1 - rho_j) prod_{l>j} rho_l^k x_j."""
    if len(x) < n:
        raise ValueError("sequence shorter than horizon")
    w = toeplitz_weights(rho, n, k)
    return math.fsum(float(w[j]) * float(x[j]) for j in range(n))


def intensity_from_lambdas(
    profile: FactorialLimitProfile, j_max: int | None = None
) -> IntensityMeasure:
    """Intensity weights mu{j} = (1/j!) sum_i (-1)^i lambda_{j+i} / i!.

    Bounded profiles evaluate the finite alternating sum exactly.  Unbounded
    profiles are bracketed between consecutive odd/even partial sums (the
    alternating-series envelope); a bracket wider than 1e-10 raises
    :class:`BracketNotConverged` rather than guessing.
    """
    lam = profile.lambdas
    if profile.bounded_j is not None:
        J = profile.bounded_j
        weights = np.zeros(max(J - 1, 1))
        for j in range(1, J):
            acc = math.fsum(
                (-1.0) ** i * lam[j + i - 1] / math.factorial(i)
                for i in range(0, J - j)
            )
            weights[j - 1] = acc / math.factorial(j)
    else:
        if j_max is None:
            raise ValueError("unbounded profiles need an explicit j_max")
        depth = len(lam)
        weights = np.zeros(j_max)
        widths = {}
        for j in range(1, j_max + 1):
            terms = [
                (-1.0) ** i * lam[j + i - 1] / math.factorial(i)
                for i in range(0, depth - j + 1)
            ]
            if len(terms) < 2:
                raise BracketNotConverged(f"profile too shallow for weight {j}")
            partials = np.cumsum(terms)
            odd = partials[0::2]  # after an even number of extra terms
            even = partials[1::2]
            hi = float(odd[-1])
            lo = float(even[-1])
            if hi - lo > 1e-10:
                widths[j] = hi - lo
            weights[j - 1] = 0.5 * (hi + lo) / math.factorial(j)
        if widths:
            raise BracketNotConverged(
                "brackets not converged: "
                + ", ".join(f"mu{{{j}}} width {w:.3g}" for j, w in widths.items())
            )
    if weights.min(initial=0.0) < -1e-12:
        raise ValueError("profile inconsistent with a measure (negative weight)")
    np.clip(weights, 0.0, None, out=weights)
    return IntensityMeasure(weights)


def lambdas_from_intensity(mu: IntensityMeasure, J: int) -> FactorialLimitProfile:
    """Factorial moments of the intensity measure up to order J - 1."""
    if J < 2:
        raise ValueError("need J >= 2")
    weights = mu.weights
    support = weights.size
    lambdas = []
    flags = []
    diverging = False
    for j in range(1, J):
        ii = np.arange(1, support + 1, dtype=np.float64)
        fall = np.ones(support)
        for t in range(j):
            fall *= ii - t
        full = float(np.dot(np.clip(fall, 0.0, None), weights))
        lambdas.append(full)
        flags.append(mu.tail_bound > 0.0)
        if mu.tail_bound > 0.0 and support >= 8:
            half = float(
                np.dot(np.clip(fall[: support // 2], 0.0, None), weights[: support // 2])
            )
            # Heuristic: a moment still growing when the support doubles.
            if full > 1.5 * half and full > 1e-9:
                diverging = True
    bounded = None
    if mu.tail_bound == 0.0 and support < J and lambdas and lambdas[-1] == 0.0:
        bounded = J - 1 if J - 1 <= len(lambdas) else None
    return FactorialLimitProfile(
        tuple(lambdas), bounded, tuple(flags), diverging
    )


def _trajectory_verdict(values, target=None, band=_BAND):
    """Stabilization verdict from the last three finite samples.

    With a declared target, "consistent" means either the tail sits inside
    the relative band around it, or the distance to it is still shrinking
    and has already dropped by 50x from the first sample (a vanishing
    target can never satisfy a relative-band test).
    """
    finite = [v for v in values if math.isfinite(v)]
    if len(finite) != len(values):
        return "inconsistent", "non-finite samples"
    if len(finite) < 3:
        return "inconclusive", "fewer than three samples"
    last = finite[-3:]
    if target is None:
        scale = max(abs(v) for v in last) + 1e-30
        spread = (max(last) - min(last)) / scale
        return ("consistent", "") if spread <= band else ("inconclusive", "still moving")
    dist = [abs(v - target) for v in last]
    scale = abs(target) if target != 0.0 else max(abs(finite[0]), 1e-30)
    if dist[-1] <= band * scale:
        return "consistent", ""
    shrinking = dist[0] >= dist[1] >= dist[2]
    first_dist = abs(finite[0] - target)
    if shrinking and dist[-1] <= 0.02 * max(first_dist, 1e-30):
        return "consistent", "converging toward target"
    if not shrinking or dist[-1] > 0.05 * scale and dist[-1] >= dist[0] * 0.99:
        if dist[-1] > 0.05 * scale:
            return "inconsistent", f"trajectory away from target {target:g}"
    return "inconclusive", ""


def _divergence_diagnostics(rho, n_samples):
    """Partial sums of (1 - rho) at geometric checkpoints plus a log-growth
    fit; the fitted slope is a heuristic divergence indicator only."""
    top = max(n_samples)
    checkpoints = sorted(set(int(top / 2**i) for i in range(6) if top / 2**i >= 4))
    sums = []
    acc = 0.0
    nxt = 0
    vals = rho_values(rho, top)
    for i, cp in enumerate(checkpoints):
        while nxt < cp:
            acc += 1.0 - vals[nxt]
            nxt += 1
        sums.append((cp, acc))
    if len(sums) >= 3:
        xs = np.log([c for c, _ in sums])
        ys = np.array([s for _, s in sums])
        slope = float(np.polyfit(xs, ys, 1)[0])
    else:
        slope = None
    return sums, slope


def _schedule_hypothesis(rho, n_samples, sums, slope):
    entries = {}
    rho_vals = [(int(n), float(rho(n))) for n in n_samples]
    bad = [v for _, v in rho_vals if not 0.0 <= v < 1.0]
    traj = [v for _, v in rho_vals]
    verdict, note = _trajectory_verdict(traj, target=1.0, band=5e-2)
    if bad:
        verdict, note = "inconsistent", "offspring mean outside [0, 1)"
    entries["offspring-mean-to-one"] = {
        "trajectory": rho_vals,
        "target": 1.0,
        "verdict": verdict,
        "note": note,
    }
    if slope is None:
        div_verdict, div_note = "inconclusive", "too few checkpoints"
    elif slope > 0.05 and sums[-1][1] > sums[0][1] + 1e-9:
        div_verdict, div_note = "consistent", f"log-growth slope {slope:.3g}"
    else:
        div_verdict, div_note = "inconsistent", f"partial sums plateau (slope {slope:.3g})"
    entries["thinning-deficit-diverges"] = {
        "trajectory": sums,
        "target": None,
        "verdict": div_verdict,
        "note": div_note,
    }
    return entries


def check_hypotheses(
    model,
    check: str,
    n_samples: Sequence[int],
    targets: Sequence[float] | None = None,
    j_depth: int = 4,
) -> ConditionReport:
    """Numerical rendering of a limit theorem's hypotheses for a model.

    ``targets`` optionally declares the expected limit(s) (lambda for the
    Poisson checks, lambda_j for the compound-Poisson ones).
    """
    if check not in HYPOTHESIS_CHECKS:
        raise ValueError(f"unknown check {check!r}; expected one of {HYPOTHESIS_CHECKS}")
    n_samples = sorted(set(int(n) for n in n_samples))
    if not n_samples:
        raise ValueError("need at least one sample horizon")
    fam = model.immigration
    sums, slope = _divergence_diagnostics(model.rho, n_samples)
    entries = _schedule_hypothesis(model.rho, n_samples, sums, slope)

    if check == "poisson-bernoulli":
        supported = getattr(fam, "bernoulli_support", False)
        if not supported:
            supported = all(len(fam.pmf(n, 1e-9)) <= 2 for n in n_samples)
        entries["immigration-on-01"] = {
            "trajectory": [],
            "target": None,
            "verdict": "consistent" if supported else "inconsistent",
            "note": "" if supported else "immigration mass outside {0,1}",
        }

    orders = {"poisson-bernoulli": (1,), "poisson-general": (1, 2)}.get(
        check, tuple(range(1, j_depth + 1))
    )
    for idx, j in enumerate(orders):
        traj = []
        flagged = False
        for n in n_samples:
            m = fam.moment(n, j)
            flagged = flagged or m.lower_bound
            denom = j * (1.0 - model.rho(n)) if check.startswith("cp") else (1.0 - model.rho(n))
            traj.append((n, m.value / denom if denom > 0 else math.inf))
        values = [v for _, v in traj]
        if check == "poisson-general" and j == 2:
            target = 0.0
        elif targets is not None and idx < len(targets):
            target = targets[idx]
        else:
            target = None
        verdict, note = _trajectory_verdict(values, target)
        if any(math.isinf(v) for v in values):
            verdict = "inconsistent"
            note = "infinite factorial moment"
        if flagged and not note:
            note = "moments are truncation lower bounds"
        entries[f"moment-ratio-{j}"] = {
            "trajectory": traj,
            "target": target,
            "verdict": verdict,
            "note": note,
        }
    max_rho = max(float(model.rho(n)) for n in n_samples)
    return ConditionReport(check, entries, sums, slope, max_rho)


def check_triangular(
    spec,
    check: str,
    n_samples: Sequence[int],
    targets: Sequence[float] | None = None,
    j_depth: int = 3,
) -> ConditionReport:
    """Condition trajectories for triangular systems of thinned laws."""
    if check not in TRIANGULAR_CHECKS:
        raise ValueError(f"unknown check {check!r}; expected one of {TRIANGULAR_CHECKS}")
    n_samples = sorted(set(int(n) for n in n_samples))
    entries = {}

    def row_stats(n):
        row = spec.row(n)
        means = np.array([factorial_moment(law, 1).value * p for law, p in row])
        return row, means

    mean_traj, sq_traj = [], []
    for n in n_samples:
        row, means = row_stats(n)
        mean_traj.append((n, float(means.sum())))
        sq_traj.append((n, float((means**2).sum())))
    lam_target = targets[0] if targets else None
    verdict, note = _trajectory_verdict([v for _, v in mean_traj], lam_target)
    entries["mean-sum"] = {
        "trajectory": mean_traj,
        "target": lam_target,
        "verdict": verdict,
        "note": note,
    }
    verdict, note = _trajectory_verdict([v for _, v in sq_traj], 0.0)
    entries["square-sum-vanishes"] = {
        "trajectory": sq_traj,
        "target": 0.0,
        "verdict": verdict,
        "note": note,
    }
    if check == "triangular-poisson":
        orders = (2,)
    else:
        orders = tuple(range(2, j_depth + 1))
    for j in orders:
        traj = []
        for n in n_samples:
            row = spec.row(n)
            total = math.fsum(
                (p**j) * factorial_moment(law, j).value for law, p in row
            )
            traj.append((n, total))
        if check == "triangular-poisson":
            target = 0.0
        elif targets is not None and j - 1 < len(targets):
            target = targets[j - 1]
        else:
            target = None
        verdict, note = _trajectory_verdict([v for _, v in traj], target)
        entries[f"thinned-moment-sum-{j}"] = {
            "trajectory": traj,
            "target": target,
            "verdict": verdict,
            "note": note,
        }
    return ConditionReport(check, entries, [], None, None)
