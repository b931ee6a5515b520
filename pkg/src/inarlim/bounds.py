"""Closed-form inequality certificates.

Each check evaluates both sides of one inequality on concrete inputs and
records the margin; a failure beyond floating rounding (-1e-12) means an
implementation bug, so sweeps are run with tail-free truncations that keep
truncation error out of the margins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laws import IntensityMeasure, bernoulli, binomial_mixture, compound_poisson, poisson
from .pmf import Pmf, convolve, factorial_moment, gf_eval, tv_distance

__all__ = [
    "BoundCheck",
    "be_po_bound",
    "bi_be_bound",
    "bi_cp_bound",
    "taylor_remainder_bound",
    "product_difference_bound",
    "convolution_subadditivity",
    "run_sweeps",
]

PASS_SLACK = 1e-12


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    inputs: str
    passed: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def __str__(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: lhs={self.lhs:.6g} rhs={self.rhs:.6g} ({self.inputs})"


def _check(name, lhs, rhs, inputs, extra_ok=True):
    return BoundCheck(name, float(lhs), float(rhs), inputs, bool(extra_ok) and rhs - lhs >= -PASS_SLACK)


def be_po_bound(p: float) -> BoundCheck:
    """d(Be(p), Po(p)) <= p^2; the distance itself equals p (1 - e^{-p})."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    lhs = float(tv_distance(bernoulli(p), poisson(p, 1e-15)))
    closed = p * (1.0 - math.exp(-p))
    ok = abs(lhs - closed) < 1e-10
    return _check(
        "bernoulli-vs-poisson", lhs, p * p, f"p={p:g}, closed-form dev={abs(lhs - closed):.2e}", ok
    )


def bi_be_bound(eps: Pmf, p: float) -> BoundCheck:
    """d(Bi(eps,p), Be(p E eps)) <= 1.5 p^2 E eps(eps-1), for p E eps <= 1."""
    m1 = factorial_moment(eps, 1).value
    if p * m1 > 1.0:
        raise ValueError(f"p * mean = {p * m1:g} exceeds 1")
    lhs = float(tv_distance(binomial_mixture(eps, p), bernoulli(p * m1)))
    rhs = 1.5 * p * p * factorial_moment(eps, 2).value
    return _check("thinned-vs-bernoulli", lhs, rhs, f"p={p:g}, mean={m1:g}")


def bi_cp_bound(eps: Pmf, p: float) -> BoundCheck:
    """d(Bi(eps,p), CP(Bi(eps,p))) <= p^2 (E eps)^2, and the intermediate
    inequality P(Bi(eps,p) >= 1) <= p E eps."""
    mix = binomial_mixture(eps, p)
    if mix.probs.size > 1:
        intensity = IntensityMeasure(mix.probs[1:])
        cp = compound_poisson(intensity, 1e-14)
    else:
        cp = Pmf(np.array([1.0]))
    lhs = float(tv_distance(mix, cp))
    m1 = factorial_moment(eps, 1).value
    rhs = (p * m1) ** 2
    positive = 1.0 - mix.p(0)
    hit_ok = positive <= p * m1 + PASS_SLACK
    return _check(
        "thinned-vs-compound-poisson",
        lhs,
        rhs,
        f"p={p:g}, mean={m1:g}, P(>=1)={positive:.3g}<={p * m1:.3g}",
        hit_ok,
    )


def taylor_remainder_bound(law: Pmf, k: int, z_grid) -> list[BoundCheck]:
    """|H(z) - sum_{j<k} m_j/j! (z-1)^j| <= m_k/k! |z-1|^k on the disk."""
    if k < 1:
        raise ValueError("order must be >= 1")
    moments = [1.0] + [factorial_moment(law, j).value for j in range(1, k + 1)]
    out = []
    for z in z_grid:
        partial = sum(moments[j] / math.factorial(j) * (z - 1.0) ** j for j in range(k))
        lhs = abs(gf_eval(law, z).value - partial)
        rhs = moments[k] / math.factorial(k) * abs(z - 1.0) ** k
        out.append(_check("transform-taylor-remainder", lhs, rhs, f"k={k}, z={z:.3g}"))
    return out


def product_difference_bound(a, b) -> BoundCheck:
    """|prod a_k - prod b_k| <= sum |a_k - b_k| for entries in the unit disk."""
    a = [complex(x) for x in a]
    b = [complex(x) for x in b]
    if len(a) != len(b):
        raise ValueError("length mismatch")
    for x in a + b:
        if abs(x) > 1.0 + 1e-12:
            raise ValueError("entries must lie in the closed unit disk")
    lhs = abs(math.prod(a) - math.prod(b))
    rhs = sum(abs(x - y) for x, y in zip(a, b))
    return _check("unit-disk-product-difference", lhs, rhs, f"n={len(a)}")


def convolution_subadditivity(mus, nus) -> BoundCheck:
    """d(conv mus, conv nus) <= sum d(mu_k, nu_k)."""
    if len(mus) != len(nus):
        raise ValueError("length mismatch")
    acc_m, acc_n = mus[0], nus[0]
    for m, n in zip(mus[1:], nus[1:]):
        acc_m = convolve(acc_m, m)
        acc_n = convolve(acc_n, n)
    lhs = float(tv_distance(acc_m, acc_n))
    rhs = math.fsum(float(tv_distance(m, n)) for m, n in zip(mus, nus))
    return _check("convolution-subadditivity", lhs, rhs, f"n={len(mus)}")


def _disk_grid(n_radii: int, n_angles: int):
    pts = []
    for i in range(n_radii):
        r = i / (n_radii - 1)
        for j in range(n_angles):
            pts.append(r * np.exp(2j * np.pi * j / n_angles))
    return pts


def _random_finite_pmf(rng, max_support):
    size = int(rng.integers(1, max_support + 1))
    raw = rng.random(size) + 1e-3
    return Pmf(raw / raw.sum())


def run_sweeps(grid: str = "fine", seed: int = 20260810) -> list[BoundCheck]:
    """Every inequality over its documented sweep; returns all checks."""
    if grid not in ("coarse", "fine"):
        raise ValueError("grid must be 'coarse' or 'fine'")
    fine = grid == "fine"
    rng = np.random.default_rng(seed)
    checks: list[BoundCheck] = []

    n_be = 101 if fine else 21
    for p in np.linspace(0.0, 1.0, n_be):
        checks.append(be_po_bound(float(p)))

    n_pairs = 500 if fine else 60
    for _ in range(n_pairs):
        eps = _random_finite_pmf(rng, 10)
        m1 = factorial_moment(eps, 1).value
        cap = min(0.3, 1.0 / m1 if m1 > 0 else 0.3)
        p = float(rng.uniform(0.01, cap))
        checks.append(bi_be_bound(eps, p))
        checks.append(bi_cp_bound(eps, float(rng.uniform(0.0, 1.0))))

    zs = _disk_grid(7, 7)
    for k in (1, 2, 3):
        checks.extend(taylor_remainder_bound(bernoulli(0.35), k, zs))
        for lam in (0.5, 1.0, 2.0):
            checks.extend(taylor_remainder_bound(poisson(lam, 1e-15), k, zs))

    n_rand = 100 if fine else 20
    for _ in range(n_rand):
        size = int(rng.integers(1, 8))
        a = [
            complex(x, y)
            for x, y in zip(rng.uniform(-0.7, 0.7, size), rng.uniform(-0.7, 0.7, size))
        ]
        b = [
            complex(x, y)
            for x, y in zip(rng.uniform(-0.7, 0.7, size), rng.uniform(-0.7, 0.7, size))
        ]
        checks.append(product_difference_bound(a, b))
    for _ in range(n_rand):
        size = int(rng.integers(1, 6))
        mus = [_random_finite_pmf(rng, 8) for _ in range(size)]
        nus = [_random_finite_pmf(rng, 8) for _ in range(size)]
        checks.append(convolution_subadditivity(mus, nus))
    return checks
