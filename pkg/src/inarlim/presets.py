"""Named experiment presets: the scenarios the limit theory covers, as
ready-to-run model builders with their limit targets and (where a closed
form exists) proven convergence envelopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .immigration import (
    bernoulli_immigration,
    explicit_immigration,
    heavy_tail_immigration,
    poisson_immigration,
)
from .inar import ModelSpec, TriangularSpec
from .laws import IntensityMeasure, compound_poisson, dirac, poisson
from .pmf import Pmf, canonicalize
from .schedules import near_critical_rho
from .spectral import _MAX_LOG2_M, _eps_num, compound_poisson_spectral, cp_fold_bound

__all__ = ["Preset", "PRESETS", "preset_catalog", "get_preset", "quadratic_intensity"]


@dataclass(frozen=True)
class Preset:
    name: str
    summary: str
    kind: str  # "inar" or "triangular"
    params: tuple[tuple[str, float, str], ...]
    check: str | None
    build: Callable[..., object]
    target: Callable[..., tuple[str, Pmf]]
    bound: Callable[..., float | None]
    check_targets: Callable[..., list | None]

    def resolve_params(self, overrides: dict | None) -> dict:
        values = {name: default for name, default, _ in self.params}
        for key, val in (overrides or {}).items():
            if key not in values:
                raise KeyError(f"preset {self.name!r} has no parameter {key!r}")
            values[key] = float(val)
        return values


def _bernoulli_poisson_preset():
    def build(lam):
        return ModelSpec(
            near_critical_rho(),
            bernoulli_immigration(lambda n: min(1.0, lam / n), label=f"Be({lam:g}/n)"),
            name="thm31",
        )

    return Preset(
        name="thm31",
        summary=(
            "nearly critical schedule 1-1/n with Bernoulli immigration of "
            "mean lam/n; the law approaches Poisson(lam) with proven "
            "distance at most lam^2/n"
        ),
        kind="inar",
        params=(("lam", 1.0, "limit Poisson rate"),),
        check="poisson-bernoulli",
        build=lambda lam=1.0: build(lam),
        target=lambda tolerance, lam=1.0: (f"Po({lam:g})", poisson(lam, tolerance)),
        bound=lambda n, lam=1.0: lam * lam / n if n >= lam else None,
        check_targets=lambda lam=1.0: [lam],
    )


def _poisson_immigration_preset():
    def build(lam):
        return ModelSpec(
            near_critical_rho(),
            poisson_immigration(lambda n: lam / n, label=f"Po({lam:g}/n)"),
            name="thm41",
        )

    return Preset(
        name="thm41",
        summary=(
            "nearly critical schedule 1-1/n with Poisson immigration of rate "
            "lam/n (second factorial moments vanish fast); the law approaches "
            "Poisson(lam) within 2.5 lam^2/n"
        ),
        kind="inar",
        params=(("lam", 1.0, "limit Poisson rate"),),
        check="poisson-general",
        build=lambda lam=1.0: build(lam),
        target=lambda tolerance, lam=1.0: (f"Po({lam:g})", poisson(lam, tolerance)),
        bound=lambda n, lam=1.0: 2.5 * lam * lam / n,
        check_targets=lambda lam=1.0: [lam, 0.0],
    )


def _bounded_cp_preset():
    def immigration_law(n, lam1, lam2):
        p2 = lam2 / n
        p1 = (lam1 - 2.0 * lam2) / n
        return canonicalize([1.0 - p1 - p2, p1, p2])

    def build(lam1, lam2):
        if lam1 < 2.0 * lam2:
            raise ValueError("need lam1 >= 2*lam2 for a valid immigration law")
        return ModelSpec(
            near_critical_rho(),
            explicit_immigration(
                lambda n: immigration_law(n, lam1, lam2), label="support {0,1,2}"
            ),
            name="thm51-bounded",
        )

    def target(tolerance, lam1=2.0, lam2=1.0):
        mu = IntensityMeasure(np.array([lam1 - lam2, lam2 / 2.0]))
        desc = f"CP(mu1={lam1 - lam2:g}, mu2={lam2 / 2:g})"
        return desc, compound_poisson(mu, tolerance)

    return Preset(
        name="thm51-bounded",
        summary=(
            "immigration on {0,1,2} tuned so the first two factorial-moment "
            "ratios converge to (lam1, lam2); the law approaches the compound "
            "Poisson with intensity mu{1}=lam1-lam2, mu{2}=lam2/2"
        ),
        kind="inar",
        params=(
            ("lam1", 2.0, "first moment-ratio limit"),
            ("lam2", 1.0, "second moment-ratio limit (lam1 >= 2*lam2)"),
        ),
        check="cp-bounded",
        build=lambda lam1=2.0, lam2=1.0: build(lam1, lam2),
        target=target,
        bound=lambda n, lam1=2.0, lam2=1.0: None,
        check_targets=lambda lam1=2.0, lam2=1.0: [lam1, lam2, 0.0],
    )


def quadratic_intensity(J: int) -> IntensityMeasure:
    """Intensity mu{j} = 1/j^2 truncated at J; the dropped mass is below 1/J
    and the analytic total is pi^2/6."""
    js = np.arange(1, J + 1, dtype=np.float64)
    weights = 1.0 / (js * js)
    return IntensityMeasure(
        weights, declared_total=math.pi**2 / 6.0, tail_bound=1.0 / J
    )


def dilog_target_law(slack_target: float) -> tuple[str, Pmf]:
    """Compound Poisson target with quadratic intensity, grid and truncation
    depth chosen so the law's total l1 uncertainty meets ``slack_target``."""
    M = 1 << 14
    while True:
        J = M // 2 - 1
        mu = quadratic_intensity(J)
        fold = cp_fold_bound(mu.weights, M)
        slack = 2.0 * fold + _eps_num(M, 8) + mu.tail_bound
        if slack <= slack_target or M >= (1 << _MAX_LOG2_M):
            break
        M <<= 1
    law = compound_poisson_spectral(mu, slack_target, min_M=M)
    return "CP(mu_j=1/j^2)", law


def _heavy_tail_preset():
    def target(tolerance):
        return dilog_target_law(5.0 * tolerance)

    return Preset(
        name="dilog",
        summary=(
            "nearly critical schedule 1-1/n with heavy-tail immigration "
            "P(j)=1/(n j(j+1)) (infinite mean each generation); the law "
            "approaches the compound Poisson with intensity mu{j}=1/j^2"
        ),
        kind="inar",
        params=(),
        check="cp-unbounded",
        build=lambda: ModelSpec(near_critical_rho(), heavy_tail_immigration(), name="dilog"),
        target=lambda tolerance: target(tolerance),
        bound=lambda n: None,
        check_targets=lambda: None,
    )


def _triangular_preset():
    def build(lam):
        return TriangularSpec(
            lambda n: [(dirac(1), min(1.0, lam / n))] * n, name="triangular-binomial"
        )

    return Preset(
        name="triangular-binomial",
        summary=(
            "row n holds n copies of a unit point mass thinned by lam/n "
            "(a Binomial(n, lam/n) row sum); rows approach Poisson(lam)"
        ),
        kind="triangular",
        params=(("lam", 1.0, "limit Poisson rate"),),
        check="triangular-poisson",
        build=lambda lam=1.0: build(lam),
        target=lambda tolerance, lam=1.0: (f"Po({lam:g})", poisson(lam, tolerance)),
        bound=lambda n, lam=1.0: lam * lam / n,
        check_targets=lambda lam=1.0: [lam],
    )


PRESETS = {
    p.name: p
    for p in (
        _bernoulli_poisson_preset(),
        _poisson_immigration_preset(),
        _bounded_cp_preset(),
        _heavy_tail_preset(),
        _triangular_preset(),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def preset_catalog() -> list[dict]:
    """Machine-readable catalog of the named presets."""
    return [
        {
            "name": p.name,
            "summary": p.summary,
            "kind": p.kind,
            "check": p.check,
            "params": [
                {"name": name, "default": default, "doc": doc}
                for name, default, doc in p.params
            ],
        }
        for p in PRESETS.values()
    ]
