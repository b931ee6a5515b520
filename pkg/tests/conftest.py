import numpy as np
import pytest

from inarlim.pmf import Pmf, canonicalize


def random_pmf(rng, max_support=8, allow_tail=False):
    """Random canonical Pmf with small support (optionally a small tail)."""
    size = rng.integers(1, max_support + 1)
    raw = rng.random(size) + 1e-3
    tail = float(rng.random() * 1e-3) if allow_tail and rng.random() < 0.5 else 0.0
    raw = raw / raw.sum() * (1.0 - tail)
    probs = np.asarray(raw, dtype=np.float64)
    return Pmf(probs, tail)


def random_model(rng, max_support=5):
    """Random schedule plus explicit immigration laws, horizon up to 64."""
    from inarlim.immigration import explicit_immigration
    from inarlim.inar import ModelSpec
    from inarlim.schedules import explicit_rho

    rho_vals = rng.random(64) * rng.random()
    laws = {}

    def law(n):
        if n not in laws:
            sub = np.random.default_rng(rng.integers(2**32) + n)
            laws[n] = random_pmf(sub, max_support=max_support)
        return laws[n]

    return ModelSpec(
        rho=explicit_rho(rho_vals),
        immigration=explicit_immigration(law),
        name="random",
    )


def disk_grid(n_radii=7, n_angles=7):
    """Points of the closed unit disk: n_radii radii x n_angles directions."""
    pts = []
    for i in range(n_radii):
        r = i / (n_radii - 1)
        for j in range(n_angles):
            theta = 2.0 * np.pi * j / n_angles
            pts.append(r * np.exp(1j * theta))
    return pts


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
