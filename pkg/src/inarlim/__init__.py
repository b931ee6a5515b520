"""Exact distributions and limit diagnostics for nearly critical
integer-valued AR(1) processes with time-varying thinning and immigration.
"""

from .pmf import (
    FactorialMoment,
    GfValue,
    Pmf,
    TvInterval,
    canonicalize,
    convolve,
    factorial_moment,
    gf_eval,
    tv_distance,
)
from .laws import (
    IntensityMeasure,
    bernoulli,
    binomial_mixture,
    compound_poisson,
    dirac,
    poisson,
)
from .immigration import (
    bernoulli_immigration,
    explicit_immigration,
    heavy_tail_immigration,
    poisson_immigration,
)
from .inar import (
    ModelSpec,
    ToleranceError,
    TriangularSpec,
    brute_force_law,
    exact_law,
    gf_product,
    gf_recursive,
    mean,
    rho_product,
    triangular_law,
)
from .montecarlo import ReplicateStream, SimConfig, empirical_pmf, sample_path
from .schedules import constant_rho, explicit_rho, near_critical_rho
from ._backend import backend_name

__version__ = "0.1.0"

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
    "IntensityMeasure",
    "bernoulli",
    "binomial_mixture",
    "compound_poisson",
    "dirac",
    "poisson",
    "bernoulli_immigration",
    "poisson_immigration",
    "explicit_immigration",
    "heavy_tail_immigration",
    "ModelSpec",
    "TriangularSpec",
    "ToleranceError",
    "exact_law",
    "brute_force_law",
    "gf_product",
    "gf_recursive",
    "mean",
    "rho_product",
    "triangular_law",
    "SimConfig",
    "ReplicateStream",
    "empirical_pmf",
    "sample_path",
    "near_critical_rho",
    "constant_rho",
    "explicit_rho",
    "backend_name",
    "__version__",
]
