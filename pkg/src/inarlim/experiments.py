"""Config-driven experiment runner behind the command-line interface."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .inar import ModelSpec, TriangularSpec, exact_law, triangular_law
from .immigration import explicit_immigration
from .laws import poisson
from .limits import check_hypotheses, check_triangular
from .montecarlo import SimConfig, empirical_pmf
from .pmf import canonicalize, tv_distance
from .presets import get_preset
from .schedules import explicit_rho

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ReportRow",
    "ConvergenceReport",
    "parse_config",
    "run",
]

EXPERIMENTS = ("exact", "simulate", "limit-check", "bounds-sweep", "convergence")
CSV_HEADER = "n,tv,tv_lo,tv_hi,target,bound,wallclock_ms"
_MAX_EXPLICIT = 1_000_000


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n_list: tuple[int, ...]
    tolerance: float
    preset_name: str | None
    preset_params: dict
    explicit_model: object | None
    mc: SimConfig | None
    output_path: str | None
    output_format: str
    grid: str = "fine"

    def build_model(self):
        if self.explicit_model is not None:
            return self.explicit_model, None
        preset = get_preset(self.preset_name)
        params = preset.resolve_params(self.preset_params)
        return preset.build(**params), preset


@dataclass(frozen=True)
class ReportRow:
    n: int
    tv: float
    tv_lo: float
    tv_hi: float
    target: str
    bound: float | None
    wallclock_ms: float


@dataclass(frozen=True)
class ConvergenceReport:
    experiment: str
    model: str
    rows: tuple[ReportRow, ...]

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            bound = "" if r.bound is None else repr(r.bound)
            lines.append(
                f"{r.n},{r.tv!r},{r.tv_lo!r},{r.tv_hi!r},{r.target},{bound},{r.wallclock_ms!r}"
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "model": self.model,
            "rows": [
                {
                    "n": r.n,
                    "tv": r.tv,
                    "tv_lo": r.tv_lo,
                    "tv_hi": r.tv_hi,
                    "target": r.target,
                    "bound": r.bound,
                    "wallclock_ms": r.wallclock_ms,
                }
                for r in self.rows
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConvergenceReport":
        rows = tuple(
            ReportRow(
                n=int(r["n"]),
                tv=float(r["tv"]),
                tv_lo=float(r["tv_lo"]),
                tv_hi=float(r["tv_hi"]),
                target=str(r["target"]),
                bound=None if r["bound"] is None else float(r["bound"]),
                wallclock_ms=float(r["wallclock_ms"]),
            )
            for r in data["rows"]
        )
        return cls(str(data["experiment"]), str(data["model"]), rows)


def _parse_explicit_model(spec: dict):
    rho_vals = spec.get("rho")
    imm = spec.get("immigration")
    if rho_vals is None or imm is None:
        raise ConfigError("explicit models need 'rho' and 'immigration' arrays")
    if len(rho_vals) > _MAX_EXPLICIT or len(imm) > _MAX_EXPLICIT:
        raise ConfigError(f"explicit schedules capped at {_MAX_EXPLICIT} entries")
    if len(imm) != len(rho_vals):
        raise ConfigError("'rho' and 'immigration' must have equal length")
    try:
        laws = {i + 1: canonicalize(arr, 0.0) for i, arr in enumerate(imm)}
        rho = explicit_rho(np.asarray(rho_vals, dtype=np.float64))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"malformed explicit model: {exc}") from exc
    return ModelSpec(rho, explicit_immigration(lambda n: laws[n]), name="explicit")


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    experiment = data.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {experiment!r}")
    n_list = data.get("n_list", [])
    if (
        not isinstance(n_list, (list, tuple))
        or not n_list
        or any(int(n) != n or n < 1 for n in n_list)
        or list(n_list) != sorted(set(int(n) for n in n_list))
    ):
        raise ConfigError("n_list must be a non-empty strictly increasing list of horizons")
    tolerance = float(data.get("tolerance", 1e-9))
    if not 0.0 < tolerance <= 1e-6:
        raise ConfigError("tolerance must lie in (0, 1e-6]")
    model = data.get("model", {})
    preset_name = None
    preset_params = {}
    explicit = None
    if "preset" in model:
        preset_name = model["preset"]
        preset_params = model.get("params", {})
        try:
            preset = get_preset(preset_name)
            preset.resolve_params(preset_params)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    elif experiment not in ("bounds-sweep",):
        explicit = _parse_explicit_model(model)
    mc = None
    if "mc" in data:
        mc_spec = data["mc"]
        try:
            mc = SimConfig(
                replicates=int(mc_spec.get("replicates", 10_000)),
                horizon=int(max(n_list)),
                seed=int(mc_spec.get("seed", 0)),
                worker_hint=mc_spec.get("worker_hint"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed mc block: {exc}") from exc
    elif experiment == "simulate":
        raise ConfigError("simulate experiments need an 'mc' block")
    output = data.get("output", {})
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output format must be 'csv' or 'json'")
    grid = data.get("grid", "fine")
    if grid not in ("coarse", "fine"):
        raise ConfigError("grid must be 'coarse' or 'fine'")
    return ExperimentConfig(
        experiment=experiment,
        n_list=tuple(int(n) for n in n_list),
        tolerance=tolerance,
        preset_name=preset_name,
        preset_params=preset_params,
        explicit_model=explicit,
        mc=mc,
        output_path=output.get("path"),
        output_format=fmt,
        grid=grid,
    )


def _law_at(model, n, tolerance):
    if isinstance(model, TriangularSpec):
        return triangular_law(model, n, tolerance)
    return exact_law(model, n, tolerance)


def run(config: ExperimentConfig):
    """Dispatch one experiment; returns the report object."""
    if config.experiment == "bounds-sweep":
        from .bounds import run_sweeps

        return run_sweeps(config.grid)
    model, preset = config.build_model()
    name = getattr(model, "name", "model")
    if config.experiment == "exact":
        laws = {n: _law_at(model, n, config.tolerance) for n in config.n_list}
        return {
            "model": name,
            "laws": {
                n: {
                    "probs": law.probs.tolist(),
                    "tail_mass": law.tail_mass,
                    "l1_slack": law.l1_slack,
                }
                for n, law in laws.items()
            },
        }
    if config.experiment == "limit-check":
        if preset is None:
            raise ConfigError("limit checks need a preset model (declared targets)")
        params = preset.resolve_params(config.preset_params)
        targets = preset.check_targets(**params)
        if isinstance(model, TriangularSpec):
            report = check_triangular(model, preset.check, config.n_list, targets)
        else:
            report = check_hypotheses(model, preset.check, config.n_list, targets)
        return report
    if config.experiment == "convergence":
        if preset is None:
            target_desc, target = "Po(1)", poisson(1.0, config.tolerance)
        else:
            params = preset.resolve_params(config.preset_params)
            target_desc, target = preset.target(config.tolerance, **params)
        rows = []
        for n in config.n_list:
            t0 = time.perf_counter()
            law = _law_at(model, n, config.tolerance)
            iv = tv_distance(law, target)
            ms = (time.perf_counter() - t0) * 1000.0
            bound = None
            if preset is not None:
                params = preset.resolve_params(config.preset_params)
                bound = preset.bound(n, **params)
            rows.append(ReportRow(n, iv.estimate, iv.lo, iv.hi, target_desc, bound, ms))
        return ConvergenceReport("convergence", name, tuple(rows))
    if config.experiment == "simulate":
        rows = []
        for n in config.n_list:
            t0 = time.perf_counter()
            sim = SimConfig(config.mc.replicates, n, config.mc.seed, config.mc.worker_hint)
            emp, _ = empirical_pmf(model, sim)
            law = _law_at(model, n, config.tolerance)
            iv = tv_distance(emp, law)
            ms = (time.perf_counter() - t0) * 1000.0
            rows.append(ReportRow(n, iv.estimate, iv.lo, iv.hi, "exact-law", None, ms))
        return ConvergenceReport("simulate", name, tuple(rows))
    raise ConfigError(f"unhandled experiment {config.experiment!r}")
