"""Command-line interface.

Exit codes: 0 success, 2 configuration problems, 3 numeric failures
(tolerance budgets exceeded, inequality violations).
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from ._backend import backend_name
from .experiments import ConfigError, ConvergenceReport, parse_config, run
from .inar import ToleranceError
from .limits import BracketNotConverged, ConditionReport
from .presets import preset_catalog

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _resolve_output(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    if not p.is_absolute():
        base = os.environ.get("INARLIM_OUTPUT_DIR")
        if base:
            p = Path(base) / p
    return p


def _emit(text: str, path: Path | None):
    if path is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        click.echo(f"wrote {path}")


@click.group()
@click.version_option(__version__)
def main():
    """Exact laws and limit diagnostics for nearly critical integer-valued
    autoregressive models."""


@main.command("run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--output", default=None, help="output file (else stdout)")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None)
@click.option("--seed", type=int, default=None, help="override the mc seed")
@click.option("--tolerance", type=float, default=None, help="override the tolerance")
def run_cmd(config_path, output, fmt, seed, tolerance):
    """Run the experiment described by a JSON config file."""
    try:
        data = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if seed is not None:
        data.setdefault("mc", {})["seed"] = seed
    if tolerance is not None:
        data["tolerance"] = tolerance
    try:
        config = parse_config(data)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    fmt = fmt or config.output_format
    out_path = _resolve_output(output or config.output_path)
    try:
        result = run(config)
    except (ToleranceError, BracketNotConverged) as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        sys.exit(EXIT_NUMERIC)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if isinstance(result, ConvergenceReport):
        text = result.to_csv() if fmt == "csv" else json.dumps(result.to_dict(), indent=2)
        _emit(text, out_path)
    elif isinstance(result, ConditionReport):
        _emit(json.dumps(result.to_dict(), indent=2), out_path)
    elif isinstance(result, list):  # bound checks
        failures = [c for c in result if not c.passed]
        if fmt == "json":
            payload = [
                {
                    "name": c.name,
                    "lhs": c.lhs,
                    "rhs": c.rhs,
                    "margin": c.margin,
                    "inputs": c.inputs,
                    "pass": c.passed,
                }
                for c in result
            ]
            _emit(json.dumps(payload, indent=2), out_path)
        else:
            _emit("\n".join(str(c) for c in result) + "\n", out_path)
        if failures:
            click.echo(f"{len(failures)} bound violations", err=True)
            sys.exit(EXIT_NUMERIC)
    else:
        _emit(json.dumps(result, indent=2), out_path)


@main.command("presets")
def presets_cmd():
    """Print the machine-readable preset catalog."""
    click.echo(json.dumps(preset_catalog(), indent=2))


@main.command("verify-bounds")
@click.option("--grid", type=click.Choice(["coarse", "fine"]), default="coarse")
def verify_bounds_cmd(grid):
    """Sweep every closed-form inequality and report PASS/FAIL lines."""
    from .bounds import run_sweeps

    checks = run_sweeps(grid)
    by_name: dict[str, list] = {}
    for c in checks:
        by_name.setdefault(c.name, []).append(c)
    failures = 0
    for name, group in by_name.items():
        bad = [c for c in group if not c.passed]
        failures += len(bad)
        worst = min(c.margin for c in group)
        status = "PASS" if not bad else "FAIL"
        click.echo(f"[{status}] {name}: {len(group)} checks, worst margin {worst:.3e}")
        for c in bad[:3]:
            click.echo(f"    {c}")
    if failures:
        click.echo(f"{failures} violations", err=True)
        sys.exit(EXIT_NUMERIC)


@main.command("selftest")
def selftest_cmd():
    """Quick internal consistency run (seconds, not the full test suite)."""
    from .immigration import explicit_immigration
    from .inar import ModelSpec, brute_force_law, exact_law
    from .pmf import Pmf, tv_distance
    from .schedules import near_critical_rho

    click.echo(f"backend: {backend_name()}")
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        size = int(rng.integers(1, 5))
        raw = rng.random(size) + 1e-3
        law = Pmf(raw / raw.sum())
        model = ModelSpec(
            near_critical_rho(c=float(rng.uniform(0.2, 1.0))),
            explicit_immigration(law),
        )
        n = int(rng.integers(1, 9))
        worst = max(worst, float(tv_distance(exact_law(model, n), brute_force_law(model, n))))
    click.echo(f"exact-law vs dynamic-program oracle, 10 random models: worst tv {worst:.2e}")
    if worst > 1e-10:
        click.echo("selftest failed", err=True)
        sys.exit(EXIT_NUMERIC)
    from .bounds import be_po_bound

    checks = [be_po_bound(p) for p in np.linspace(0, 1, 11)]
    if not all(c.passed for c in checks):
        click.echo("selftest failed (bounds)", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo("bernoulli-vs-poisson bound grid: pass")
    click.echo("selftest ok")


if __name__ == "__main__":
    main()
