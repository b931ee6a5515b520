import json

import numpy as np
import pytest
from click.testing import CliRunner

from inarlim.cli import main
from inarlim.experiments import (
    ConfigError,
    ConvergenceReport,
    CSV_HEADER,
    parse_config,
    run,
)


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


BASE = {
    "model": {"preset": "thm31", "params": {"lam": 1.0}},
    "experiment": "convergence",
    "n_list": [10, 50],
    "tolerance": 1e-9,
}


class TestParseConfig:
    def test_minimal(self):
        cfg = parse_config(BASE)
        assert cfg.preset_name == "thm31"
        assert cfg.n_list == (10, 50)

    def test_rejects_empty_n_list(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "n_list": []})

    def test_rejects_unsorted_n_list(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "n_list": [50, 10]})

    def test_rejects_duplicate_horizons(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "n_list": [10, 10]})

    def test_rejects_bad_tolerance(self):
        for tol in (0.0, -1e-9, 1e-5):
            with pytest.raises(ConfigError):
                parse_config({**BASE, "tolerance": tol})

    def test_rejects_unknown_preset(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "model": {"preset": "nope"}})

    def test_rejects_unknown_param(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "model": {"preset": "thm31", "params": {"zap": 1}}})

    def test_explicit_model(self):
        cfg = parse_config(
            {
                "model": {
                    "rho": [0.0, 0.5, 0.9],
                    "immigration": [[0.5, 0.5], [1.0], [0.25, 0.75]],
                },
                "experiment": "exact",
                "n_list": [1, 3],
                "tolerance": 1e-9,
            }
        )
        model, preset = cfg.build_model()
        assert preset is None
        assert model.rho(2) == 0.5

    def test_simulate_requires_mc(self):
        with pytest.raises(ConfigError):
            parse_config({**BASE, "experiment": "simulate"})


class TestRun:
    def test_convergence_rows_ordered(self):
        report = run(parse_config(BASE))
        assert [r.n for r in report.rows] == [10, 50]
        for r in report.rows:
            assert 0.0 <= r.tv <= 1.0
            assert r.tv_lo <= r.tv <= r.tv_hi

    def test_report_round_trip(self):
        report = run(parse_config(BASE))
        back = ConvergenceReport.from_dict(json.loads(json.dumps(report.to_dict())))
        assert back == report

    def test_csv_schema(self):
        report = run(parse_config(BASE))
        lines = report.to_csv().strip().split("\n")
        assert lines[0] == CSV_HEADER == "n,tv,tv_lo,tv_hi,target,bound,wallclock_ms"
        assert len(lines) == 3

    def test_simulate(self):
        cfg = parse_config(
            {**BASE, "experiment": "simulate", "n_list": [20], "mc": {"replicates": 2000, "seed": 3}}
        )
        report = run(cfg)
        assert report.rows[0].target == "exact-law"
        assert report.rows[0].tv < 0.2

    def test_limit_check(self):
        cfg = parse_config({**BASE, "experiment": "limit-check", "n_list": [100, 1000, 10000]})
        report = run(cfg)
        assert report.verdict("moment-ratio-1") == "consistent"

    def test_exact_dump(self):
        cfg = parse_config({**BASE, "experiment": "exact", "n_list": [3]})
        out = run(cfg)
        assert abs(sum(out["laws"][3]["probs"]) + out["laws"][3]["tail_mass"] - 1) < 1e-9


class TestCliCommands:
    def test_run_csv_stdout(self, tmp_path):
        path = write_config(tmp_path, BASE)
        result = CliRunner().invoke(main, ["run", path])
        assert result.exit_code == 0, result.output
        assert result.output.splitlines()[0] == CSV_HEADER

    def test_run_json_output_file(self, tmp_path):
        path = write_config(tmp_path, BASE)
        out = tmp_path / "report.json"
        result = CliRunner().invoke(main, ["run", path, "--format", "json", "--output", str(out)])
        assert result.exit_code == 0, result.output
        data = json.loads(out.read_text())
        assert data["experiment"] == "convergence"

    def test_output_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("INARLIM_OUTPUT_DIR", str(tmp_path / "reports"))
        path = write_config(tmp_path, BASE)
        result = CliRunner().invoke(main, ["run", path, "--output", "r.csv"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / "reports" / "r.csv").exists()

    def test_config_error_exit_code(self, tmp_path):
        path = write_config(tmp_path, {**BASE, "n_list": []})
        result = CliRunner().invoke(main, ["run", path])
        assert result.exit_code == 2

    def test_malformed_json_exit_code(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{nope")
        result = CliRunner().invoke(main, ["run", str(path)])
        assert result.exit_code == 2

    def test_numeric_failure_exit_code(self, tmp_path):
        # A tolerance no spectral grid can meet: exit code 3, not success.
        cfg = {
            "model": {"preset": "dilog"},
            "experiment": "convergence",
            "n_list": [5],
            "tolerance": 1e-10,
        }
        path = write_config(tmp_path, cfg)
        result = CliRunner().invoke(main, ["run", path])
        assert result.exit_code == 3

    def test_seed_and_tolerance_overrides(self, tmp_path):
        cfg = {**BASE, "experiment": "simulate", "n_list": [15], "mc": {"replicates": 500, "seed": 1}}
        path = write_config(tmp_path, cfg)
        a = CliRunner().invoke(main, ["run", path, "--seed", "7", "--format", "json"])
        b = CliRunner().invoke(main, ["run", path, "--seed", "7", "--format", "json"])
        assert a.exit_code == b.exit_code == 0

        def strip_clock(out):
            data = json.loads(out)
            for row in data["rows"]:
                row.pop("wallclock_ms")
            return data

        assert strip_clock(a.output) == strip_clock(b.output)

    def test_presets_catalog(self):
        result = CliRunner().invoke(main, ["presets"])
        assert result.exit_code == 0
        names = {p["name"] for p in json.loads(result.output)}
        assert {"thm31", "thm41", "thm51-bounded", "dilog", "triangular-binomial"} <= names

    def test_verify_bounds(self):
        result = CliRunner().invoke(main, ["verify-bounds", "--grid", "coarse"])
        assert result.exit_code == 0, result.output
        assert "PASS" in result.output
        assert "FAIL" not in result.output

    def test_selftest(self):
        result = CliRunner().invoke(main, ["selftest"])
        assert result.exit_code == 0, result.output
        assert "selftest ok" in result.output

    def test_dilog_preset_example_value(self):
        # The heavy-tail immigration law at generation 10 puts 1/20 on 1.
        from inarlim.presets import get_preset

        model = get_preset("dilog").build()
        law = model.immigration.pmf(10, 1e-4)
        assert law.p(1) == pytest.approx(0.05)
