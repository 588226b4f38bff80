import json
import math
import os

import numpy as np
import pytest

from rwm_lab import ConfigError, VerifyReport, fit_report, run_sweep, verify_analytics
from rwm_lab.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    SweepResult,
    _read_csv_rows,
    resolve_workers,
    spec_content_id,
)


def base_config(**overrides):
    doc = {
        "experiment_id": "unit",
        "target": {"kind": "gaussian"},
        "increments": [{"family": "gaussian_iso", "l": 2.38, "gamma": 0.5}],
        "dims": [4, 8],
        "steps_rule": {"c": 50.0, "beta": 0.0},
        "seeds": {"count": 3, "master_seed": 7},
        "tracked_coords": 1,
        "diagnostics": ["accept_rate", "esjd"],
    }
    doc.update(overrides)
    return doc


class TestConfigValidation:
    def test_valid_config_parses(self):
        cfg = ExperimentConfig.from_dict(base_config())
        assert cfg.dims == (4, 8)
        assert cfg.steps_for(4) == 50

    def test_empty_dims_names_field(self):
        with pytest.raises(ConfigError, match="dims"):
            ExperimentConfig.from_dict(base_config(dims=[]))

    def test_non_increasing_dims(self):
        with pytest.raises(ConfigError, match="strictly increasing"):
            ExperimentConfig.from_dict(base_config(dims=[8, 8]))

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown top-level"):
            ExperimentConfig.from_dict(base_config(stepz_rule={"c": 1.0}))

    def test_unknown_diagnostic_names_valid_set(self):
        with pytest.raises(ConfigError, match="iact_z_bounded"):
            ExperimentConfig.from_dict(base_config(diagnostics=["iact_z"]))

    def test_all_violations_listed_at_once(self):
        doc = base_config(
            dims=[],
            diagnostics=["nope"],
            seeds={"count": 0, "master_seed": 1},
            extra_key=1,
        )
        with pytest.raises(ConfigError) as exc:
            ExperimentConfig.from_dict(doc)
        assert len(exc.value.errors) >= 4

    def test_steps_rule_below_one(self):
        with pytest.raises(ConfigError, match="below 1"):
            ExperimentConfig.from_dict(base_config(steps_rule={"c": 0.01, "beta": 0.0}))

    def test_diagnostic_step_requirements(self):
        doc = base_config(diagnostics=["z_oscillation_5d2"])
        with pytest.raises(ConfigError, match="z_oscillation_5d2"):
            ExperimentConfig.from_dict(doc)

    def test_stride_requirement(self):
        doc = base_config(
            diagnostics=["iact_coord_bounded"],
            record_stride=2,
            steps_rule={"c": 2000.0, "beta": 0.0},
        )
        with pytest.raises(ConfigError, match="record_stride"):
            ExperimentConfig.from_dict(doc)

    def test_student_target_requires_nu(self):
        with pytest.raises(ConfigError, match="nu"):
            ExperimentConfig.from_dict(base_config(target={"kind": "student_t"}))

    def test_increment_errors_indexed(self):
        doc = base_config(increments=[{"family": "stable_iso", "l": 1.0, "alpha": 3.0}])
        with pytest.raises(ConfigError, match=r"increments\[0\]"):
            ExperimentConfig.from_dict(doc)

    def test_tracked_exceeding_smallest_dim(self):
        with pytest.raises(ConfigError, match="tracked_coords"):
            ExperimentConfig.from_dict(base_config(tracked_coords=5))

    def test_from_file_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            ExperimentConfig.from_file(p)


class TestRunSweep:
    def test_combinatorics_and_files(self, tmp_path):
        cfg = ExperimentConfig.from_dict(base_config())
        res = run_sweep(cfg, out_dir=tmp_path / "out")
        assert len(res.summaries) == 2 * 1 * 3
        assert len(res.rows) == 6 * 2  # two diagnostics per chain
        assert res.n_failed == 0
        assert (tmp_path / "out" / "manifest.json").exists()
        header = (tmp_path / "out" / "diagnostics.csv").read_text().splitlines()[0]
        assert header == ",".join(CSV_COLUMNS)

    def test_rerun_reproduces_bytes(self, tmp_path):
        cfg = ExperimentConfig.from_dict(base_config())
        a = run_sweep(cfg, out_dir=tmp_path / "a")
        b = run_sweep(cfg, out_dir=tmp_path / "b")
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
        assert a.jsonl_path.read_bytes() == b.jsonl_path.read_bytes()
        assert a.manifest["config_hash"] == b.manifest["config_hash"]

    def test_adding_dim_keeps_existing_streams(self, tmp_path):
        small = run_sweep(ExperimentConfig.from_dict(base_config()), out_dir=tmp_path / "s")
        grown = run_sweep(
            ExperimentConfig.from_dict(base_config(dims=[4, 8, 16])), out_dir=tmp_path / "g"
        )
        key = lambda r: (r["d"], r["seed"], r["diagnostic_name"])
        small_map = {key(r): r["value"] for r in small.rows}
        grown_map = {key(r): r["value"] for r in grown.rows if r["d"] in (4, 8)}
        assert small_map == grown_map

    def test_chain_failure_contained(self, tmp_path, monkeypatch):
        import rwm_lab.harness as hmod

        real = hmod.run_chain
        calls = {"n": 0}

        def failing(*args, **kw):
            calls["n"] += 1
            if calls["n"] == 1:
                raise RuntimeError("injected fault")
            return real(*args, **kw)

        monkeypatch.setattr(hmod, "run_chain", failing)
        cfg = ExperimentConfig.from_dict(base_config())
        res = run_sweep(cfg, out_dir=tmp_path / "f", workers=1)
        assert res.n_failed == 1
        statuses = {s["status"] for s in res.summaries}
        assert statuses == {"ok", "failed"}
        failed = [s for s in res.summaries if s["status"] == "failed"]
        assert "injected fault" in failed[0]["error"]
        failed_rows = [r for r in res.rows if r["diagnostic_name"] == "chain_failed"]
        assert len(failed_rows) == 1
        assert math.isnan(failed_rows[0]["value"])
        ok_rows = [r for r in res.rows if r["diagnostic_name"] == "accept_rate"]
        assert len(ok_rows) == 5

    def test_trajectory_persistence(self, tmp_path):
        cfg = ExperimentConfig.from_dict(base_config(save_trajectories=True))
        res = run_sweep(cfg, out_dir=tmp_path / "t")
        files = sorted((tmp_path / "t" / "trajectories").glob("*.jsonl"))
        assert len(files) == len(res.summaries)
        first = json.loads(files[0].read_text().splitlines()[0])
        assert first["m"] == 0

    def test_csv_roundtrip(self, tmp_path):
        cfg = ExperimentConfig.from_dict(base_config())
        res = run_sweep(cfg, out_dir=tmp_path / "rt")
        rows = _read_csv_rows(res.csv_path)
        assert len(rows) == len(res.rows)
        assert rows[0]["d"] == res.rows[0]["d"]
        assert rows[0]["value"] == pytest.approx(res.rows[0]["value"])


class TestWorkers:
    def test_env_overrides_cli_and_config(self, monkeypatch):
        cfg = ExperimentConfig.from_dict(base_config(workers=2))
        monkeypatch.setenv("RWM_LAB_THREADS", "5")
        assert resolve_workers(cfg, cli_workers=3) == 5
        monkeypatch.delenv("RWM_LAB_THREADS")
        assert resolve_workers(cfg, cli_workers=3) == 3
        assert resolve_workers(cfg) == 2

    def test_process_pool_path(self, tmp_path):
        cfg = ExperimentConfig.from_dict(base_config())
        res = run_sweep(cfg, out_dir=tmp_path / "pool", workers=2)
        assert res.n_failed == 0
        serial = run_sweep(cfg, out_dir=tmp_path / "serial", workers=1)
        assert serial.csv_path.read_bytes() == res.csv_path.read_bytes()


def synthetic_sweep(cost_fn, diagnostic="iact_coord_bounded", n_seeds=10):
    rows = []
    for d in (8, 16, 32, 64):
        for seed in range(n_seeds):
            rows.append(
                {
                    "experiment_id": "synth",
                    "d": d,
                    "target_kind": "gaussian",
                    "nu": None,
                    "family": "gaussian_iso",
                    "l": 2.38,
                    "gamma": 0.5,
                    "seed": seed,
                    "n_steps": 1000,
                    "diagnostic_name": diagnostic,
                    "value": cost_fn(d),
                }
            )
    return SweepResult(
        manifest={},
        rows=rows,
        summaries=[],
        out_dir=None,
        csv_path=None,
        jsonl_path=None,
        n_failed=0,
    )


class TestFitReport:
    def test_synthetic_linear_cost(self):
        rep = fit_report(synthetic_sweep(lambda d: float(d)), cost_proxy="iact")
        assert len(rep.cells) == 1
        assert rep.cells[0].fit.slope == pytest.approx(1.0, abs=1e-12)
        assert "gaussian" in rep.to_text_table()

    def test_synthetic_quadratic_cost(self):
        rep = fit_report(synthetic_sweep(lambda d: 3.0 * d * d), cost_proxy="iact")
        assert rep.cells[0].fit.slope == pytest.approx(2.0, abs=1e-12)

    def test_missing_diagnostic_names_cell(self):
        sweep = synthetic_sweep(lambda d: float(d), diagnostic="esjd")
        with pytest.raises(ValueError, match="iact_coord_bounded"):
            fit_report(sweep, cost_proxy="iact")

    def test_unknown_proxy(self):
        with pytest.raises(ValueError, match="proxy"):
            fit_report(synthetic_sweep(lambda d: float(d)), cost_proxy="wallclock")

    def test_json_and_csv_render(self):
        rep = fit_report(synthetic_sweep(lambda d: float(d)), cost_proxy="iact")
        doc = rep.to_json_dict()
        assert doc["cells"][0]["slope"] == pytest.approx(1.0)
        assert doc["cells"][0]["points"][0][0] == 8.0
        assert rep.to_csv().startswith("target_kind,")

    def test_from_directory(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            base_config(
                dims=[4, 8, 16, 32],
                steps_rule={"c": 1500.0, "beta": 0.0},
                diagnostics=["iact_coord_bounded"],
                seeds={"count": 2, "master_seed": 3},
            )
        )
        run_sweep(cfg, out_dir=tmp_path / "dirfit")
        rep = fit_report(tmp_path / "dirfit", cost_proxy="iact")
        assert len(rep.cells) == 1
        assert np.isfinite(rep.cells[0].fit.slope)

    def test_threshold_proxy_end_to_end(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            base_config(
                dims=[4, 8, 16, 32],
                steps_rule={"c": 4000.0, "beta": 0.0},
                diagnostics=["threshold_m_coord"],
                seeds={"count": 3, "master_seed": 5},
            )
        )
        res = run_sweep(cfg, out_dir=tmp_path / "thr")
        rep = fit_report(res, cost_proxy="threshold")
        cell = rep.cells[0]
        assert cell.diagnostic == "threshold_m_coord"
        assert np.isfinite(cell.fit.slope)
        vals = [r["value"] for r in res.rows if r["diagnostic_name"] == "threshold_m_coord"]
        assert all(v >= 1.0 for v in vals)


class TestVerify:
    def test_default_profile_all_pass(self, verify_report_default):
        assert verify_report_default.all_passed
        assert len(verify_report_default.checks) >= 50

    def test_zero_profile_reports_failures_without_crash(self):
        rep = verify_analytics("zero")
        assert not rep.all_passed
        assert len(rep.failed()) > 20

    def test_unknown_profile(self):
        with pytest.raises(ValueError):
            verify_analytics("lenient")

    def test_report_roundtrip(self, verify_report_default):
        rt = VerifyReport.from_json(verify_report_default.to_json())
        assert rt.to_dict() == verify_report_default.to_dict()

    def test_spec_id_is_content_hash(self):
        a = spec_content_id({"kind": "gaussian"}, {"family": "gaussian_iso", "l": 2.38})
        b = spec_content_id({"kind": "gaussian"}, {"family": "gaussian_iso", "l": 2.38})
        c = spec_content_id({"kind": "gaussian"}, {"family": "gaussian_iso", "l": 2.39})
        assert a == b != c


class TestCli:
    def test_version(self, capsys):
        from rwm_lab import __version__
        from rwm_lab.cli import main

        assert main(["version"]) == 0
        assert capsys.readouterr().out.strip() == __version__

    def test_run_end_to_end(self, tmp_path, capsys):
        from rwm_lab.cli import main

        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(base_config()))
        code = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
        assert code == 0
        assert (tmp_path / "out" / "diagnostics.csv").exists()

    def test_run_validation_exit_code(self, tmp_path, capsys):
        from rwm_lab.cli import main

        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(base_config(dims=[])))
        assert main(["run", "--config", str(cfg_path)]) == 1
        assert "dims" in capsys.readouterr().err

    def test_run_missing_config(self):
        from rwm_lab.cli import main

        assert main(["run", "--config", "/nonexistent/cfg.json"]) == 1

    def test_fit_cli(self, tmp_path, capsys):
        from rwm_lab.cli import main

        cfg = ExperimentConfig.from_dict(
            base_config(
                dims=[4, 8, 16, 32],
                steps_rule={"c": 1500.0, "beta": 0.0},
                diagnostics=["iact_coord_bounded"],
                seeds={"count": 2, "master_seed": 3},
            )
        )
        run_sweep(cfg, out_dir=tmp_path / "sweep")
        json_out = tmp_path / "fits.json"
        code = main(
            ["fit", "--sweep", str(tmp_path / "sweep"), "--proxy", "iact",
             "--json", str(json_out), "--csv", str(tmp_path / "fits.csv")]
        )
        assert code == 0
        doc = json.loads(json_out.read_text())
        assert doc["proxy"] == "iact"
        assert (tmp_path / "fits.csv").read_text().count("\n") >= 2

    def test_fit_missing_sweep(self):
        from rwm_lab.cli import main

        assert main(["fit", "--sweep", "/nonexistent"]) == 1

    def test_verify_cli_writes_report(self, tmp_path, capsys):
        from rwm_lab.cli import main

        out = tmp_path / "report.json"
        code = main(["verify", "--json", str(out)])
        captured = capsys.readouterr().out
        assert code == 0
        assert "checks, 0 failed" in captured
        rep = VerifyReport.from_json(out.read_text())
        assert rep.all_passed

    def test_verify_cli_zero_profile_exit_code(self, tmp_path):
        from rwm_lab.cli import main

        assert main(["verify", "--profile", "zero"]) == 3
