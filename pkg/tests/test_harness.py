import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from empcop.copulas import GaussianCopula, parse_model
from empcop.empirical import sup_remainder
from empcop.grid import Grid
from empcop.harness import (
    ExperimentConfig,
    ExperimentRefused,
    build_config,
    emit_report,
    rate_factor,
    read_config_file,
    run_experiment,
)
from empcop.harness.cli import main
from empcop.harness.config import OUT_ENV, Thresholds, default_out_dir
from empcop.harness.experiments import ExperimentReport
from empcop.harness.seeds import replicate_rng, seed_sequence, stream_tag


def small(experiment, tmp_path, **kw):
    return build_config(experiment, overrides={"out": str(tmp_path / experiment), **kw})


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestConfig:
    def test_defaults(self):
        cfg = build_config("rate")
        assert cfg.n == (100, 400, 1600, 6400) and cfg.reps == 200 and cfg.grid == 41
        assert build_config("multiplier").grid == 21
        assert build_config("limit-compare").n == (2000,)

    def test_file_then_overrides(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# comment\nmodel = family=clayton,theta=1\nn = 50, 100\nreps=7\nks-max = 0.2\n")
        cfg = build_config("rate", read_config_file(p), {"reps": 9, "grid": None})
        assert cfg.model == "family=clayton,theta=1"
        assert cfg.n == (50, 100) and cfg.reps == 9 and cfg.grid == 41
        assert cfg.thresholds.ks_max == 0.2

    def test_errors(self, tmp_path):
        with pytest.raises(ValueError):
            build_config("rate", overrides={"colour": "red"})
        with pytest.raises(ValueError):
            ExperimentConfig("rate", n=(400, 100))
        with pytest.raises(ValueError):
            ExperimentConfig("rate", reps=0)
        with pytest.raises(ValueError):
            ExperimentConfig("nope")
        with pytest.raises(ValueError):
            ExperimentConfig("rate", functional="median")
        bad = tmp_path / "bad.cfg"
        bad.write_text("just words\n")
        with pytest.raises(ValueError):
            read_config_file(bad)

    def test_environment_sets_default_out(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUT_ENV, str(tmp_path))
        assert default_out_dir("rate") == str(tmp_path / "rate")
        assert ExperimentConfig("rate").out == str(tmp_path / "rate")

    def test_thresholds_echoed(self):
        d = ExperimentConfig("rate").to_dict()
        assert d["thresholds"] == {"slope_min": -0.4, "slope_max": -0.15, "ratio_max": 1.5, "ks_max": 0.1, "variance_se": 3.0}
        assert Thresholds().ks_max == 0.10


class TestSeeds:
    def test_sequence(self):
        assert seed_sequence(1, "rate", 100, 3) == [1, stream_tag("rate"), 100, 3]
        assert stream_tag("rate") != stream_tag("limit-data")

    def test_isolation(self):
        a = replicate_rng(5, "rate", 400, 17).uniform(size=3)
        b = replicate_rng(5, "rate", 400, 17).uniform(size=3)
        assert np.array_equal(a, b)


class TestRateExperiment:
    def test_replicate_reproducible_in_isolation(self, tmp_path):
        cfg = small("rate", tmp_path, n="50,100", reps=3, grid=11)
        report = run_experiment(cfg)
        header, rows = report.tables["rate_replicates"]
        n, r, seed, value = rows[4]
        model = parse_model(cfg.model)
        U = model.sample(n, np.random.default_rng([int(s) for s in seed.split(":")]))
        assert float(value) == sup_remainder(U, model, Grid.uniform(11))
        assert seed == ":".join(map(str, seed_sequence(cfg.seed, "rate", 100, 1)))

    def test_single_n_flags_insufficient_schedule(self, tmp_path):
        report = run_experiment(small("rate", tmp_path, n="100", reps=3, grid=11))
        assert report.verdicts["slope"]["status"] == "insufficient"
        assert any("insufficient-schedule" in note for note in report.notes)
        assert not report.failed

    def test_summary_and_plotdata(self, tmp_path):
        report = run_experiment(small("rate", tmp_path, n="50,100,200", reps=5, grid=11))
        paths = {p.name for p in emit_report(report)}
        assert {"report.json", "rate_summary.csv", "rate_plotdata.csv", "rate_replicates.csv"} <= paths
        rows = read_csv(tmp_path / "rate" / "rate_summary.csv")
        assert rows[0] == ["n", "median", "q25", "q75", "mean", "r_n", "q"]
        assert [int(r[0]) for r in rows[1:]] == [50, 100, 200]
        for r in rows[1:]:
            assert float(r[6]) == pytest.approx(float(r[1]) / float(rate_factor(int(r[0]))))
        plot = read_csv(tmp_path / "rate" / "rate_plotdata.csv")
        assert plot[0] == ["log_n", "log_median_remainder", "fitted"] and len(plot) == 4
        data = json.loads((tmp_path / "rate" / "report.json").read_text())
        assert data["verdicts"]["slope"]["threshold"] == [-0.4, -0.15]
        assert "slope_se" in data["fits"] and "wall_clock_seconds" in data

    def test_rate_factor(self):
        n = 1600.0
        assert rate_factor(n) == pytest.approx(n**-0.25 * np.sqrt(np.log(n)) * np.log(np.log(n)) ** 0.25)

    def test_warns_without_second_order_condition(self, tmp_path):
        with pytest.warns(UserWarning):
            run_experiment(small("rate", tmp_path, model="family=frechet_upper", n="50,100", reps=2, grid=11))


class TestMultiplierExperiment:
    def test_small_run(self, tmp_path):
        report = run_experiment(small("multiplier", tmp_path, n="200", reps=50, boot=50, grid=11, outer=2, functional="sup_abs,cvm"))
        assert set(report.verdicts) == {"ks_sup_abs_n200", "ks_cvm_n200"}
        ks_rows = report.tables["multiplier_ks"][1]
        assert len(ks_rows) == 4
        emit_report(report)
        q = read_csv(tmp_path / "multiplier" / "multiplier_quantiles.csv")
        assert q[0][-4:] == ["q0.5", "q0.9", "q0.95", "q0.99"]

    def test_single_bootstrap_flags_insufficient(self, tmp_path):
        report = run_experiment(small("multiplier", tmp_path, n="100", reps=20, boot=1, grid=6, outer=1))
        assert all(v["status"] == "insufficient" for v in report.verdicts.values())
        assert any("insufficient-B" in note for note in report.notes)


class TestLimitComparison:
    def test_refuses_without_first_order_condition(self, tmp_path):
        with pytest.raises(ExperimentRefused):
            run_experiment(small("limit-compare", tmp_path, model="family=frechet_upper", reps=10, grid=6))

    def test_forced_run_has_no_verdict(self, tmp_path):
        report = run_experiment(small("limit-compare", tmp_path, model="family=frechet_upper", n="100", reps=10, grid=6, force=True))
        assert all(v["status"] == "no-verdict" for v in report.verdicts.values())
        assert not report.failed and report.notes

    def test_small_run(self, tmp_path):
        report = run_experiment(small("limit-compare", tmp_path, model="family=gaussian,rho=0.5", n="300", reps=40, grid=9))
        assert set(report.verdicts) == {"ks_n300", "bridge_variance_n300"}
        row = report.summary[0]
        c = GaussianCopula(rho=0.5).cdf([0.5, 0.5])
        assert row["bridge_variance_target"] == pytest.approx(c * (1 - c))
        assert row["bridge_node"] == [0.5, 0.5]


class TestConditionsAndSample:
    @pytest.mark.parametrize("spec", ["family=gaussian,rho=0.5", "family=checkerboard"])
    def test_check_conditions(self, tmp_path, spec):
        report = run_experiment(small("check-conditions", tmp_path, model=spec))
        assert not report.failed
        assert "C2.1_matches_declaration" in report.verdicts

    def test_sample(self, tmp_path):
        report = run_experiment(small("sample", tmp_path, model="family=clayton,theta=2,dim=3", n="25"))
        header, rows = report.tables["sample"]
        assert header == ["u1", "u2", "u3"] and len(rows) == 25


class TestEmitReport:
    def test_empty_table_writes_nothing(self, tmp_path):
        report = ExperimentReport("rate", {"out": str(tmp_path / "x")}, tables={"rate_replicates": (["a"], [])})
        with pytest.raises(ValueError):
            emit_report(report)
        assert not (tmp_path / "x").exists()

    def test_io_error_has_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        report = ExperimentReport("rate", {}, tables={"t": (["a"], [[1]])})
        with pytest.raises(OSError, match="file"):
            emit_report(report, blocker / "sub")

    @pytest.mark.parametrize(
        "experiment, kw",
        [
            ("rate", dict(n="50,100", reps=3, grid=11)),
            ("multiplier", dict(n="100", reps=10, boot=10, grid=6, outer=2)),
            ("limit-compare", dict(n="100", reps=10, grid=6)),
            ("check-conditions", dict(model="family=clayton,theta=1")),
            ("sample", dict(n="10")),
        ],
    )
    def test_byte_identical_reruns(self, tmp_path, experiment, kw):
        paths_a = emit_report(run_experiment(small(experiment, tmp_path / "a", **kw)))
        paths_b = emit_report(run_experiment(small(experiment, tmp_path / "b", **kw)))
        csv_a = sorted(p for p in paths_a if p.suffix == ".csv")
        csv_b = sorted(p for p in paths_b if p.suffix == ".csv")
        assert [p.name for p in csv_a] == [p.name for p in csv_b] and csv_a
        for a, b in zip(csv_a, csv_b):
            assert a.read_bytes() == b.read_bytes()


class TestCli:
    def test_sample_succeeds(self, tmp_path, capsys):
        assert main(["sample", "--model", "family=independence", "--n", "5", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "sample.csv").exists()

    def test_refused_exit_code(self, tmp_path):
        assert main(["limit-compare", "--model", "family=frechet_upper", "--reps", "5", "--grid", "5", "--out", str(tmp_path)]) == 2

    def test_bad_model_exit_code(self, tmp_path):
        assert main(["rate", "--model", "family=nope", "--out", str(tmp_path)]) == 2

    def test_failed_verdict_exit_code(self, tmp_path, capsys):
        code = main(["rate", "--n", "50,100", "--reps", "3", "--grid", "11", "--out", str(tmp_path), "--config", str(self._tight(tmp_path))])
        assert code == 1
        assert "slope: fail" in capsys.readouterr().out

    @staticmethod
    def _tight(tmp_path):
        p = tmp_path / "tight.cfg"
        p.write_text("slope_min = 5\nslope_max = 6\n")
        return p

    def test_module_entry_point(self, tmp_path):
        res = subprocess.run(
            [sys.executable, "-m", "empcop", "check-conditions", "--model", "family=independence", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert res.returncode == 0, res.stderr
        assert "C2.1_matches_declaration: pass" in res.stdout
