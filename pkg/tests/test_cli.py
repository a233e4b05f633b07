"""End-to-end command line tests driven through cli.main(argv)."""
from __future__ import annotations

import numpy as np
import pytest

from pathvol.cli import main
from pathvol.estimators import EstimateResult
from pathvol.model import ckls_model, format_model_config
from pathvol.simulate import read_path_csv


def run_cli(*argv):
    return main(list(argv))


def write_csv(tmp_path, name, text):
    dest = tmp_path / name
    dest.write_text(text)
    return dest


class TestSimulate:
    def test_zero_noise_cir_at_equilibrium_is_constant(self, tmp_path, capsys):
        out = tmp_path / "path.csv"
        code = run_cli(
            "simulate", "--model", "cir", "--a", "1", "--b", "1", "--sigma", "0",
            "--y0", "1", "--n", "10", "--seed", "7", "--out", str(out),
        )
        assert code == 0
        path = read_path_csv(out)
        assert len(path.values) == 11
        np.testing.assert_array_equal(path.values, np.ones(11))
        np.testing.assert_allclose(path.times, np.arange(11) / 10, rtol=0, atol=1e-15)
        assert "stopped_early=False" in capsys.readouterr().err

    def test_zero_noise_above_equilibrium_decreases(self, tmp_path):
        out = tmp_path / "path.csv"
        assert run_cli(
            "simulate", "--model", "cir", "--a", "1", "--b", "1", "--sigma", "0",
            "--y0", "4", "--n", "10", "--out", str(out),
        ) == 0
        values = read_path_csv(out).values
        assert values[0] == 4.0
        assert np.all(np.diff(values) < 0)
        assert np.all(values > 1.0)

    def test_seed_reproducibility(self, tmp_path):
        outs = [tmp_path / f"p{i}.csv" for i in range(3)]
        for out in outs[:2]:
            assert run_cli(
                "simulate", "--model", "ckls", "--a", "1", "--b", "1", "--sigma", "0.3",
                "--gamma", "0.6", "--y0", "1", "--n", "50", "--seed", "11",
                "--out", str(out),
            ) == 0
        assert run_cli(
            "simulate", "--model", "ckls", "--a", "1", "--b", "1", "--sigma", "0.3",
            "--gamma", "0.6", "--y0", "1", "--n", "50", "--seed", "12",
            "--out", str(outs[2]),
        ) == 0
        assert outs[0].read_text() == outs[1].read_text()
        assert outs[0].read_text() != outs[2].read_text()

    def test_random_delay_model_runs(self, tmp_path):
        out = tmp_path / "path.csv"
        assert run_cli(
            "simulate", "--model", "random-delay", "--sigma", "0.3", "--gamma", "0.6",
            "--y0-random", "--n", "100", "--seed", "3", "--out", str(out),
        ) == 0
        path = read_path_csv(out)
        assert np.all(path.values > 0)

    def test_config_file_round_trip(self, tmp_path):
        cfg = write_csv(tmp_path, "model.cfg", format_model_config(ckls_model(1.0, 1.0, 0.3, 0.6)))
        out = tmp_path / "path.csv"
        assert run_cli(
            "simulate", "--config", str(cfg), "--y0", "1", "--n", "20", "--out", str(out)
        ) == 0
        assert len(read_path_csv(out).values) == 21

    def test_flags_override_config_scalars(self, tmp_path):
        cfg = write_csv(tmp_path, "model.cfg", format_model_config(ckls_model(1.0, 1.0, 0.3, 0.6)))
        quiet = tmp_path / "quiet.csv"
        assert run_cli(
            "simulate", "--config", str(cfg), "--sigma", "0", "--y0", "1", "--n", "20",
            "--out", str(quiet),
        ) == 0
        np.testing.assert_array_equal(read_path_csv(quiet).values, np.ones(21))

    def test_bad_config_file_is_usage_error(self, tmp_path):
        cfg = write_csv(tmp_path, "model.cfg", "model=banana\n")
        with pytest.raises(SystemExit) as exc:
            run_cli("simulate", "--config", str(cfg), "--y0", "1", "--n", "10",
                    "--out", str(tmp_path / "x.csv"))
        assert exc.value.code == 2

    @pytest.mark.parametrize(
        "argv",
        [
            ("simulate", "--model", "cir", "--a", "1", "--b", "1", "--sigma", "0.3",
             "--y0", "1", "--y0-random", "--n", "10", "--out", "x.csv"),
            ("simulate", "--model", "cir", "--a", "1", "--b", "1", "--sigma", "0.3",
             "--n", "1", "--out", "x.csv"),
            ("simulate", "--model", "cir", "--a", "1", "--b", "1", "--sigma", "0.3",
             "--gamma", "1.5", "--n", "10", "--out", "x.csv"),
            ("simulate", "--model", "ckls", "--a", "1", "--b", "1", "--sigma", "0.3",
             "--n", "10", "--out", "x.csv"),  # ckls without gamma
            ("simulate", "--model", "cir", "--sigma", "0.3", "--n", "10", "--out", "x.csv"),
            ("simulate", "--n", "10", "--out", "x.csv"),  # neither model nor config
        ],
    )
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as exc:
            run_cli(*argv)
        assert exc.value.code == 2


class TestEstimate:
    def test_known_power_scale_from_two_point_path(self, tmp_path, capsys):
        src = write_csv(tmp_path, "two.csv", "t,y\n0,1\n0.01,1.1\n")
        assert run_cli(
            "estimate", "--in", str(src), "--method", "sigma-known-gamma",
            "--gamma", "1", "--h", "1",
        ) == 0
        out_lines = capsys.readouterr().out.strip().splitlines()
        assert out_lines[0] == EstimateResult.CSV_HEADER
        fields = out_lines[1].split(",")
        assert fields[0] == "sigma-known-gamma"
        assert float(fields[2]) == pytest.approx(0.997513451195927, rel=1e-13)

    def test_simulate_then_estimate_round_trip(self, tmp_path, capsys):
        src = tmp_path / "path.csv"
        assert run_cli(
            "simulate", "--model", "ckls", "--a", "1", "--b", "1", "--sigma", "0.3",
            "--gamma", "0.6", "--y0", "1", "--n", "20000", "--seed", "5",
            "--out", str(src),
        ) == 0
        curve = tmp_path / "curve.csv"
        assert run_cli(
            "estimate", "--in", str(src), "--method", "joint", "--curve", str(curve)
        ) == 0
        row = capsys.readouterr().out.strip().splitlines()[1].split(",")
        gamma_hat, sigma_hat = float(row[1]), float(row[2])
        assert abs(gamma_hat - 0.6) < 0.15
        assert abs(sigma_hat - 0.3) < 0.05
        curve_lines = curve.read_text().strip().splitlines()
        assert curve_lines[0] == "h,objective"
        assert len(curve_lines) == 31  # header + default grid of 30

    def test_integrated_method(self, tmp_path, capsys):
        src = write_csv(tmp_path, "two.csv", "t,y\n0,1\n0.01,1.1\n")
        assert run_cli(
            "estimate", "--in", str(src), "--method", "integrated", "--gamma", "1"
        ) == 0
        fields = capsys.readouterr().out.strip().splitlines()[1].split(",")
        assert fields[0] == "integrated-sigma-sq"
        assert float(fields[2]) == pytest.approx(0.997513451195927, rel=1e-13)

    def test_malformed_csv_exit_2_names_line(self, tmp_path, capsys):
        src = write_csv(tmp_path, "bad.csv", "t,y\n0,1\nbad,row\n")
        assert run_cli(
            "estimate", "--in", str(src), "--method", "joint"
        ) == 2
        assert "line 3" in capsys.readouterr().err

    def test_missing_file_exit_2(self, tmp_path, capsys):
        assert run_cli(
            "estimate", "--in", str(tmp_path / "nope.csv"), "--method", "joint"
        ) == 2
        assert "cannot read" in capsys.readouterr().err

    def test_constant_path_exit_1(self, tmp_path, capsys):
        src = write_csv(tmp_path, "flat.csv", "t,y\n0,5\n0.5,5\n1,5\n")
        assert run_cli("estimate", "--in", str(src), "--method", "joint") == 1
        assert "error" in capsys.readouterr().err

    def test_constant_path_known_gamma_warns_zero(self, tmp_path, capsys):
        src = write_csv(tmp_path, "flat.csv", "t,y\n0,5\n0.5,5\n1,5\n")
        assert run_cli(
            "estimate", "--in", str(src), "--method", "sigma-known-gamma", "--gamma", "0.5"
        ) == 0
        captured = capsys.readouterr()
        assert "zero-variance" in captured.err
        assert float(captured.out.strip().splitlines()[1].split(",")[2]) == 0.0

    @pytest.mark.parametrize(
        "argv",
        [
            ("estimate", "--in", "x.csv", "--method", "sigma-known-gamma"),  # no gamma
            ("estimate", "--in", "x.csv", "--method", "gamma-known-sigma"),  # no sigma
            ("estimate", "--in", "x.csv", "--method", "maximum-likelihood"),
            ("estimate", "--in", "x.csv", "--method", "gamma-ratio", "--h1", "0.5", "--h2", "0.5"),
            ("estimate", "--in", "x.csv", "--method", "joint", "--grid-n", "1"),
            ("estimate", "--in", "x.csv", "--method", "sigma-known-gamma", "--gamma", "2"),
        ],
    )
    def test_usage_errors_exit_2(self, argv):
        with pytest.raises(SystemExit) as exc:
            run_cli(*argv)
        assert exc.value.code == 2


class TestExperiment:
    def test_small_table_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "t1b.csv"
        assert run_cli(
            "experiment", "--table", "t1b", "--trials", "2", "--out", str(out)
        ) == 0
        assert "table t1b" in capsys.readouterr().out
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "row_id,rmse,mae,bias,paper_rmse,paper_mae,paper_bias,ratio"
        assert len(lines) == 5

    def test_trials_must_be_positive(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("experiment", "--table", "t1b", "--trials", "0")
        assert exc.value.code == 2

    def test_unknown_table_rejected_by_argparse(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("experiment", "--table", "t7")
        assert exc.value.code == 2
