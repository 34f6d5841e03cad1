import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from netport.cli import main
from netport.market_data import ReturnsMatrix, load_returns
from netport.networks import pearson_matrix
from netport.report import OUTPUT_FILES
from netport.synth import synthetic_returns, write_long_csv

DATA = Path(__file__).parent / "data"
FIXTURE = DATA / "fixture.yaml"


def write_config(path, **keys):
    lines = []
    for k, v in keys.items():
        lines.append(f"{k}: {v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def error_line(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return err[0]


class TestSynth:
    def test_same_seed_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for p in (a, b):
            assert main(["synth", "--assets", "4", "--months", "14", "--seed", "3", "--out", str(p)]) == 0
        assert a.read_bytes() == b.read_bytes()
        main(["synth", "--assets", "4", "--months", "14", "--seed", "4", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()

    def test_output_loads(self, tmp_path):
        p = tmp_path / "s.csv"
        main(["synth", "--assets", "5", "--months", "15", "--out", str(p)])
        r = load_returns(p)
        assert r.n_assets == 5 and r.n_days == 15 * 21
        assert len(np.unique(r.months)) == 15

    def test_zero_correlation(self):
        r = synthetic_returns(20, 60, seed=1, correlation_level=0.0)
        w = pearson_matrix(r).weights
        off = w[~np.eye(20, dtype=bool)]
        assert np.abs(off).mean() < 0.1

    def test_full_correlation(self):
        r = synthetic_returns(6, 14, seed=2, correlation_level=1.0)
        w = pearson_matrix(r).weights
        np.testing.assert_allclose(w[~np.eye(6, dtype=bool)], 1.0, atol=1e-12)

    @pytest.mark.parametrize(
        "args",
        [
            ["--assets", "2", "--months", "20"],
            ["--assets", "5", "--months", "13"],
            ["--assets", "5", "--months", "20", "--rho", "1.5"],
            ["--assets", "five", "--months", "20"],
        ],
    )
    def test_bad_parameters_exit_2(self, tmp_path, capsys, args):
        with pytest.raises(SystemExit) as exc:
            code = main(["synth", *args, "--out", str(tmp_path / "x.csv")])
            raise SystemExit(code)
        assert exc.value.code == 2
        assert error_line(capsys).startswith("netport: error[config]:")


class TestBacktest:
    def test_fixture_smoke(self, tmp_path, capsys):
        assert main(["backtest", "--config", str(FIXTURE), "--out", str(tmp_path), "--jobs", "1"]) == 0
        for kind in ("pearson", "kendall", "tail"):
            assert sorted(p.name for p in (tmp_path / kind).iterdir()) == sorted(OUTPUT_FILES)
        out = capsys.readouterr().out
        assert out.count("network:") == 3 and "P*" in out

    def test_same_config_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["backtest", "--config", str(FIXTURE), "--out", str(a), "--jobs", "1"]) == 0
        assert main(["backtest", "--config", str(FIXTURE), "--out", str(b), "--jobs", "2"]) == 0
        for kind in ("pearson", "kendall", "tail"):
            for name in OUTPUT_FILES:
                assert (a / kind / name).read_bytes() == (b / kind / name).read_bytes()

    def test_network_flag(self, tmp_path):
        assert main(["backtest", "--config", str(FIXTURE), "--out", str(tmp_path), "--network", "tail"]) == 0
        assert [p.name for p in tmp_path.iterdir()] == ["tail"]

    def test_synthetic_mode(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.yaml", mode="synthetic", synth_assets=4, synth_months=14, networks="[pearson]",
            alpha_grid="[0.0, 0.5, 1.0]", out_dir=str(tmp_path / "out"),
        )
        assert main(["backtest", "--config", str(cfg)]) == 0
        assert (tmp_path / "out" / "pearson" / "report.json").exists()

    @pytest.mark.parametrize(
        "keys",
        [
            {"alpha_grid": "[0.25, 0.5, 1.0]"},
            {"alpha_grid": "[0.0, 0.5]"},
            {"alpah_grid": "[0.0, 1.0]"},
            {"networks": "[pearson, spearman]"},
            {"tail_q": "1.5"},
            {"in_months": "twelve"},
        ],
    )
    def test_config_errors_exit_2(self, tmp_path, capsys, keys):
        cfg = write_config(tmp_path / "c.yaml", input=str(DATA / "synth_3x24.csv"), **keys)
        assert main(["backtest", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert error_line(capsys).startswith("netport: error[config]:")
        assert not (tmp_path / "o").exists()

    def test_invalid_yaml_and_missing_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("alpha_grid: [0.0, 1.0\n")
        assert main(["backtest", "--config", str(bad)]) == 2
        error_line(capsys)
        assert main(["backtest", "--config", str(tmp_path / "nope.yaml")]) == 2
        error_line(capsys)

    def test_data_errors_exit_3(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.yaml", input=str(tmp_path / "missing.csv"))
        assert main(["backtest", "--config", str(cfg)]) == 3
        assert error_line(capsys).startswith("netport: error[data]:")
        broken = tmp_path / "broken.csv"
        broken.write_text("date,ticker,value\n2020-01-01,A,abc\n")
        cfg = write_config(tmp_path / "c.yaml", input=str(broken))
        assert main(["backtest", "--config", str(cfg)]) == 3
        error_line(capsys)
        short = tmp_path / "short.csv"
        write_long_csv(synthetic_returns(3, 14, seed=1), short)
        cfg = write_config(tmp_path / "c.yaml", input=str(short), in_months=14)
        assert main(["backtest", "--config", str(cfg)]) == 3
        assert "error[data]" in error_line(capsys)

    def test_solver_failure_rate_exit_4(self, tmp_path, capsys):
        base = synthetic_returns(4, 14, seed=1)
        values = base.values.copy()
        values[:, 0] = 0.0

        path = tmp_path / "flat.csv"
        write_long_csv(ReturnsMatrix(base.dates, base.tickers, values), path)
        cfg = write_config(tmp_path / "c.yaml", input=str(path), networks="[pearson]", out_dir=str(tmp_path / "o"))
        assert main(["backtest", "--config", str(cfg)]) == 4
        assert error_line(capsys).startswith("netport: error[solver]:")

    def test_usage_error_exit_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["backtest"])
        assert exc.value.code == 2
        assert error_line(capsys).startswith("netport: error[config]:")


def test_console_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "netport.cli", "synth", "--assets", "3", "--months", "14", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.read_text().startswith("date,ticker,value\n")
