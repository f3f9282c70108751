"""End-to-end tests for the command-line driver."""

import subprocess
import sys

import numpy as np
import pytest

from tenfact.bench import projection_error
from tenfact.cli import _parse_grid, main
from tenfact.io import read_labeled_matrices, read_tensor_series, write_tensor_series


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_sim_config(path, **overrides):
    values = {"setting": "Ia", "K": 2, "T": 40, "d": "8,7", "seed": 7}
    values.update(overrides)
    path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
    return path


class TestSimulate:
    def test_header_and_token_count(self, tmp_path, capsys):
        config = write_sim_config(tmp_path / "sim.cfg", T=100, d="40,40")
        out = tmp_path / "data.tsrs"
        code, stdout, _ = run_cli(["simulate", str(config), str(out)], capsys)
        assert code == 0
        assert f"wrote {out}" in stdout
        lines = out.read_text().splitlines()
        assert lines[1] == "2 100 40 40"
        assert sum(len(line.split()) for line in lines[2:]) == 100 * 1600

    def test_same_config_twice_is_byte_identical(self, tmp_path, capsys):
        config = write_sim_config(tmp_path / "sim.cfg")
        first = tmp_path / "a.tsrs"
        second = tmp_path / "b.tsrs"
        assert run_cli(["simulate", str(config), str(first)], capsys)[0] == 0
        assert run_cli(["simulate", str(config), str(second)], capsys)[0] == 0
        assert first.read_bytes() == second.read_bytes()
        sidecar_a = (tmp_path / "a.tsrs.truth").read_bytes()
        sidecar_b = (tmp_path / "b.tsrs.truth").read_bytes()
        assert sidecar_a == sidecar_b

    def test_sidecar_lists_one_loading_per_mode(self, tmp_path, capsys):
        config = write_sim_config(tmp_path / "sim.cfg")
        out = tmp_path / "data.tsrs"
        run_cli(["simulate", str(config), str(out)], capsys)
        items = read_labeled_matrices(tmp_path / "data.tsrs.truth")
        assert [label for label, _ in items] == ["loading mode 1", "loading mode 2"]
        assert items[0][1].shape == (8, 2)
        assert items[1][1].shape == (7, 2)

    def test_mode_count_mismatch_is_config_error(self, tmp_path, capsys):
        config = write_sim_config(tmp_path / "sim.cfg", K=3)
        code, _, stderr = run_cli(["simulate", str(config), str(tmp_path / "x")], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: config:")

    def test_unknown_key_is_config_error(self, tmp_path, capsys):
        config = tmp_path / "sim.cfg"
        config.write_text("T=40\nd=8,7\nbogus=1\n")
        code, _, stderr = run_cli(["simulate", str(config), str(tmp_path / "x")], capsys)
        assert code == 1
        assert "tenfact: config:" in stderr and "bogus" in stderr

    def test_bad_field_value_is_config_error(self, tmp_path, capsys):
        config = write_sim_config(tmp_path / "sim.cfg", noise_scale=-1)
        code, _, stderr = run_cli(["simulate", str(config), str(tmp_path / "x")], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: config:")


class TestEstimate:
    def simulate(self, tmp_path, capsys, **overrides):
        config = write_sim_config(tmp_path / "sim.cfg", **overrides)
        out = tmp_path / "data.tsrs"
        assert run_cli(["simulate", str(config), str(out)], capsys)[0] == 0
        return out

    def test_noiseless_rank_one_end_to_end(self, tmp_path, capsys):
        series = self.simulate(tmp_path, capsys, setting="custom", ranks="1,1",
                               noise_scale=0.0)
        code, stdout, _ = run_cli(["estimate", str(series)], capsys)
        assert code == 0
        assert "mode 1: rank 1" in stdout
        assert "mode 2: rank 1" in stdout
        truth = dict(read_labeled_matrices(tmp_path / "data.tsrs.truth"))
        for k, d in enumerate((8, 7)):
            columns = np.loadtxt(tmp_path / f"data_loading_mode{k + 1}.csv",
                                 delimiter=",", skiprows=1, ndmin=2)
            assert columns.shape == (d, 1)
            basis = np.linalg.svd(truth[f"loading mode {k + 1}"], full_matrices=False)[0]
            assert projection_error(columns, basis) < 1e-6

    def test_given_ranks_skip_estimation(self, tmp_path, capsys):
        series = self.simulate(tmp_path, capsys)
        prefix = tmp_path / "given"
        code, stdout, _ = run_cli(
            ["estimate", str(series), "--ranks", "2,2", "--out-prefix", str(prefix)],
            capsys,
        )
        assert code == 0
        assert stdout.count("(given)") == 2
        for k in range(2):
            header = (tmp_path / f"given_loading_mode{k + 1}.csv").read_text().splitlines()[0]
            assert header == "q1,q2"

    def test_reruns_are_identical(self, tmp_path, capsys):
        series = self.simulate(tmp_path, capsys)
        args = ["estimate", str(series), "--seed", "3"]
        code_a, out_a, _ = run_cli(args, capsys)
        bytes_a = (tmp_path / "data_loading_mode1.csv").read_bytes()
        code_b, out_b, _ = run_cli(args, capsys)
        bytes_b = (tmp_path / "data_loading_mode1.csv").read_bytes()
        assert code_a == code_b == 0
        assert out_a == out_b
        assert bytes_a == bytes_b

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        code, _, stderr = run_cli(["estimate", str(tmp_path / "missing.tsrs")], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: io:")

    def test_malformed_file_is_format_error(self, tmp_path, capsys):
        path = tmp_path / "corrupt.tsrs"
        path.write_text("tsrs 9\n")
        code, _, stderr = run_cli(["estimate", str(path)], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: format:")

    def test_single_snapshot_is_rejected(self, tmp_path, capsys):
        path = tmp_path / "short.tsrs"
        write_tensor_series(np.zeros((1, 3, 3)), path)
        code, _, stderr = run_cli(["estimate", str(path)], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: invalid-input:")
        assert "2 time steps" in stderr

    def test_rank_count_mismatch_is_rejected(self, tmp_path, capsys):
        series = self.simulate(tmp_path, capsys)
        code, _, stderr = run_cli(["estimate", str(series), "--ranks", "1,2,3"], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: invalid-input:")


class TestBench:
    def write_config(self, path, **overrides):
        values = {"setting": "Ia", "dims": "6,5", "T": 30, "R": 2,
                  "estimators": "proj,rank", "seed": 4}
        values.update(overrides)
        path.write_text("".join(f"{k} = {v}\n" for k, v in values.items()))
        return path

    def test_smoke_run_writes_both_csvs(self, tmp_path, capsys):
        config = self.write_config(tmp_path / "bench.cfg")
        out_dir = tmp_path / "out"
        code, stdout, _ = run_cli(["bench", str(config), str(out_dir)], capsys)
        assert code == 0
        assert "correct-rank proportion:" in stdout
        summary = (out_dir / "summary.csv").read_text().splitlines()
        # one row per estimator and mode after the header
        assert len(summary) == 1 + 2 * 2
        replications = (out_dir / "replications.csv").read_text().splitlines()
        assert len(replications) == 1 + 2 * 2 * 2

    def test_rerun_and_threads_leave_csvs_identical(self, tmp_path, capsys):
        config = self.write_config(tmp_path / "bench.cfg")
        dirs = [tmp_path / name for name in ("a", "b", "c")]
        assert run_cli(["bench", str(config), str(dirs[0])], capsys)[0] == 0
        assert run_cli(["bench", str(config), str(dirs[1])], capsys)[0] == 0
        assert run_cli(["bench", str(config), str(dirs[2]), "--threads", "3"], capsys)[0] == 0
        for name in ("replications.csv", "summary.csv"):
            reference = (dirs[0] / name).read_bytes()
            assert (dirs[1] / name).read_bytes() == reference
            assert (dirs[2] / name).read_bytes() == reference

    def test_missing_required_key_is_config_error(self, tmp_path, capsys):
        config = tmp_path / "bench.cfg"
        config.write_text("setting=Ia\ndims=6,5\nT=30\n")
        code, _, stderr = run_cli(["bench", str(config), str(tmp_path / "out")], capsys)
        assert code == 1
        assert stderr.startswith("tenfact: config:")
        assert "'R'" in stderr


class TestCapm:
    def test_perfect_fit_gives_zero_residuals(self, tmp_path, capsys):
        rng = np.random.default_rng(9)
        market = rng.standard_normal(50)
        np.savetxt(tmp_path / "market.txt", market, fmt="%.17g")
        panel = np.outer(market, np.full(6, 2.0))
        np.savetxt(tmp_path / "panel.csv", panel, fmt="%.17g", delimiter=",")
        out = tmp_path / "resid.tsrs"
        code, stdout, _ = run_cli(
            ["capm", str(tmp_path / "panel.csv"), str(tmp_path / "market.txt"),
             str(out), "--dims", "3,2"],
            capsys,
        )
        assert code == 0
        x = read_tensor_series(out)
        assert x.shape == (50, 3, 2)
        assert np.abs(x).max() < 1e-12

    def test_row_layout_matches_storage_order(self, tmp_path, capsys):
        # one time step, known values: row index runs the first mode fastest
        np.savetxt(tmp_path / "market.txt", [1.0, -1.0], fmt="%.17g")
        panel = np.array([[1.0, 2, 3, 4, 5, 6], [-1.0, -2, -3, -4, -5, -6]])
        np.savetxt(tmp_path / "panel.csv", panel, fmt="%.17g", delimiter=",")
        out = tmp_path / "resid.tsrs"
        code, _, _ = run_cli(
            ["capm", str(tmp_path / "panel.csv"), str(tmp_path / "market.txt"),
             str(out), "--dims", "3,2"],
            capsys,
        )
        assert code == 0
        x = read_tensor_series(out)
        # residuals are zero here; check the shape contract via the writer
        assert x.shape == (2, 3, 2)

    def test_row_count_mismatch_is_rejected(self, tmp_path, capsys):
        np.savetxt(tmp_path / "market.txt", np.arange(4.0), fmt="%.17g")
        np.savetxt(tmp_path / "panel.csv", np.zeros((5, 6)), fmt="%.17g", delimiter=",")
        code, _, stderr = run_cli(
            ["capm", str(tmp_path / "panel.csv"), str(tmp_path / "market.txt"),
             str(tmp_path / "out.tsrs"), "--dims", "3,2"],
            capsys,
        )
        assert code == 1
        assert stderr.startswith("tenfact: invalid-input:")

    def test_constant_market_is_rejected(self, tmp_path, capsys):
        np.savetxt(tmp_path / "market.txt", np.ones(5), fmt="%.17g")
        np.savetxt(tmp_path / "panel.csv", np.ones((5, 6)), fmt="%.17g", delimiter=",")
        code, _, stderr = run_cli(
            ["capm", str(tmp_path / "panel.csv"), str(tmp_path / "market.txt"),
             str(tmp_path / "out.tsrs"), "--dims", "3,2"],
            capsys,
        )
        assert code == 1
        assert "constant" in stderr

    def test_dims_product_mismatch_is_rejected(self, tmp_path, capsys):
        np.savetxt(tmp_path / "market.txt", np.arange(5.0), fmt="%.17g")
        np.savetxt(tmp_path / "panel.csv", np.zeros((5, 6)), fmt="%.17g", delimiter=",")
        code, _, stderr = run_cli(
            ["capm", str(tmp_path / "panel.csv"), str(tmp_path / "market.txt"),
             str(tmp_path / "out.tsrs"), "--dims", "4,2"],
            capsys,
        )
        assert code == 1
        assert "dims imply 8" in stderr

    def test_betas_are_logged(self, tmp_path):
        rng = np.random.default_rng(21)
        market = rng.standard_normal(60)
        betas = np.array([0.5, 1.0, 1.5, 2.0, -0.5, 0.25])
        panel = 0.01 + np.outer(market, betas)
        np.savetxt(tmp_path / "market.txt", market, fmt="%.17g")
        np.savetxt(tmp_path / "panel.csv", panel, fmt="%.17g", delimiter=",")
        proc = subprocess.run(
            [sys.executable, "-m", "tenfact", "capm", str(tmp_path / "panel.csv"),
             str(tmp_path / "market.txt"), str(tmp_path / "out.tsrs"),
             "--dims", "3,2"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        logged = {}
        for line in proc.stderr.splitlines():
            if "beta[" in line:
                name, _, value = line.partition("=")
                index = int(name.split("[")[1].split("]")[0])
                logged[index] = float(value)
        assert sorted(logged) == list(range(6))
        np.testing.assert_allclose([logged[j] for j in range(6)], betas,
                                   rtol=0.0, atol=1e-10)


class TestParseGrid:
    def test_inclusive_endpoint(self):
        np.testing.assert_allclose(_parse_grid("0.5:2:0.5"), [0.5, 1.0, 1.5, 2.0])

    def test_partial_last_step(self):
        np.testing.assert_allclose(_parse_grid("1:2:0.3"), [1.0, 1.3, 1.6, 1.9])

    def test_bad_forms_are_rejected(self):
        with pytest.raises(ValueError, match="lo:hi:step"):
            _parse_grid("1:2")
        with pytest.raises(ValueError, match="step > 0"):
            _parse_grid("1:2:0")
        with pytest.raises(ValueError, match="step > 0"):
            _parse_grid("2:1:0.5")
