import csv
import json

import numpy as np
import pytest

from sympstiefel.cli import main
from sympstiefel.manifold import check_symplectic
from sympstiefel.matkit import rand_gaussian
from sympstiefel.mmio import read_matrix_market, write_matrix_market


def run_cli(*args):
    return main([str(a) for a in args])


def load_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestSolveVerb:
    def test_emits_reports_and_solution(self, tmp_path):
        out = tmp_path / "run"
        code = run_cli("solve", "--problem", "nearest", "--n", 6, "--p", 1,
                       "--seed", 3, "--out", out, "--no-plots")
        assert code == 0
        rows = load_csv(out / "run.csv")
        assert list(rows[0].keys()) == ["iter", "fval", "gradf", "feasi", "t_k",
                                        "backtracks"]
        assert int(rows[-1]["iter"]) == len(rows) - 1
        summary = json.loads((out / "run.json").read_text())
        for key in ("fval", "gradf", "feasi", "iter", "time", "termination",
                    "config"):
            assert key in summary
        assert summary["termination"] in ("GradTol", "StepAndFunTol")
        X = read_matrix_market(out / "run_solution.mtx")
        assert X.shape == (12, 2)
        assert check_symplectic(X, 6, 1) <= 1e-8

    def test_same_seed_identical_csv_bytes(self, tmp_path):
        args = ("solve", "--problem", "brockett", "--n", 5, "--p", 1,
                "--lambda-decay", "1.1", "--seed", 7, "--no-plots")
        assert run_cli(*args, "--out", tmp_path / "a") == 0
        assert run_cli(*args, "--out", tmp_path / "b") == 0
        a = (tmp_path / "a" / "run.csv").read_bytes()
        b = (tmp_path / "b" / "run.csv").read_bytes()
        assert a == b

    def test_solution_roundtrips_final_point(self, tmp_path):
        out = tmp_path / "run"
        assert run_cli("solve", "--problem", "mean", "--n", 2, "--p", 2,
                       "--num-samples", 10, "--seed", 5, "--out", out,
                       "--no-plots") == 0
        X1 = read_matrix_market(out / "run_solution.mtx")
        # a rerun reproduces the exact same final point through the text format
        assert run_cli("solve", "--problem", "mean", "--n", 2, "--p", 2,
                       "--num-samples", 10, "--seed", 5,
                       "--out", tmp_path / "rerun", "--no-plots") == 0
        X2 = read_matrix_market(tmp_path / "rerun" / "run_solution.mtx")
        np.testing.assert_array_equal(X1, X2)

    def test_figures_rendered_by_default(self, tmp_path):
        out = tmp_path / "fig"
        assert run_cli("solve", "--problem", "nearest", "--n", 4, "--p", 1,
                       "--seed", 1, "--out", out) == 0
        for suffix in ("gradf", "feasi", "fval"):
            png = out / f"run_{suffix}.png"
            assert png.exists() and png.stat().st_size > 0

    def test_mtx_input_target(self, tmp_path):
        A = rand_gaussian(8, 6, seed=9)
        src = tmp_path / "target.mtx"
        write_matrix_market(src, A)
        out = tmp_path / "ingest"
        assert run_cli("solve", "--problem", "nearest", "--p", 1, "--input", src,
                       "--out", out, "--no-plots") == 0
        summary = json.loads((out / "run.json").read_text())
        assert summary["config"]["input"] == str(src)
        # first 2p columns after maxabs normalization
        X = read_matrix_market(out / "run_solution.mtx")
        assert X.shape == (8, 2)

    def test_max_iter_exit_code(self, tmp_path):
        code = run_cli("solve", "--problem", "nearest", "--n", 8, "--p", 2,
                       "--seed", 0, "--max-iter", 2, "--out", tmp_path / "mi",
                       "--no-plots")
        assert code == 1
        summary = json.loads((tmp_path / "mi" / "run.json").read_text())
        assert summary["termination"] == "MaxIter"


class TestErrors:
    def test_unparseable_input_is_reported(self, tmp_path, capsys):
        bad = tmp_path / "bad.mtx"
        bad.write_text("%%MatrixMarket matrix coordinate complex general\n1 1 1\n")
        out = tmp_path / "err"
        code = run_cli("solve", "--problem", "nearest", "--p", 1, "--input", bad,
                       "--out", out, "--no-plots")
        assert code == 2
        err = json.loads((out / "error.json").read_text())
        assert "error" in err
        assert "unsupported" in err["error"]

    def test_missing_input_file(self, tmp_path):
        out = tmp_path / "err2"
        code = run_cli("solve", "--problem", "nearest", "--p", 1,
                       "--input", tmp_path / "nope.mtx", "--out", out,
                       "--no-plots")
        assert code == 2
        assert (out / "error.json").exists()

    def test_sympeig_rejects_indefinite_input(self, tmp_path):
        M = np.diag([1.0, 1.0, -1.0, 1.0])
        src = tmp_path / "m.mtx"
        write_matrix_market(src, M)
        code = run_cli("sympeig", "--input", src, "--p", 1,
                       "--out", tmp_path / "err3", "--no-plots")
        assert code == 2


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            "# experiment defaults\n"
            "n = 5\n"
            "p = 1\n"
            "seed = 11\n"
            "max-iter = 400\n"
        )
        out = tmp_path / "cfgrun"
        assert run_cli("solve", "--problem", "nearest", "--config", cfg,
                       "--seed", 12, "--out", out, "--no-plots") == 0
        summary = json.loads((out / "run.json").read_text())
        assert summary["config"]["n"] == 5
        assert summary["config"]["max_iter"] == 400
        assert summary["config"]["seed"] == 12  # flag wins

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("frobnicate = 3\n")
        code = run_cli("solve", "--problem", "nearest", "--config", cfg,
                       "--no-plots")
        assert code == 2


class TestSweepVerb:
    def test_one_row_per_rho(self, tmp_path):
        out = tmp_path / "sweep"
        assert run_cli("sweep", "--problem", "nearest", "--n", 5, "--p", 1,
                       "--seed", 2, "--out", out, "--no-plots") == 0
        rows = load_csv(out / "sweep.csv")
        assert [float(r["rho"]) for r in rows] == [0.125, 0.25, 0.5, 1.0, 2.0,
                                                   4.0, 8.0]
        assert all(r["termination"] in ("GradTol", "StepAndFunTol") for r in rows)

    def test_custom_grid(self, tmp_path):
        out = tmp_path / "sweep2"
        assert run_cli("sweep", "--problem", "nearest", "--n", 4, "--p", 1,
                       "--seed", 2, "--rho-grid", "0.5,1", "--out", out,
                       "--no-plots") == 0
        assert len(load_csv(out / "sweep.csv")) == 2


class TestCompareVerb:
    def test_retraction_axis_has_both_trajectories(self, tmp_path):
        out = tmp_path / "cmp"
        assert run_cli("compare", "--axis", "retraction", "--problem", "nearest",
                       "--n", 5, "--p", 1, "--seed", 4, "--out", out,
                       "--no-plots") == 0
        rows = load_csv(out / "compare.csv")
        labels = {r["label"] for r in rows}
        assert labels == {"qgeo", "cayley"}
        summary = json.loads((out / "compare.json").read_text())
        assert summary["qgeo"]["converged"] and summary["cayley"]["converged"]

    def test_alpha_axis_two_trajectories(self, tmp_path):
        out = tmp_path / "cmpa"
        assert run_cli("compare", "--axis", "alpha", "--problem", "nearest",
                       "--n", 5, "--p", 1, "--seed", 4, "--out", out,
                       "--no-plots") == 0
        labels = {r["label"] for r in load_csv(out / "compare.csv")}
        assert labels == {"alpha=0", "alpha=0.85"}

    def test_variant_axis_identical_gradf_at_group_case(self, tmp_path):
        # p = n with a shared rho: the two metric variants coincide, so the
        # logged gradient columns agree within 1e-12
        out = tmp_path / "cmpv"
        assert run_cli("compare", "--axis", "variant", "--problem", "nearest",
                       "--n", 3, "--p", 3, "--rho", 1.0, "--seed", 6,
                       "--out", out, "--no-plots") == 0
        rows = load_csv(out / "compare.csv")
        by = {}
        for r in rows:
            by.setdefault(r["label"], []).append(float(r["gradf"]))
        g1, g2 = np.array(by["variant-I"]), np.array(by["variant-II"])
        assert g1.shape == g2.shape
        np.testing.assert_allclose(g1, g2, atol=1e-12 * (1 + g1.max()))


class TestSympeigVerb:
    def test_small_lehmer_matches_oracle(self, tmp_path):
        out = tmp_path / "eig"
        assert run_cli("sympeig", "--gallery", "lehmer", "--n", 10, "--p", 1,
                       "--seed", 0, "--eps-grad", 1e-8, "--eps-x", 1e-12,
                       "--eps-f", 1e-16, "--max-iter", 4000,
                       "--out", out, "--no-plots") == 0
        summary = json.loads((out / "sympeig.json").read_text())
        assert summary["d1_rel_err"] <= 1e-6
        assert summary["pairing_residual"] < 1e-6
        assert len(summary["d_extracted"]) == 1
