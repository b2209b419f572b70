import json
import os

import numpy as np
import pytest

from lcmspectra.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestLocalEigs:
    def test_csv_contract(self, capsys, tmp_path):
        path = tmp_path / "eigs.csv"
        code, _, _ = run(
            ["local-eigs", "--p", "2", "--sigma", "0.25", "--tau", "1.5",
             "--out", str(path)],
            capsys,
        )
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# lcm-spectra")
        assert lines[1] == "k,lambda,envelope_lo,envelope_hi"
        k, lam, lo, hi = lines[2].split(",")
        assert int(k) == 0
        assert float(lo) <= float(lam) <= float(hi)

    def test_envelope_contains_all_rows(self, capsys, tmp_path):
        path = tmp_path / "eigs.csv"
        code, _, _ = run(
            ["local-eigs", "--p", "11", "--sigma", "0.25", "--tau", "1.5",
             "--out", str(path)],
            capsys,
        )
        assert code == 0
        rows = [l.split(",") for l in path.read_text().splitlines()[2:]]
        for _, lam, lo, hi in rows:
            assert float(lo) - 1e-12 <= float(lam) <= float(hi) + 1e-12


class TestKappa:
    def test_json_contract(self, capsys, tmp_path):
        path = tmp_path / "kappa.json"
        code, _, _ = run(
            ["kappa", "--sigma", "0.25", "--tau", "1.5", "--pmax", "2000",
             "--out", str(path)],
            capsys,
        )
        assert code == 0
        payload = json.loads(path.read_text())
        assert payload["closed_form"] == 1.0
        assert abs(payload["kappa"] - 1.0) < 1e-6
        assert payload["uncertainty"] >= 0.0
        assert payload["_comment"].startswith("lcm-spectra")

    def test_no_closed_form_is_null(self, capsys, tmp_path):
        path = tmp_path / "kappa.json"
        code, _, _ = run(
            ["kappa", "--sigma", "0.25", "--tau", "1.2", "--pmax", "500",
             "--out", str(path)],
            capsys,
        )
        assert code == 0
        assert json.loads(path.read_text())["closed_form"] is None


class TestSpectrum:
    def test_csv_sorted_by_rank(self, capsys, tmp_path):
        path = tmp_path / "sorted.csv"
        code, _, _ = run(
            ["spectrum", "--sigma", "0.25", "--tau", "1.5", "--nmax", "50",
             "--pmax", "2000", "--out", str(path)],
            capsys,
        )
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[1] == "rank,n,lambda,n_rho_lambda"
        rows = [l.split(",") for l in lines[2:]]
        assert [int(r[0]) for r in rows] == list(range(1, 51))
        assert int(rows[0][1]) == 1
        lams = [float(r[2]) for r in rows]
        assert all(a >= b for a, b in zip(lams, lams[1:]))

    def test_byte_identical_reruns(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, _, _ = run(
                ["spectrum", "--sigma", "0.25", "--tau", "1.5", "--nmax", "30",
                 "--pmax", "1000", "--out", str(path)],
                capsys,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()


class TestCounting:
    def test_json_and_plot_data(self, capsys, tmp_path):
        out = tmp_path / "mu.json"
        plot = tmp_path / "mu_plot.csv"
        code, _, _ = run(
            ["counting", "--sigma", "0.25", "--tau", "1.5", "--t", "500",
             "--pmax", "3000", "--out", str(out),
             "--emit-plot-data", str(plot)],
            capsys,
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["mu"] > 0 and payload["n_cut"] >= payload["mu"]
        lines = plot.read_text().splitlines()
        assert lines[1] == "t,mu_t_scaled"
        pairs = [tuple(map(float, l.split(","))) for l in lines[2:]]
        assert len(pairs) == 13
        assert pairs[-1][0] == 500.0


class TestOtherCommands:
    def test_schatten_rows(self, capsys, tmp_path):
        path = tmp_path / "s.csv"
        code, _, _ = run(
            ["schatten", "--sigma", "0", "--q", "2", "--m", "32",
             "--n", "8,64", "--out", str(path)],
            capsys,
        )
        assert code == 0
        rows = [l.split(",") for l in path.read_text().splitlines()[2:]]
        assert len(rows) == 2
        assert float(rows[1][1]) < float(rows[0][1])

    def test_beurling_rows(self, capsys, tmp_path):
        path = tmp_path / "b.csv"
        code, _, _ = run(
            ["beurling", "--sigma", "0.25", "--tau", "1.5", "--x", "10,100",
             "--pmax", "500", "--out", str(path)],
            capsys,
        )
        assert code == 0
        rows = [l.split(",") for l in path.read_text().splitlines()[2:]]
        assert int(float(rows[0][1])) <= int(float(rows[1][1]))

    def test_toeplitz_compare(self, capsys, tmp_path):
        path = tmp_path / "t.csv"
        code, _, _ = run(
            ["toeplitz-compare", "--sigma", "0.25", "--n", "64", "--top", "3",
             "--pmax", "2000", "--out", str(path)],
            capsys,
        )
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[1] == "rank,rescaled_sv_sq,lambda_product,rel_gap"
        assert len(lines) == 5


class TestVerify:
    def test_passes_and_prints(self, capsys):
        code, out, _ = run(["verify", "--seed", "42"], capsys)
        assert code == 0
        lines = [l for l in out.splitlines() if l.startswith(("PASS", "FAIL"))]
        assert len(lines) >= 6
        assert all(l.startswith("PASS") for l in lines)

    def test_deterministic_csv(self, capsys, tmp_path):
        a, b = tmp_path / "v1.csv", tmp_path / "v2.csv"
        for path in (a, b):
            code, _, _ = run(["verify", "--seed", "7", "--out", str(path)], capsys)
            assert code == 0
        assert a.read_bytes() == b.read_bytes()


class TestExitCodes:
    def test_invalid_regime_is_two(self, capsys):
        code, _, err = run(
            ["kappa", "--sigma", "1.0", "--tau", "1.0", "--pmax", "100"], capsys
        )
        assert code == 2
        assert "invalid parameters" in err

    def test_missing_argument_is_two(self, capsys):
        assert main(["spectrum", "--sigma", "0.25", "--tau", "1.5"]) == 2

    def test_coverage_failure_is_three(self, capsys):
        code, _, err = run(
            ["counting", "--sigma", "0.25", "--tau", "1.5", "--t", "1e9",
             "--pmax", "2000"],
            capsys,
        )
        assert code == 3
        assert "certificate" in err


class TestCache:
    def test_cache_roundtrip_keeps_output(self, capsys, tmp_path, monkeypatch):
        cache = tmp_path / "cache"
        monkeypatch.setenv("LCM_SPECTRA_CACHE_DIR", str(cache))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, _, _ = run(
                ["spectrum", "--sigma", "0.25", "--tau", "1.5", "--nmax", "20",
                 "--pmax", "800", "--out", str(path)],
                capsys,
            )
            assert code == 0
        assert len(os.listdir(cache)) == 1
        assert a.read_bytes() == b.read_bytes()
