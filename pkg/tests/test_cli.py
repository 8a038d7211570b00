import json
import subprocess
import sys

import numpy as np
import pytest

from hawkesvol.cli import main
from hawkesvol.simulate import ConditionalGeometric, simulate_path
from hawkesvol.tickdata import SessionConfig, generate_quotes, quotes_to_csv, read_stream_csv
from helpers import PANEL1, PANEL2

SIM_ARGS = ["simulate", "--mu", "0.15", "--alpha-s", "0.62", "--alpha-c", "0.50",
            "--beta", "1.90", "--eta", "0.22", "--sampler", "geometric",
            "--c", "0.18", "--d", "1.0", "--cap", "2.2"]


def _run(argv):
    return main([str(a) for a in argv])


class TestSimulateCommand:
    def test_deterministic_outputs(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert _run(SIM_ARGS + ["--horizon", 600, "--paths", 2, "--seed", 7,
                                    "--out", out]) == 0
        for name in ("path_0000.csv", "path_0001.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        manifest = json.loads((a / "manifest.json").read_text())
        assert manifest["seed"] == 7
        assert len(manifest["paths"]) == 2
        assert all(not p["exploded"] for p in manifest["paths"])

    def test_nonstationary_warning_recorded(self, tmp_path):
        out = tmp_path / "warn"
        argv = ["simulate", "--mu", "0.1", "--alpha-s", "1.4", "--alpha-c", "1.0",
                "--beta", "2.0", "--eta", "0.0", "--sampler", "constant",
                "--horizon", 50, "--paths", 1, "--seed", 1, "--out", out,
                "--guard", "1e5"]
        _run(argv)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["warnings"]

    def test_explosion_recorded_without_aborting(self, tmp_path):
        out = tmp_path / "boom"
        argv = ["simulate", "--mu", "2.0", "--alpha-s", "3.0", "--alpha-c", "3.0",
                "--beta", "1.0", "--eta", "0.0", "--sampler", "constant",
                "--horizon", 2000, "--paths", 2, "--seed", 3, "--out", out,
                "--guard", "500"]
        assert _run(argv) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert all(p["exploded"] for p in manifest["paths"])

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "mu=0.15\nalpha_s=0.62\nalpha_c=0.50\nbeta=1.90\neta=0.22\n"
            "sampler=geometric\nc=0.18\nd=1.0\ncap=2.2\nhorizon=300\npaths=1\nseed=5\n")
        out = tmp_path / "cfgrun"
        assert _run(["simulate", "--config", cfg, "--seed", 9, "--out", out]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 9  # flag beats config
        assert manifest["config"]["horizon"] == 300.0

    def test_scenario_segments_from_config(self, tmp_path):
        cfg = tmp_path / "scen.cfg"
        cfg.write_text(
            "segment1.duration=200\nsegment1.mu=0.3\nsegment1.alpha_s=0.5\n"
            "segment1.alpha_c=0.4\nsegment1.beta=2.0\nsegment1.eta=0.0\n"
            "segment1.sampler=constant\n"
            "segment2.duration=100\nsegment2.mu=0.05\nsegment2.alpha_s=0.1\n"
            "segment2.alpha_c=0.1\nsegment2.beta=2.0\nsegment2.eta=0.0\n"
            "segment2.sampler=constant\npaths=1\nseed=2\n")
        out = tmp_path / "scen"
        assert _run(["simulate", "--config", cfg, "--out", out]) == 0
        stream = read_stream_csv(out / "path_0000.csv")
        assert stream.horizon == 300.0


class TestFullModelBranches:
    def test_simulate_and_fit_full(self, tmp_path):
        out = tmp_path / "full"
        argv = ["simulate", "--model", "full", "--out", out, "--paths", 1,
                "--seed", 13, "--horizon", 2_500,
                "--mu1", 0.1461, "--mu2", 0.1155,
                "--alpha11", 0.3185, "--alpha22", 0.3821,
                "--alpha12", 0.9812, "--alpha21", 1.4949,
                "--beta11", 1.1799, "--beta22", 1.9553,
                "--beta12", 2.0952, "--beta21", 2.5030, "--eta", 0.1488,
                "--sampler", "geometric", "--c", 0.1, "--d", 1.0, "--cap", 2.0]
        assert _run(argv) == 0
        fit_out = tmp_path / "fit_full.json"
        assert _run(["fit", "--input", out / "path_0000.csv", "--model", "full",
                     "--starts", 1, "--out", fit_out]) == 0
        payload = json.loads(fit_out.read_text())
        assert payload["model"] == "full"
        assert set(payload["params"]) == {
            "mu1", "mu2", "alpha11", "alpha22", "alpha12", "alpha21",
            "beta11", "beta22", "beta12", "beta21", "eta"}


class TestIngestCommand:
    def test_round_trip_fixture(self, tmp_path):
        res = simulate_path(PANEL1, ConditionalGeometric(0.15, 1.0, 2.0),
                            SessionConfig().horizon, seed=11)
        quotes_csv = tmp_path / "quotes.csv"
        quotes_to_csv(generate_quotes(res.stream, 100.0, SessionConfig()), quotes_csv)
        out = tmp_path / "ingested"
        assert _run(["ingest", "--input", quotes_csv, "--out", out]) == 0
        stream = read_stream_csv(out / "day_single.csv")
        assert len(stream) == len(res.stream)
        assert np.array_equal(stream.marks, res.stream.marks)

    def test_diagnostics_tables(self, tmp_path):
        res = simulate_path(PANEL1, ConditionalGeometric(0.15, 1.0, 2.0),
                            SessionConfig().horizon, seed=12)
        quotes_csv = tmp_path / "quotes.csv"
        quotes_to_csv(generate_quotes(res.stream, 100.0, SessionConfig()), quotes_csv)
        out = tmp_path / "diag"
        assert _run(["ingest", "--input", quotes_csv, "--out", out, "--diagnostics"]) == 0
        marks = (out / "day_single_marks.csv").read_text().splitlines()
        assert marks[0] == "mark,percent"
        total = sum(float(line.split(",")[1]) for line in marks[1:])
        assert abs(total - 100.0) < 1e-9
        proxy = (out / "day_single_proxy.csv").read_text().splitlines()
        assert proxy[0].startswith("signed_mark,count,up_mean")

    def test_malformed_csv_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("timestamp,bid,ask\n10:00:00,xx,100.01\n")
        assert _run(["ingest", "--input", bad, "--out", tmp_path / "o"]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_input_exits_2(self, tmp_path):
        assert _run(["ingest", "--input", tmp_path / "nope.csv",
                     "--out", tmp_path / "o"]) == 2


@pytest.fixture(scope="module")
def small_ensemble(tmp_path_factory):
    out = tmp_path_factory.mktemp("ens")
    assert _run(SIM_ARGS + ["--horizon", 2_500, "--paths", 4, "--seed", 21,
                            "--out", out]) == 0
    return out


class TestFitCommand:
    def test_single_file_json(self, small_ensemble, tmp_path):
        out = tmp_path / "fit.json"
        assert _run(["fit", "--input", small_ensemble / "path_0000.csv",
                     "--out", out, "--starts", 1]) == 0
        payload = json.loads(out.read_text())
        assert payload["converged"]
        assert abs(payload["params"]["beta"] - PANEL2.beta) < 1.0

    def test_directory_batch(self, small_ensemble, tmp_path):
        out = tmp_path / "fits"
        assert _run(["fit", "--input", small_ensemble, "--out", out, "--starts", 1]) == 0
        rows = json.loads((out / "fits.json").read_text())
        assert len(rows) == 4
        assert (out / "fits.csv").exists()

    def test_missing_input_exits_2(self, tmp_path):
        assert _run(["fit", "--input", tmp_path / "none.csv", "--out", tmp_path / "f"]) == 2


class TestVolCommand:
    def test_report_fields(self, small_ensemble, tmp_path):
        out = tmp_path / "vol.json"
        assert _run(["vol", "--input", small_ensemble / "path_0000.csv", "--out", out,
                     "--starts", 1, "--s0", 100, "--delta", 0.005]) == 0
        payload = json.loads(out.read_text())
        rep = payload["report"]
        assert rep["hawkes_approx"] > 0
        assert rep["hawkes_full"] > 0
        assert rep["hawkes_iid"] > 0
        assert rep["tsrv"] > 0
        assert rep["horizon"] == 2_500.0

    def test_intraday_series(self, small_ensemble, tmp_path):
        out = tmp_path / "vol_intraday.json"
        assert _run(["vol", "--input", small_ensemble / "path_0001.csv", "--out", out,
                     "--starts", 1, "--intraday", "--window", 600]) == 0
        payload = json.loads(out.read_text())
        curve = payload["intraday"]["cumulative"]
        assert len(curve) >= 3
        assert all(b >= a - 1e-15 for a, b in zip(curve, curve[1:]))
        lines = (tmp_path / "vol_intraday_intraday.csv").read_text().splitlines()
        assert lines[0] == "window_end,cumulative_vol"
        assert len(lines) == len(curve) + 1

    def test_fit_json_reuse(self, small_ensemble, tmp_path):
        fit_path = tmp_path / "fit.json"
        _run(["fit", "--input", small_ensemble / "path_0002.csv", "--out", fit_path,
              "--starts", 1])
        out = tmp_path / "vol2.json"
        assert _run(["vol", "--input", small_ensemble / "path_0002.csv", "--out", out,
                     "--fit-json", fit_path]) == 0


class TestReportCommand:
    def test_aggregate(self, small_ensemble, tmp_path):
        out = tmp_path / "report"
        assert _run(["report", "--input", small_ensemble, "--out", out,
                     "--starts", 1, "--workers", 2]) == 0
        summary = json.loads((out / "report.json").read_text())
        assert summary["n_paths"] == 4
        assert summary["truth"]["mu"] == pytest.approx(0.15)
        assert " < " in summary["vol_ordering"]
        lines = (out / "report.csv").read_text().splitlines()
        assert lines[0].startswith("row,mu,alpha_s")
        assert lines[1].startswith("true,")

    def test_empty_ensemble_exits_2(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert _run(["report", "--input", empty, "--out", tmp_path / "r"]) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "hawkesvol.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
