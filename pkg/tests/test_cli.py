import csv
import json

import numpy as np
import pytest

from srcloc.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def planted_dir(tmp_path):
    out = tmp_path / "data"
    code = run_cli("gen-planted-dataset", "--n", 80, "--k", 8, "--theta", 0.8,
                   "--seed", 3, "--out-dir", out)
    assert code == 0
    return out


class TestGenCommands:
    def test_gen_sensor_writes_points(self, tmp_path):
        out = tmp_path / "points.csv"
        assert run_cli("gen-sensor", "--n", 30, "--k", 4, "--seed", 1, "--out", out) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["id", "x", "y"]
        assert len(rows) == 31

    def test_gen_planted_dataset_files(self, planted_dir):
        meta = json.load((planted_dir / "meta.json").open())
        assert meta["n"] == 80
        assert len(meta["sources"]) == 1
        points = list(csv.reader((planted_dir / "points.csv").open()))
        signal = list(csv.reader((planted_dir / "signal.csv").open()))
        assert len(points) == len(signal) == 81


class TestLocalizeCommand:
    def test_recovers_planted_source(self, planted_dir, tmp_path):
        meta = json.load((planted_dir / "meta.json").open())
        prefix = tmp_path / "run"
        code = run_cli("localize",
                       "--points", planted_dir / "points.csv",
                       "--signal", planted_dir / "signal.csv",
                       "--k", 8, "--fix-theta", 0.8,
                       "--sources", meta["sources"][0],
                       "--out", prefix)
        assert code == 0
        rows = list(csv.DictReader((tmp_path / "run_recovered.csv").open()))
        best = max(rows, key=lambda r: abs(float(r["x"])))
        assert best["id"] == meta["sources"][0]
        solve = json.load((tmp_path / "run_solve.json").open())
        assert solve["theta"] == 0.8
        report = json.load((tmp_path / "run_hop_report.json").open())
        assert report["total"] <= 1.0

    def test_missing_signal_file_fails_cleanly(self, tmp_path, capsys):
        code = run_cli("localize", "--signal", tmp_path / "nope.csv",
                       "--points", tmp_path / "nope_points.csv",
                       "--out", tmp_path / "x")
        assert code != 0
        err = capsys.readouterr().err
        assert err.startswith("error:schema:")

    def test_remove_node_with_interpolate(self, planted_dir, tmp_path):
        meta = json.load((planted_dir / "meta.json").open())
        code = run_cli("localize",
                       "--points", planted_dir / "points.csv",
                       "--signal", planted_dir / "signal.csv",
                       "--k", 10, "--fix-theta", 0.8,
                       "--remove-node", meta["sources"][0],
                       "--outlier-mode", "interpolate",
                       "--sources", meta["sources"][0],
                       "--out", tmp_path / "r")
        assert code == 0
        report = json.load((tmp_path / "r_hop_report.json").open())
        assert report["total"] <= 2.0


class TestGridCommands:
    def test_distance_grid_outputs_and_determinism(self, tmp_path):
        args = ["grid-distance-theta", "--n", 40, "--k", 5,
                "--h-values", "2", "--theta-values", "0.5,1.0",
                "--trials", 2, "--seed", 11]
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert run_cli(*args, "--out", out_a) == 0
        assert run_cli(*args, "--out", out_b) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        assert (tmp_path / "a_summary.csv").read_bytes() == (tmp_path / "b_summary.csv").read_bytes()
        rows = list(csv.DictReader(out_a.open()))
        assert len(rows) == 4
        assert set(rows[0].keys()) == {"h", "theta", "trial", "hop_error",
                                       "outer_iterations", "converged",
                                       "final_energy", "theta_recovered", "status"}

    def test_snr_grid_outputs_and_determinism(self, tmp_path):
        args = ["grid-snr-theta", "--n", 40, "--k", 5, "--h", 2,
                "--snr-values", "20", "--theta-values", "0.5",
                "--trials", 2, "--seed", 12]
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert run_cli(*args, "--out", out_a, "--format", "json") == 0
        assert run_cli(*args, "--out", out_b, "--format", "json") == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        records = json.load(out_a.open())
        assert len(records) == 2
        assert all(r["status"] == "ok" for r in records)

    def test_k_sweep_command(self, planted_dir, tmp_path):
        meta = json.load((planted_dir / "meta.json").open())
        out_a = tmp_path / "ks_a.csv"
        out_b = tmp_path / "ks_b.csv"
        args = ["k-sweep",
                "--points", planted_dir / "points.csv",
                "--signal", planted_dir / "signal.csv",
                "--k-values", "6:9", "--fix-theta", 0.8,
                "--sources", meta["sources"][0]]
        assert run_cli(*args, "--out", out_a) == 0
        assert run_cli(*args, "--out", out_b) == 0
        assert out_a.read_bytes() == out_b.read_bytes()
        rows = list(csv.DictReader(out_a.open()))
        assert [int(r["k"]) for r in rows] == [6, 7, 8, 9]
        assert min(float(r["hop_error"]) for r in rows) <= 1.0

    def test_k_sweep_remove_max(self, planted_dir, tmp_path):
        meta = json.load((planted_dir / "meta.json").open())
        out = tmp_path / "ks.csv"
        code = run_cli("k-sweep",
                       "--points", planted_dir / "points.csv",
                       "--signal", planted_dir / "signal.csv",
                       "--k-values", "8,12", "--fix-theta", 0.8,
                       "--sources", meta["sources"][0],
                       "--remove-max", "--outlier-mode", "mask",
                       "--out", out)
        assert code == 0
        rows = list(csv.DictReader(out.open()))
        assert min(float(r["hop_error"]) for r in rows) <= 2.0
