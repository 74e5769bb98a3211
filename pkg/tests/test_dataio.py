import csv
import json
import math

import numpy as np
import pytest

from srcloc import (
    Graph,
    Observation,
    OutlierMode,
    interpolate_invalid,
    load_dataset,
    remove_outlier,
    write_results,
)
from srcloc.errors import (
    InterpolationFailureError,
    InvalidInputError,
    ParseError,
    SchemaError,
)


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return path


def path_graph(n):
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return Graph(weights=w)


class TestLoadDataset:
    def test_basic_points_and_signal(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,1,0", "c,2,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1.5", "b,2.5", "c,3.5"])
        ds = load_dataset(points_path=points, signal_path=signal)
        assert ds.n == 3
        assert np.allclose(ds.signal, [1.5, 2.5, 3.5])
        assert ds.valid.all()
        assert ds.node_labels == ("a", "b", "c")

    def test_na_marks_invalid(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,1,0", "c,2,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1", "b,NA", "c,3"])
        ds = load_dataset(points_path=points, signal_path=signal)
        assert list(ds.valid) == [True, False, True]
        assert math.isnan(ds.signal[1])

    def test_signal_reordered_by_id(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,1,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "b,2", "a,1"])
        ds = load_dataset(points_path=points, signal_path=signal)
        assert np.allclose(ds.signal, [1.0, 2.0])

    def test_mismatched_ids(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,1,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1", "z,2"])
        with pytest.raises(SchemaError):
            load_dataset(points_path=points, signal_path=signal)

    def test_row_count_mismatch_names_both_files(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,1,0", "c,2,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1", "b,2"])
        with pytest.raises(SchemaError) as err:
            load_dataset(points_path=points, signal_path=signal)
        assert "points.csv" in str(err.value) and "signal.csv" in str(err.value)

    def test_non_numeric_cell_reports_row_and_column(self, tmp_path):
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y", "a,0,0", "b,oops,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1", "b,2"])
        with pytest.raises(ParseError) as err:
            load_dataset(points_path=points, signal_path=signal)
        assert "row 3" in str(err.value) and "'x'" in str(err.value)

    def test_distance_matrix(self, tmp_path):
        dist = write_lines(tmp_path / "dist.csv",
                           ["id,a,b", "a,0,2.0", "b,2.0,0"])
        signal = write_lines(tmp_path / "signal.csv",
                             ["id,value", "a,1", "b,2"])
        ds = load_dataset(signal_path=signal, distances_path=dist)
        assert ds.coords is None
        assert np.allclose(ds.distances, [[0.0, 2.0], [2.0, 0.0]])


class TestInterpolateInvalid:
    def test_path_mean(self):
        g = path_graph(3)
        got = interpolate_invalid([1.0, np.nan, 3.0], [True, False, True], g)
        assert np.allclose(got, [1.0, 2.0, 3.0])

    def test_weighted_mean(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 3.0
        w[1, 2] = w[2, 1] = 1.0
        got = interpolate_invalid([0.0, np.nan, 4.0], [True, False, True], Graph(weights=w))
        assert got[1] == pytest.approx(1.0)  # (3*0 + 1*4)/4

    def test_no_invalid_is_identity(self):
        g = path_graph(3)
        vals = np.array([1.0, 2.0, 3.0])
        got = interpolate_invalid(vals, [True, True, True], g)
        assert np.array_equal(got, vals)

    def test_transitive_fill(self):
        g = path_graph(4)
        got = interpolate_invalid([1.0, np.nan, np.nan, np.nan],
                                  [True, False, False, False], g)
        assert np.all(np.isfinite(got))
        assert np.allclose(got, 1.0)

    def test_all_invalid_fails(self):
        g = path_graph(2)
        with pytest.raises(InterpolationFailureError):
            interpolate_invalid([np.nan, np.nan], [False, False], g)

    def test_unreachable_invalid_fails_naming_node(self):
        w = np.zeros((3, 3))
        w[0, 1] = w[1, 0] = 1.0
        with pytest.raises(InterpolationFailureError, match="2"):
            interpolate_invalid([1.0, 2.0, np.nan], [True, True, False], Graph(weights=w))

    def test_valid_entries_untouched(self):
        g = path_graph(5)
        vals = [1.0, np.nan, 3.0, np.nan, 5.0]
        valid = [True, False, True, False, True]
        got = interpolate_invalid(vals, valid, g)
        assert got[0] == 1.0 and got[2] == 3.0 and got[4] == 5.0


class TestRemoveOutlier:
    def test_mask_mode(self):
        g = path_graph(4)
        obs = Observation(b=np.array([1.0, 9.0, 3.0, 2.0]))
        out = remove_outlier(obs, 1, OutlierMode.MASK, g)
        assert out.mask[1] == 0.0
        assert np.array_equal(out.b, obs.b)
        assert np.array_equal(np.delete(out.mask, 1), np.ones(3))

    def test_interpolate_mode(self):
        g = path_graph(3)
        obs = Observation(b=np.array([1.0, 9.0, 3.0]))
        out = remove_outlier(obs, 1, OutlierMode.INTERPOLATE, g)
        assert np.allclose(out.b, [1.0, 2.0, 3.0])
        assert np.array_equal(out.mask, obs.mask)

    def test_masked_entry_drops_out_of_objective(self):
        from srcloc import (SolverConfig, build_knn_graph, normalized_laplacian,
                            objective, spectral_decomposition)
        rng = np.random.default_rng(3)
        g = build_knn_graph(points=rng.random((12, 2)), k=3)
        decomp = spectral_decomposition(normalized_laplacian(g))
        cfg = SolverConfig(gamma=0.1)
        x = rng.normal(size=12)
        b = rng.normal(size=12)
        masked = remove_outlier(Observation(b=b), 3, OutlierMode.MASK, g)
        b_changed = b.copy()
        b_changed[3] = 123.0
        changed = Observation(b=b_changed, mask=masked.mask)
        assert objective(x, 0.7, masked, cfg, decomp) == objective(x, 0.7, changed, cfg, decomp)

    def test_node_out_of_range(self):
        g = path_graph(3)
        obs = Observation(b=np.zeros(3))
        with pytest.raises(InvalidInputError):
            remove_outlier(obs, 5, OutlierMode.MASK, g)


class TestWriteResults:
    def test_long_format_csv(self, tmp_path):
        records = [
            {"theta": 0.5, "h": 2, "trial": 0, "hop_error": 0.25},
            {"theta": 0.5, "h": 2, "trial": 1, "hop_error": float("inf")},
        ]
        out = tmp_path / "grid.csv"
        write_results(records, out, format="csv",
                      columns=["theta", "h", "trial", "hop_error"])
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["theta", "h", "trial", "hop_error"]
        assert rows[1] == ["0.5", "2", "0", "0.25"]
        assert rows[2][3] == "inf"

    def test_empty_records_header_only(self, tmp_path):
        out = tmp_path / "empty.csv"
        write_results([], out, format="csv", columns=["a", "b"])
        rows = list(csv.reader(out.open()))
        assert rows == [["a", "b"]]

    def test_csv_json_round_trip_identical_values(self, tmp_path):
        records = [{"id": "n0", "value": 0.123456789123456789},
                   {"id": "n1", "value": -1.0 / 3.0},
                   {"id": "n2", "value": float("inf")}]
        csv_path = tmp_path / "r.csv"
        json_path = tmp_path / "r.json"
        write_results(records, csv_path, format="csv", columns=["id", "value"])
        write_results(records, json_path, format="json", columns=["id", "value"])
        csv_rows = list(csv.DictReader(csv_path.open()))
        json_rows = json.load(json_path.open())
        for c_row, j_row in zip(csv_rows, json_rows):
            assert float(c_row["value"]) == float(j_row["value"])
            assert c_row["id"] == j_row["id"]

    def test_nine_significant_digits(self, tmp_path):
        out = tmp_path / "sig.csv"
        write_results([{"v": math.pi}], out, format="csv", columns=["v"])
        cell = list(csv.reader(out.open()))[1][0]
        assert cell == f"{math.pi:.9g}"

    def test_signal_round_trip_through_load_dataset(self, tmp_path):
        rng = np.random.default_rng(11)
        values = rng.normal(size=5)
        ids = [f"n{i}" for i in range(5)]
        points = write_lines(tmp_path / "points.csv",
                             ["id,x,y"] + [f"{ids[i]},{i},0" for i in range(5)])
        signal = tmp_path / "signal.csv"
        write_results([{"id": ids[i], "value": float(values[i])} for i in range(5)],
                      signal, format="csv", columns=["id", "value"])
        ds = load_dataset(points_path=points, signal_path=signal)
        written = np.array([float(f"{v:.9g}") for v in values])
        assert np.array_equal(ds.signal, written)
        # writing the loaded signal again is bit-stable
        signal2 = tmp_path / "signal2.csv"
        write_results([{"id": ids[i], "value": float(ds.signal[i])} for i in range(5)],
                      signal2, format="csv", columns=["id", "value"])
        assert signal.read_text() == signal2.read_text()

    def test_unwritable_path_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            write_results([], tmp_path / "nope" / "out.csv", format="csv", columns=["a"])
