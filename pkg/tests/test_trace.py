"""Trace records, 17-digit formatting, and the per-iteration CSV."""

import csv

import numpy as np

from igabench import SolverTrace, TraceRecord, fmt17


class TestFmt17:
    def test_round_trips_doubles(self):
        rng = np.random.default_rng(0)
        for value in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
            assert float(fmt17(float(value))) == float(value)

    def test_plain_values(self):
        assert fmt17(0.5) == "0.5"
        assert fmt17(1.0) == "1"
        assert float(fmt17(0.1)) == 0.1


def _trace():
    records = [
        TraceRecord(0, np.zeros(2), None, 1.5, 0.0, {}, 0.0),
        TraceRecord(1, np.array([0.5, 0.0]), 0.25, 0.75, 0.5, {"iota": 0.5}, 1.25),
    ]
    return SolverTrace("aiga", records, converged=True)


class TestSolverTrace:
    def test_estimate_and_iterations_read_last_record(self):
        trace = _trace()
        np.testing.assert_array_equal(trace.estimate, [0.5, 0.0])
        assert trace.iterations == 1

    def test_scalar_keys_union(self):
        assert _trace().scalar_keys() == ["iota"]

    def test_csv_layout(self, tmp_path):
        path = tmp_path / "trace.csv"
        _trace().write_csv(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["iter", "nmse", "residual", "active_fraction", "iota", "wall_ms"]
        assert rows[1][1] == ""  # NMSE unavailable at iteration 0
        assert rows[1][4] == ""  # scalar absent in the first record
        assert rows[2][1] == "0.25" and rows[2][4] == "0.5"
        assert len(rows) == 3

    def test_csv_floats_round_trip(self, tmp_path):
        path = tmp_path / "trace.csv"
        _trace().write_csv(path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert float(rows[2][2]) == 0.75
        assert float(rows[2][5]) == 1.25
