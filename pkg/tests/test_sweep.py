import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nalbench.sweep import (
    EmptyInputError,
    compute_curves,
    curves_from_csv,
    curves_to_csv,
    default_thresholds,
    extract_curve,
    validate_thresholds,
    write_plot_data,
)


def rows_for(strategy, finals, stream="raw"):
    return [{"strategy": strategy, "stream": stream, "final": f} for f in finals]


class TestThresholdGrid:
    def test_default_grid(self):
        grid = default_thresholds()
        assert grid[0] == 0.1 and grid[-1] == 0.9
        assert len(grid) == 17
        steps = {round(b - a, 10) for a, b in zip(grid, grid[1:])}
        assert steps == {0.05}

    def test_validation(self):
        with pytest.raises(ValueError):
            validate_thresholds([])
        with pytest.raises(ValueError):
            validate_thresholds([0.2, 0.2])
        with pytest.raises(ValueError):
            validate_thresholds([0.5, 0.4])
        with pytest.raises(ValueError):
            validate_thresholds([-0.1, 0.5])


class TestComputeCurves:
    def test_inclusive_threshold(self):
        curves = compute_curves(rows_for("m1", [0.95, 0.5, 0.2]), thresholds=[0.5])
        assert curves[0].points == ((0.5, 2 / 3),)

    def test_threshold_below_everything(self):
        curves = compute_curves(rows_for("m1", [0.4, 0.9]), thresholds=[0.1])
        assert curves[0].points[0][1] == 1.0

    def test_groups_by_strategy_and_stream(self):
        rows = rows_for("m1", [1.0]) + rows_for("m1", [0.0], stream="repaired") + rows_for("mb3", [1.0])
        curves = compute_curves(rows, thresholds=[0.5])
        keys = {(c.strategy, c.repaired) for c in curves}
        assert keys == {("m1", False), ("m1", True), ("mb3", False)}

    def test_empty_rows_rejected(self):
        with pytest.raises(EmptyInputError):
            compute_curves([])

    def test_missing_final_rejected(self):
        with pytest.raises(ValueError):
            compute_curves([{"strategy": "m1", "stream": "raw", "final": None}])

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=60))
    def test_curves_never_increase(self, finals):
        curve = compute_curves(rows_for("m1", finals))[0]
        assert curve.is_non_increasing()

    def test_floor_rows_count(self):
        curves = compute_curves(rows_for("m1", [0.1, 0.1, 1.0]), thresholds=[0.1, 0.2])
        assert curves[0].points == ((0.1, 1.0), (0.2, 1 / 3))


class TestCsvRoundTrip:
    def test_round_trip(self, tmp_path):
        rng = random.Random(1)
        rows = []
        for strategy in ("m1", "m2", "mb3"):
            for stream in ("raw", "repaired"):
                rows += rows_for(strategy, [rng.random() for _ in range(20)], stream)
        curves = compute_curves(rows)
        path = curves_to_csv(curves, tmp_path / "curves.csv")
        loaded = curves_from_csv(path)
        assert loaded == sorted(curves, key=lambda c: (c.strategy, c.repaired))

    def test_plot_data_wide_format(self, tmp_path):
        rows = rows_for("m1", [1.0, 0.4]) + rows_for("mb3", [1.0, 0.9])
        curves = compute_curves(rows, thresholds=[0.5, 0.95])
        path = write_plot_data(curves, tmp_path / "wide.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "threshold,m1,mb3"
        assert lines[1].startswith("0.5,")

    def test_extract_curve(self):
        rows = rows_for("m1", [1.0]) + rows_for("m1", [0.5], stream="repaired")
        curves = compute_curves(rows, thresholds=[0.3])
        assert extract_curve(curves, "m1", True).repaired
        with pytest.raises(KeyError):
            extract_curve(curves, "zz", False)
