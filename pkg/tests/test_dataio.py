"""CSV ingestion, aggregation, differencing, splitting, calibration."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regimernn import (
    ConfigurationError,
    SeriesBundle,
    apply_calibration,
    daily_aggregate,
    difference,
    fit_calibration,
    load_csv,
    reconstruct,
    split_60_20_20,
)
from regimernn.dataio import make_daily_frame, make_value_frame, read_bundle_csv, write_bundle_csv


def write_rows(path, rows, header="timestamp,value"):
    path.write_text(header + "\n" + "\n".join(rows) + "\n", encoding="utf-8")
    return path


class TestLoadCsv:
    def test_well_formed(self, tmp_path):
        path = write_rows(
            tmp_path / "ok.csv",
            ["2021-01-01T00:00:00,1.5", "2021-01-01T01:00:00,2.5", "2021-01-01T02:00:00,3.5"],
        )
        raw = load_csv(path)
        assert len(raw.timestamps) == 3
        np.testing.assert_array_equal(raw.values, [1.5, 2.5, 3.5])

    def test_epoch_timestamps(self, tmp_path):
        path = write_rows(tmp_path / "epoch.csv", ["1000,1.0", "2000,2.0"])
        raw = load_csv(path)
        assert raw.timestamps[0] < raw.timestamps[1]

    def test_non_numeric_value_names_row(self, tmp_path):
        path = write_rows(
            tmp_path / "bad.csv", ["2021-01-01,1.0", "2021-01-02,oops"]
        )
        with pytest.raises(ConfigurationError, match="row 3"):
            load_csv(path)

    def test_out_of_order_rejected(self, tmp_path):
        path = write_rows(
            tmp_path / "ooo.csv", ["2021-01-02,1.0", "2021-01-01,2.0"]
        )
        with pytest.raises(ConfigurationError, match="row 3"):
            load_csv(path)

    def test_duplicate_timestamp_rejected(self, tmp_path):
        path = write_rows(
            tmp_path / "dup.csv", ["2021-01-01,1.0", "2021-01-01,2.0"]
        )
        with pytest.raises(ConfigurationError):
            load_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="nope.csv"):
            load_csv(tmp_path / "nope.csv")

    def test_missing_column(self, tmp_path):
        path = write_rows(tmp_path / "cols.csv", ["1,2"], header="a,b")
        with pytest.raises(ConfigurationError, match="timestamp"):
            load_csv(path)

    def test_custom_columns(self, tmp_path):
        path = write_rows(
            tmp_path / "named.csv", ["2021-01-01,7.0"], header="when,price"
        )
        raw = load_csv(path, time_column="when", value_column="price")
        assert raw.values[0] == 7.0


class TestDailyAggregate:
    def test_constant_day(self, tmp_path):
        path = write_rows(
            tmp_path / "d.csv",
            [f"2021-01-01T0{i}:00:00,1.0" for i in range(3)],
        )
        daily = daily_aggregate(load_csv(path))
        assert daily.means[0] == 1.0
        assert daily.stds[0] == 0.0

    def test_population_std(self, tmp_path):
        path = write_rows(
            tmp_path / "d.csv",
            ["2021-01-01T00:00:00,1.0", "2021-01-01T12:00:00,3.0"],
        )
        daily = daily_aggregate(load_csv(path))
        assert daily.means[0] == 2.0
        assert daily.stds[0] == 1.0  # divide-by-count convention

    def test_two_days_one_pair(self, tmp_path):
        path = write_rows(
            tmp_path / "d.csv",
            ["2021-01-01T00:00:00,1.0", "2021-01-02T00:00:00,5.0"],
        )
        frame = make_daily_frame(daily_aggregate(load_csv(path)), use_differences=False)
        assert frame.bundle.length == 1
        assert frame.bundle.inputs[0, 0] == 1.0  # day-1 mean feeds the step
        assert frame.bundle.targets[0, 0] == 5.0  # day-2 mean is the target

    def test_gap_counting(self, tmp_path):
        path = write_rows(
            tmp_path / "d.csv",
            ["2021-01-01T00:00:00,1.0", "2021-01-04T00:00:00,2.0"],
        )
        daily = daily_aggregate(load_csv(path))
        assert daily.gap_days == 2


class TestDifference:
    def test_example(self):
        diffs, anchor = difference(np.array([1.0, 4.0, 9.0]))
        np.testing.assert_array_equal(diffs, [3.0, 5.0])
        assert anchor == 1.0

    def test_constant_series(self):
        diffs, _ = difference(np.full(6, 2.5))
        np.testing.assert_array_equal(diffs, 0.0)

    def test_too_short(self):
        with pytest.raises(ConfigurationError):
            difference(np.array([1.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(2, 200))
    def test_reconstruct_inverts(self, seed, length):
        rng = np.random.default_rng(seed)
        series = rng.normal(0, 10.0, size=length)
        diffs, anchor = difference(series)
        np.testing.assert_allclose(reconstruct(diffs, anchor), series, atol=1e-12)


class TestSplit:
    def test_ten_points(self):
        bundle = SeriesBundle(inputs=np.arange(10.0), targets=np.arange(10.0))
        split = split_60_20_20(bundle)
        assert split.split == (6, 8)

    def test_paper_scale(self):
        bundle = SeriesBundle(inputs=np.zeros(5000), targets=np.zeros(5000))
        assert split_60_20_20(bundle).split == (3000, 4000)

    def test_segments_partition_sequence(self):
        bundle = split_60_20_20(
            SeriesBundle(inputs=np.zeros(17), targets=np.zeros(17))
        )
        spans = [bundle.segment_bounds(name) for name in ("train", "val", "test")]
        assert spans[0][0] == 0 and spans[-1][1] == 17
        for (_, end), (start, _) in zip(spans, spans[1:]):
            assert end == start

    def test_too_short(self):
        bundle = SeriesBundle(inputs=np.zeros(4), targets=np.zeros(4))
        with pytest.raises(ConfigurationError):
            split_60_20_20(bundle)


class TestCalibration:
    def test_perfect_predictions(self):
        targets = np.array([1.0, 2.0, 3.0, 4.0])
        cal = fit_calibration(targets, targets)
        assert cal.slope == pytest.approx(1.0, abs=1e-12)
        assert cal.intercept == pytest.approx(0.0, abs=1e-12)

    def test_half_scale(self):
        targets = np.array([2.0, 4.0, 6.0])
        cal = fit_calibration(targets / 2.0, targets)
        assert cal.slope == pytest.approx(2.0, abs=1e-12)
        assert cal.intercept == pytest.approx(0.0, abs=1e-12)

    def test_constant_predictions_fallback(self):
        cal = fit_calibration(np.full(5, 3.0), np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
        assert cal.intercept_only
        assert cal.slope == 0.0
        assert cal.intercept == 3.0

    def test_apply_is_affine(self):
        from regimernn import Calibration

        out = apply_calibration(Calibration(2.0, -1.0), np.array([0.0, 1.0, 2.0]))
        np.testing.assert_array_equal(out, [-1.0, 1.0, 3.0])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_never_hurts_on_fitting_set(self, seed):
        """OLS optimality: calibrated RMSE <= uncalibrated on the fit data."""
        rng = np.random.default_rng(seed)
        preds = rng.normal(size=40)
        targets = 1.7 * preds + 0.3 + rng.normal(0, 0.5, size=40)
        cal = fit_calibration(preds, targets)
        before = np.sqrt(np.mean((targets - preds) ** 2))
        after = np.sqrt(np.mean((targets - apply_calibration(cal, preds)) ** 2))
        assert after <= before + 1e-12


class TestValueFrame:
    def test_levels(self):
        frame = make_value_frame(np.array([1.0, 2.0, 4.0, 7.0]))
        np.testing.assert_array_equal(frame.bundle.inputs[:, 0], [1.0, 2.0, 4.0])
        np.testing.assert_array_equal(frame.bundle.targets[:, 0], [2.0, 4.0, 7.0])

    def test_differenced_alignment(self):
        values = np.array([1.0, 2.0, 4.0, 7.0, 11.0])
        frame = make_value_frame(values, use_differences=True)
        np.testing.assert_array_equal(frame.bundle.inputs[:, 0], [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(frame.bundle.targets[:, 0], [2.0, 3.0, 4.0])
        # reconstruction anchors: prediction + previous level = next level
        np.testing.assert_array_equal(
            frame.prev_levels + frame.bundle.targets[:, 0], frame.level_targets
        )


class TestBundleCsv:
    def test_round_trip(self, tmp_path):
        from regimernn import gen_ar_deterministic

        bundle = gen_ar_deterministic(length=40, seed=5)
        path = tmp_path / "series.csv"
        write_bundle_csv(path, bundle)
        back = read_bundle_csv(path)
        np.testing.assert_array_equal(back.inputs, bundle.inputs)
        np.testing.assert_array_equal(back.targets, bundle.targets)
        np.testing.assert_array_equal(back.regime_labels, bundle.regime_labels)

    def test_missing_columns(self, tmp_path):
        path = write_rows(tmp_path / "bad.csv", ["0,1"], header="t,z")
        with pytest.raises(ConfigurationError):
            read_bundle_csv(path)
