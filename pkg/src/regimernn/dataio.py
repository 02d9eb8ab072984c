"""CSV ingestion and experiment-protocol transforms.

Covers loading timestamped value series, daily mean/std aggregation,
first-order differencing with exact reconstruction, chronological
60/20/20 splitting, and the affine calibration fitted on validation
predictions by ordinary least squares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigurationError
from .series import SeriesBundle


@dataclass
class RawSeries:
    """Timestamped scalar observations with strictly increasing timestamps."""

    timestamps: list[datetime]
    values: np.ndarray
    source: str = ""


@dataclass
class DailySeries:
    """Per-day mean and population standard deviation of a raw series."""

    days: list[date]
    means: np.ndarray
    stds: np.ndarray
    gap_days: int  # calendar days inside the span with no samples
    source: str = ""


@dataclass
class Calibration:
    """Affine correction ``y ≈ slope * prediction + intercept``."""

    slope: float
    intercept: float
    intercept_only: bool = False  # set when predictions were constant


def _parse_timestamp(text: str) -> datetime:
    text = text.strip()
    try:
        epoch = float(text)
    except ValueError:
        pass
    else:
        return datetime.fromtimestamp(epoch, tz=timezone.utc).replace(tzinfo=None)
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(timezone.utc).replace(tzinfo=None)
    return stamp


def load_csv(
    path: str | Path,
    time_column: str = "timestamp",
    value_column: str = "value",
) -> RawSeries:
    """Read a timestamped value series; rejects unordered or duplicate stamps.

    Timestamps may be ISO-8601 or numeric epoch seconds. Parse failures
    report the offending row and column.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file not found: {path}")
    timestamps: list[datetime] = []
    values: list[float] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or time_column not in reader.fieldnames:
            raise ConfigurationError(
                f"{path}: missing column {time_column!r} in header {reader.fieldnames}"
            )
        if value_column not in reader.fieldnames:
            raise ConfigurationError(
                f"{path}: missing column {value_column!r} in header {reader.fieldnames}"
            )
        for row_index, row in enumerate(reader, start=2):  # header is line 1
            try:
                stamp = _parse_timestamp(row[time_column])
            except (ValueError, TypeError) as exc:
                raise ConfigurationError(
                    f"{path}: row {row_index}, column {time_column!r}: "
                    f"cannot parse timestamp {row[time_column]!r} ({exc})"
                ) from exc
            try:
                value = float(row[value_column])
            except (ValueError, TypeError) as exc:
                raise ConfigurationError(
                    f"{path}: row {row_index}, column {value_column!r}: "
                    f"cannot parse value {row[value_column]!r}"
                ) from exc
            if not math.isfinite(value):
                raise ConfigurationError(
                    f"{path}: row {row_index}: non-finite value {value!r}"
                )
            if timestamps and stamp <= timestamps[-1]:
                raise ConfigurationError(
                    f"{path}: row {row_index}: timestamp {stamp} not strictly "
                    f"after {timestamps[-1]}"
                )
            timestamps.append(stamp)
            values.append(value)
    if not timestamps:
        raise ConfigurationError(f"{path}: no data rows")
    return RawSeries(timestamps, np.asarray(values), source=str(path))


def daily_aggregate(raw: RawSeries) -> DailySeries:
    """Collapse to daily resolution: per-day mean and population std.

    Days without samples are skipped, not imputed; the count of such gaps
    within the covered span is reported.
    """
    if not raw.timestamps:
        raise ConfigurationError("raw series is empty")
    days: list[date] = []
    means: list[float] = []
    stds: list[float] = []
    bucket: list[float] = []
    current = raw.timestamps[0].date()
    for stamp, value in zip(raw.timestamps, raw.values):
        day = stamp.date()
        if day != current:
            means.append(float(np.mean(bucket)))
            stds.append(float(np.std(bucket)))
            days.append(current)
            bucket = []
            current = day
        bucket.append(float(value))
    means.append(float(np.mean(bucket)))
    stds.append(float(np.std(bucket)))
    days.append(current)
    span = (days[-1] - days[0]).days + 1
    return DailySeries(
        days=days,
        means=np.asarray(means),
        stds=np.asarray(stds),
        gap_days=span - len(days),
        source=raw.source,
    )


@dataclass
class ForecastFrame:
    """A model-ready bundle plus what is needed to score in level space.

    ``level_targets[t]`` is the next day's mean in original units and
    ``prev_levels[t]`` the current day's mean, the per-step anchor for
    mapping differenced predictions back to levels.
    """

    bundle: SeriesBundle
    level_targets: np.ndarray
    prev_levels: np.ndarray
    differenced: bool


def make_daily_frame(
    daily: DailySeries,
    use_differences: bool = True,
    difference_all: bool = False,
) -> ForecastFrame:
    """Build (features, next-day-mean target) pairs from a daily series.

    Features are [day mean, day std]. With ``use_differences`` the mean
    channel and the target are first-order differenced (the std channel
    passes through unless ``difference_all``); metrics are intended to be
    computed in level space via the frame's anchors.
    """
    count = len(daily.days)
    needed = 3 if use_differences else 2
    if count < needed:
        raise ConfigurationError(
            f"need at least {needed} aggregated days, got {count}"
        )
    means, stds = daily.means, daily.stds
    if use_differences:
        diff_means, _ = difference(means)
        features = np.column_stack(
            [diff_means[:-1], difference(stds)[0][:-1] if difference_all else stds[1:-1]]
        )
        targets = diff_means[1:]
        level_targets = means[2:]
        prev_levels = means[1:-1]
    else:
        features = np.column_stack([means[:-1], stds[:-1]])
        targets = means[1:]
        level_targets = means[1:]
        prev_levels = means[:-1]
    bundle = SeriesBundle(
        inputs=features,
        targets=targets,
        regime_labels=None,
        split=None,
        name=daily.source or "daily",
    )
    if bundle.length >= 5:
        bundle = split_60_20_20(bundle)
    return ForecastFrame(
        bundle=bundle,
        level_targets=level_targets,
        prev_levels=prev_levels,
        differenced=use_differences,
    )


def make_value_frame(
    values: np.ndarray, use_differences: bool = False
) -> ForecastFrame:
    """Next-value forecasting pairs from a plain scalar series."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    needed = 3 if use_differences else 2
    if values.shape[0] < needed:
        raise ConfigurationError(f"need at least {needed} values, got {values.shape[0]}")
    if use_differences:
        diffs, _ = difference(values)
        bundle = SeriesBundle(inputs=diffs[:-1], targets=diffs[1:], name="values")
        level_targets = values[2:]
        prev_levels = values[1:-1]
    else:
        bundle = SeriesBundle(inputs=values[:-1], targets=values[1:], name="values")
        level_targets = values[1:]
        prev_levels = values[:-1]
    if bundle.length >= 5:
        bundle = split_60_20_20(bundle)
    return ForecastFrame(
        bundle=bundle,
        level_targets=level_targets,
        prev_levels=prev_levels,
        differenced=use_differences,
    )


def difference(series: np.ndarray) -> tuple[np.ndarray, float]:
    """First-order differences plus the anchor needed to reconstruct levels."""
    series = np.asarray(series, dtype=np.float64).reshape(-1)
    if series.shape[0] < 2:
        raise ConfigurationError("differencing needs at least two points")
    return np.diff(series), float(series[0])


def reconstruct(diffs: np.ndarray, anchor: float) -> np.ndarray:
    """Exact inverse of :func:`difference`."""
    diffs = np.asarray(diffs, dtype=np.float64).reshape(-1)
    levels = np.empty(diffs.shape[0] + 1)
    levels[0] = anchor
    np.cumsum(diffs, out=levels[1:])
    levels[1:] += anchor
    return levels


def split_60_20_20(bundle: SeriesBundle) -> SeriesBundle:
    """Chronological 60/20/20 split at floor(0.6 T) and floor(0.8 T)."""
    length = bundle.length
    if length < 5:
        raise ConfigurationError(f"need at least 5 steps to split, got {length}")
    return replace(bundle, split=(int(0.6 * length), int(0.8 * length)))


def fit_calibration(
    val_predictions: np.ndarray, val_targets: np.ndarray
) -> Calibration:
    """Least-squares affine fit of targets on predictions.

    Constant predictions make the slope unidentifiable; the fit then falls
    back to intercept-only (slope 0, intercept = target mean) and flags it.
    """
    preds = np.asarray(val_predictions, dtype=np.float64).reshape(-1)
    targets = np.asarray(val_targets, dtype=np.float64).reshape(-1)
    if preds.shape[0] != targets.shape[0]:
        raise ConfigurationError("predictions and targets must align")
    if preds.shape[0] < 2:
        raise ConfigurationError("need at least two validation points")
    centered = preds - preds.mean()
    variance = centered @ centered
    if variance == 0.0:
        return Calibration(0.0, float(targets.mean()), intercept_only=True)
    slope = float((centered @ (targets - targets.mean())) / variance)
    intercept = float(targets.mean() - slope * preds.mean())
    return Calibration(slope, intercept)


def apply_calibration(calibration: Calibration, predictions: np.ndarray) -> np.ndarray:
    predictions = np.asarray(predictions, dtype=np.float64)
    return calibration.slope * predictions + calibration.intercept


def write_bundle_csv(path: str | Path, bundle: SeriesBundle) -> None:
    """Write the scalar-series schema ``t, x, y, regime`` (regime optional)."""
    if bundle.feature_dim != 1 or bundle.target_dim != 1:
        raise ConfigurationError("bundle CSV schema covers scalar series only")
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        header = ["t", "x", "y"]
        if bundle.regime_labels is not None:
            header.append("regime")
        writer.writerow(header)
        for t in range(bundle.length):
            row = [str(t), repr(float(bundle.inputs[t, 0])), repr(float(bundle.targets[t, 0]))]
            if bundle.regime_labels is not None:
                row.append(str(int(bundle.regime_labels[t])))
            writer.writerow(row)


def read_bundle_csv(path: str | Path) -> SeriesBundle:
    """Read the ``t, x, y[, regime]`` schema back into a split bundle."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file not found: {path}")
    xs: list[float] = []
    ys: list[float] = []
    labels: list[int] = []
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        if "x" not in fields or "y" not in fields:
            raise ConfigurationError(
                f"{path}: expected columns t, x, y (got {fields})"
            )
        has_regime = "regime" in fields
        for row_index, row in enumerate(reader, start=2):
            try:
                xs.append(float(row["x"]))
                ys.append(float(row["y"]))
                if has_regime:
                    labels.append(int(row["regime"]))
            except (ValueError, TypeError) as exc:
                raise ConfigurationError(
                    f"{path}: row {row_index}: cannot parse ({exc})"
                ) from exc
    if not xs:
        raise ConfigurationError(f"{path}: no data rows")
    bundle = SeriesBundle(
        inputs=np.asarray(xs),
        targets=np.asarray(ys),
        regime_labels=np.asarray(labels) if labels else None,
        name=str(path),
    )
    if bundle.length >= 5:
        bundle = split_60_20_20(bundle)
    return bundle
