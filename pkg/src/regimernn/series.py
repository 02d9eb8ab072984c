"""Aligned input/target sequences with chronological split boundaries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError


def _as_2d(values: np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    return arr


@dataclass
class SeriesBundle:
    """One sequence ready for training or evaluation.

    ``inputs[t]`` holds the raw feature vector for step ``t`` (the constant
    bias slot is appended later, at model ingestion) and ``targets[t]`` the
    value to predict at that step. ``regime_labels``, when present, are the
    1-based generator regimes; ``split = (train_end, val_end)`` bounds the
    chronological train/validation/test segments.
    """

    inputs: np.ndarray  # (T, n_features)
    targets: np.ndarray  # (T, n_y)
    regime_labels: Optional[np.ndarray] = None
    split: Optional[tuple[int, int]] = None
    name: str = field(default="")

    def __post_init__(self) -> None:
        self.inputs = _as_2d(self.inputs)
        self.targets = _as_2d(self.targets)
        if self.regime_labels is not None:
            self.regime_labels = np.asarray(self.regime_labels, dtype=np.int64)
        self.validate()

    @property
    def length(self) -> int:
        return self.inputs.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def target_dim(self) -> int:
        return self.targets.shape[1]

    def validate(self) -> None:
        if self.targets.shape[0] != self.length:
            raise ConfigurationError(
                f"inputs ({self.length}) and targets ({self.targets.shape[0]}) "
                "have different lengths"
            )
        if self.regime_labels is not None and self.regime_labels.shape != (self.length,):
            raise ConfigurationError("regime labels must align with the sequence")
        if self.split is not None:
            train_end, val_end = self.split
            if not 0 < train_end < val_end <= self.length:
                raise ConfigurationError(
                    f"split {self.split} not ordered within length {self.length}"
                )

    def segment_bounds(self, which: str) -> tuple[int, int]:
        """Absolute (start, end) of a named segment."""
        if which == "all":
            return 0, self.length
        if self.split is None:
            raise ConfigurationError("series has no split boundaries")
        train_end, val_end = self.split
        bounds = {
            "train": (0, train_end),
            "val": (train_end, val_end),
            "test": (val_end, self.length),
        }
        if which not in bounds:
            raise ConfigurationError(
                f"unknown segment {which!r}; choose train, val, test or all"
            )
        return bounds[which]


def augment_bias(inputs: np.ndarray) -> np.ndarray:
    """Append the constant-1 bias column; weights then carry biases implicitly."""
    inputs = _as_2d(inputs)
    return np.hstack([inputs, np.ones((inputs.shape[0], 1))])
