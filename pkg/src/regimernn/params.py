"""Container for all trainable weights of the regime-switching predictor."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError

# Tolerance for row-stochasticity of the transition matrix.
ROW_SUM_TOL = 1e-12


@dataclass
class ModelParams:
    """Trainable weights.

    The input dimension includes the constant bias slot appended to every
    input vector at ingestion, so there are no separate bias vectors.
    ``transition[i, j]`` is the probability of moving from regime ``i`` to
    regime ``j``; every row sums to one.
    """

    input_weights: np.ndarray  # (K, n_h, n_x) per-regime input-to-hidden maps
    recurrent_weights: np.ndarray  # (K, n_h, n_h) per-regime hidden-to-hidden maps
    output_weights: np.ndarray  # (n_y, n_h) shared readout
    transition: np.ndarray  # (K, K) regime transition matrix

    @property
    def num_regimes(self) -> int:
        return self.input_weights.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.input_weights.shape[1]

    @property
    def input_dim(self) -> int:
        return self.input_weights.shape[2]

    @property
    def output_dim(self) -> int:
        return self.output_weights.shape[0]

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (
            self.input_weights,
            self.recurrent_weights,
            self.output_weights,
            self.transition,
        )

    def copy(self) -> "ModelParams":
        return ModelParams(*(a.copy() for a in self.arrays()))

    def validate(self) -> None:
        k, n_h, _ = self.input_weights.shape
        if k < 1:
            raise ConfigurationError("need at least one regime")
        if self.recurrent_weights.shape != (k, n_h, n_h):
            raise ConfigurationError(
                f"recurrent weights shape {self.recurrent_weights.shape} does not "
                f"match input weights ({k} regimes, hidden dim {n_h})"
            )
        if self.output_weights.ndim != 2 or self.output_weights.shape[1] != n_h:
            raise ConfigurationError(
                f"output weights shape {self.output_weights.shape} incompatible "
                f"with hidden dim {n_h}"
            )
        if self.transition.shape != (k, k):
            raise ConfigurationError(
                f"transition matrix shape {self.transition.shape}, expected ({k}, {k})"
            )
        for name, arr in zip(
            ("input_weights", "recurrent_weights", "output_weights", "transition"),
            self.arrays(),
        ):
            if not np.isfinite(arr).all():
                raise NumericError(f"{name} contains non-finite entries")
        if (self.transition < 0.0).any() or (self.transition > 1.0).any():
            raise ConfigurationError("transition entries must lie in [0, 1]")
        row_sums = self.transition.sum(axis=1)
        max_dev = np.abs(row_sums - 1.0).max()
        if max_dev > ROW_SUM_TOL:
            raise ConfigurationError(
                f"transition rows must sum to 1 (max deviation {max_dev:.3e})"
            )
