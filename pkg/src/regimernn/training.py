"""Joint sequential training of all weights, with validation-driven early stop.

Every time step runs: forward pass, squared-error loss, analytic
truncated-backprop update of all weights, row-softmax renormalization of
the transition matrix, then the belief/covariance filter update. After each
epoch's pass over the training segment, the validation segment is rolled
with frozen weights (filter still active) and the parameters achieving the
lowest mean validation loss are kept.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .backprop import GateTrace, clip_gradients, tbptt_gradients
from .cell import cell_step
from .errors import ConfigurationError, DivergenceError
from .params import ModelParams
from .series import SeriesBundle, augment_bias
from .switching import SwitchConfig, initial_switch_state, switch_step

# Smallest transition probability kept during training; prevents the chain
# from developing exactly-absorbing regimes the filter could never leave.
TRANSITION_FLOOR = 1e-3


@dataclass
class Hyperparams:
    """Training-time knobs; defaults follow the synthetic-benchmark grids."""

    num_regimes: int = 2
    hidden_dim: int = 16
    truncation: int = 4  # trailing-window length for backprop
    learning_rate: float = 3e-4
    beta: float = 0.7  # error-covariance smoothing, forwarded to the filter
    dirichlet_rho0: float = 0.5  # diagonal concentration of the transition init
    max_epochs: int = 200
    early_stop_tolerance: int = 20
    seed: int = 0
    grad_clip: Optional[float] = 5.0  # global-norm cap; None disables clipping

    def validate(self) -> None:
        if self.num_regimes < 1:
            raise ConfigurationError("num_regimes must be >= 1")
        if self.hidden_dim < 1 or self.truncation < 1:
            raise ConfigurationError("hidden_dim and truncation must be >= 1")
        if self.learning_rate < 0.0:
            raise ConfigurationError("learning_rate must be >= 0")
        if not 0.0 <= self.beta < 1.0:
            raise ConfigurationError("beta must lie in [0, 1)")
        if not 0.0 < self.dirichlet_rho0 < 1.0:
            raise ConfigurationError("dirichlet_rho0 must lie in (0, 1)")
        if self.max_epochs < 1 or self.early_stop_tolerance < 0:
            raise ConfigurationError("bad epoch or early-stop limits")
        if self.grad_clip is not None and self.grad_clip <= 0.0:
            raise ConfigurationError("grad_clip must be positive or None")


def init_params(hp: Hyperparams, input_dim: int, output_dim: int) -> ModelParams:
    """Xavier-uniform weights; Dirichlet-initialized transition rows.

    Row k of the transition matrix is drawn from a Dirichlet whose
    concentration puts ``rho0`` on the diagonal entry and spreads the rest
    evenly, so the expected self-transition probability equals ``rho0``.
    Deterministic for a fixed seed.
    """
    if input_dim < 1 or output_dim < 1:
        raise ConfigurationError("input_dim and output_dim must be >= 1")
    hp.validate()
    rng = np.random.default_rng(hp.seed)
    k, n_h = hp.num_regimes, hp.hidden_dim

    def xavier(shape: tuple[int, ...]) -> np.ndarray:
        fan_in, fan_out = shape[-1], shape[-2]
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=shape)

    input_weights = xavier((k, n_h, input_dim))
    recurrent_weights = xavier((k, n_h, n_h))
    output_weights = xavier((output_dim, n_h))
    if k == 1:
        transition = np.ones((1, 1))
    else:
        off_diag = (1.0 - hp.dirichlet_rho0) / (k - 1)
        transition = np.empty((k, k))
        for i in range(k):
            concentration = np.full(k, off_diag)
            concentration[i] = hp.dirichlet_rho0
            row = rng.dirichlet(concentration)
            transition[i] = row / row.sum()
    return ModelParams(input_weights, recurrent_weights, output_weights, transition)


def row_softmax(matrix: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row max for stability."""
    shifted = matrix - matrix.max(axis=1, keepdims=True)
    expd = np.exp(shifted)
    return expd / expd.sum(axis=1, keepdims=True)


def renormalize_transition(params: ModelParams) -> ModelParams:
    """Replace each transition row by its softmax (in place); returns params.

    Not idempotent: softmax of an already-stochastic row flattens it toward
    uniform. Applied after every gradient update, exactly as the training
    loop requires.
    """
    params.transition = row_softmax(params.transition)
    return params


@dataclass
class TrainReport:
    """Per-epoch losses plus the belief trajectory of the final epoch."""

    train_losses: np.ndarray  # (epochs_run,) mean per-step squared error
    val_losses: np.ndarray  # (epochs_run,)
    best_epoch: int  # 1-based epoch achieving the lowest validation loss
    best_val_loss: float
    epochs_run: int
    stopped_early: bool
    belief_trajectory: np.ndarray  # (val_end, K) beliefs seen in the last epoch


@dataclass
class EvalResult:
    predictions: np.ndarray  # (n, n_y)
    beliefs: np.ndarray  # (n, K) post-update beliefs per scored step
    rmse: float
    mae: float
    start: int  # absolute index of the first scored step


StepHook = Callable[[int, int, ModelParams], None]


def train(
    series: SeriesBundle,
    hp: Hyperparams,
    switch: Optional[SwitchConfig] = None,
    on_step: Optional[StepHook] = None,
) -> tuple[ModelParams, TrainReport]:
    """Run the sequential learning loop; returns the best weights and a report.

    ``hp.beta`` is authoritative: any filter config passed in is rebuilt
    with it. ``on_step(epoch, t, params)`` is called after each training
    update, for progress reporting or trajectory capture.
    """
    hp.validate()
    if switch is None:
        switch = SwitchConfig(beta=hp.beta)
    elif switch.beta != hp.beta:
        switch = replace(switch, beta=hp.beta)
    if series.split is None:
        raise ConfigurationError("series has no train/validation split")
    train_end, val_end = series.split
    if val_end <= train_end:
        raise ConfigurationError("empty validation segment")

    inputs = augment_bias(series.inputs)
    targets = series.targets
    params = init_params(hp, inputs.shape[1], targets.shape[1])
    num_regimes, n_h = hp.num_regimes, hp.hidden_dim
    eta = hp.learning_rate

    best_params = params.copy()
    best_val = math.inf
    best_epoch = 0
    strikes = 0
    stopped_early = False
    train_losses: list[float] = []
    val_losses: list[float] = []
    beliefs = np.empty((val_end, num_regimes))

    hidden = np.zeros(n_h)
    state = initial_switch_state(num_regimes, targets.shape[1])
    for epoch in range(1, hp.max_epochs + 1):
        traces: deque = deque(maxlen=hp.truncation + 1)
        gates: deque = deque(maxlen=hp.truncation + 1)
        next_gate: Optional[GateTrace] = None
        train_sum = 0.0
        for t in range(train_end):
            trace = cell_step(hidden, state.belief, inputs[t], params)
            traces.append(trace)
            gates.append(next_gate)
            error = targets[t] - trace.combined_prediction
            loss = float(error @ error)
            if not math.isfinite(loss):
                raise DivergenceError(
                    f"non-finite training loss at epoch {epoch}, step {t}"
                )
            train_sum += loss
            grads = tbptt_gradients(traces, gates, params, error)
            if hp.grad_clip is not None:
                clip_gradients(grads, hp.grad_clip)
            params.input_weights -= eta * grads.d_input_weights
            params.recurrent_weights -= eta * grads.d_recurrent_weights
            params.output_weights -= eta * grads.d_output_weights
            # The transition step happens in the log domain, so the row-wise
            # softmax that restores stochasticity is a no-op at zero gradient
            # instead of contracting the matrix toward uniform. The entry
            # floor keeps every regime reachable (no absorbing corners), so
            # a mispredicting regime can always lose the belief.
            params.transition = np.log(
                np.maximum(params.transition, TRANSITION_FLOOR)
            )
            params.transition -= eta * grads.d_transition
            renormalize_transition(params)
            new_state = switch_step(
                state, trace.regime_predictions, targets[t], params.transition, switch
            )
            next_gate = GateTrace(
                likelihoods=new_state.last_likelihoods,
                unnormalized=new_state.last_unnormalized,
                prior_belief=state.belief,
            )
            beliefs[t] = new_state.belief
            hidden = trace.combined_hidden
            state = new_state
            if on_step is not None:
                on_step(epoch, t, params)

        val_sum = 0.0
        for t in range(train_end, val_end):
            trace = cell_step(hidden, state.belief, inputs[t], params)
            error = targets[t] - trace.combined_prediction
            loss = float(error @ error)
            if not math.isfinite(loss):
                raise DivergenceError(
                    f"non-finite validation loss at epoch {epoch}, step {t}"
                )
            val_sum += loss
            state = switch_step(
                state, trace.regime_predictions, targets[t], params.transition, switch
            )
            beliefs[t] = state.belief
            hidden = trace.combined_hidden

        train_losses.append(train_sum / train_end)
        val_mean = val_sum / (val_end - train_end)
        val_losses.append(val_mean)
        if val_mean < best_val:
            best_val = val_mean
            best_params = params.copy()
            best_epoch = epoch
            strikes = 0
        else:
            strikes += 1
            if strikes > hp.early_stop_tolerance:
                stopped_early = True
                break

    report = TrainReport(
        train_losses=np.asarray(train_losses),
        val_losses=np.asarray(val_losses),
        best_epoch=best_epoch,
        best_val_loss=best_val,
        epochs_run=len(train_losses),
        stopped_early=stopped_early,
        belief_trajectory=beliefs,
    )
    return best_params, report


def evaluate(
    series: SeriesBundle,
    params: ModelParams,
    switch: SwitchConfig,
    segment: Optional[str | tuple[int, int]] = None,
) -> EvalResult:
    """Roll the model forward with the filter active but weights frozen.

    The rollout always starts at the beginning of the sequence so the
    hidden state, belief and covariances are warmed up through whatever
    precedes the scored segment; metrics cover only ``segment`` (a name
    understood by the bundle's split, an explicit (start, end), or the
    whole sequence when None).
    """
    inputs = augment_bias(series.inputs)
    targets = series.targets
    if inputs.shape[1] != params.input_dim:
        raise ConfigurationError(
            f"series provides {inputs.shape[1] - 1} features plus bias but the "
            f"model expects input dim {params.input_dim}"
        )
    if targets.shape[1] != params.output_dim:
        raise ConfigurationError(
            f"target dim {targets.shape[1]} does not match model output dim "
            f"{params.output_dim}"
        )
    if segment is None:
        start, end = 0, series.length
    elif isinstance(segment, str):
        start, end = series.segment_bounds(segment)
    else:
        start, end = segment
    if not 0 <= start < end <= series.length:
        raise ConfigurationError(f"segment ({start}, {end}) out of range")

    hidden = np.zeros(params.hidden_dim)
    state = initial_switch_state(params.num_regimes, params.output_dim)
    predictions = np.empty((end - start, params.output_dim))
    beliefs = np.empty((end - start, params.num_regimes))
    for t in range(end):
        trace = cell_step(hidden, state.belief, inputs[t], params)
        state = switch_step(
            state, trace.regime_predictions, targets[t], params.transition, switch
        )
        if t >= start:
            predictions[t - start] = trace.combined_prediction
            beliefs[t - start] = state.belief
        hidden = trace.combined_hidden

    errors = targets[start:end] - predictions
    rmse = float(np.sqrt(np.mean(np.sum(errors**2, axis=1))))
    mae = float(np.mean(np.abs(errors)))
    return EvalResult(
        predictions=predictions, beliefs=beliefs, rmse=rmse, mae=mae, start=start
    )
