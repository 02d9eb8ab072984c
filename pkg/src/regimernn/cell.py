"""Multi-regime recurrent cell.

Each regime propagates the shared hidden state with its own weights,
``h_k = tanh(W_hh[k] h_prev + W_xh[k] x)``; the regime hidden states are
mixed by the current belief vector and fed through a shared linear readout.
The cell emits no gated cell-state vector, but :class:`StepTrace` and
:func:`cell_step` do not assume its absence, so gated variants can reuse
the surrounding machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError, StateError
from .params import ModelParams

# Mixing weights further from normalized than this are rejected.
BELIEF_ATOL = 1e-8


@dataclass
class StepTrace:
    """Intermediate quantities of one forward step, retained for backprop."""

    input: np.ndarray  # x_t, (n_x,)
    hidden_in: np.ndarray  # hidden state entering the step, (n_h,)
    belief_used: np.ndarray  # mixing weights applied at this step, (K,)
    regime_preactivations: np.ndarray  # (K, n_h)
    regime_hidden: np.ndarray  # (K, n_h)
    regime_fprime: np.ndarray  # (K, n_h) activation derivative 1 - tanh(z)^2
    combined_hidden: np.ndarray  # (n_h,)
    regime_predictions: np.ndarray  # (K, n_y)
    combined_prediction: np.ndarray  # (n_y,)


def regime_forward(
    h_prev: np.ndarray, x: np.ndarray, params: ModelParams, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """One hidden-state transition under regime ``k`` (0-based).

    Returns ``(preactivation, hidden)`` with
    ``hidden = tanh(W_hh[k] h_prev + W_xh[k] x)``.
    """
    if not 0 <= k < params.num_regimes:
        raise ConfigurationError(
            f"regime index {k} out of range for {params.num_regimes} regimes"
        )
    h_prev = np.asarray(h_prev, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if h_prev.shape != (params.hidden_dim,):
        raise ConfigurationError(
            f"hidden state shape {h_prev.shape}, expected ({params.hidden_dim},)"
        )
    if x.shape != (params.input_dim,):
        raise ConfigurationError(
            f"input shape {x.shape}, expected ({params.input_dim},)"
        )
    if not (np.isfinite(h_prev).all() and np.isfinite(x).all()):
        raise NumericError("non-finite hidden state or input")
    z = params.recurrent_weights[k] @ h_prev + params.input_weights[k] @ x
    return z, np.tanh(z)


def combine_hidden(regime_hidden: np.ndarray, belief: np.ndarray) -> np.ndarray:
    """Belief-weighted mixture of the per-regime hidden states."""
    regime_hidden = np.asarray(regime_hidden, dtype=np.float64)
    belief = np.asarray(belief, dtype=np.float64)
    if belief.ndim != 1 or regime_hidden.shape[0] != belief.shape[0]:
        raise ConfigurationError(
            f"belief length {belief.shape} does not match "
            f"{regime_hidden.shape[0]} regime states"
        )
    if (belief < -BELIEF_ATOL).any() or abs(belief.sum() - 1.0) > BELIEF_ATOL:
        raise StateError(
            f"mixing weights must be a distribution (sum {belief.sum()!r})"
        )
    return belief @ regime_hidden


def output_map(hidden: np.ndarray, params: ModelParams) -> np.ndarray:
    """Shared linear readout of a hidden state."""
    hidden = np.asarray(hidden, dtype=np.float64)
    if hidden.shape != (params.hidden_dim,):
        raise ConfigurationError(
            f"hidden state shape {hidden.shape}, expected ({params.hidden_dim},)"
        )
    return params.output_weights @ hidden


def cell_step(
    h_prev: np.ndarray,
    belief_prev: np.ndarray,
    x: np.ndarray,
    params: ModelParams,
) -> StepTrace:
    """Full forward step: per-regime propagation, belief mixing, readout.

    Vectorized over regimes; equivalent to calling :func:`regime_forward`
    per regime, :func:`combine_hidden` and :func:`output_map`.
    """
    if h_prev.shape != (params.hidden_dim,) or x.shape != (params.input_dim,):
        raise ConfigurationError(
            f"step shapes h{h_prev.shape} x{x.shape} incompatible with model "
            f"(n_h={params.hidden_dim}, n_x={params.input_dim})"
        )
    z = params.recurrent_weights @ h_prev + params.input_weights @ x
    regime_hidden = np.tanh(z)
    combined = belief_prev @ regime_hidden
    regime_predictions = regime_hidden @ params.output_weights.T
    prediction = params.output_weights @ combined
    return StepTrace(
        input=x,
        hidden_in=h_prev,
        belief_used=belief_prev,
        regime_preactivations=z,
        regime_hidden=regime_hidden,
        regime_fprime=1.0 - regime_hidden**2,
        combined_hidden=combined,
        regime_predictions=regime_predictions,
        combined_prediction=prediction,
    )
