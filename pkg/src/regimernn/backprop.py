"""Analytic truncated-backprop gradients for the per-step squared error.

The loss at the window's final step is differentiated through the trailing
hidden-state chain. The per-step Jacobian is the belief-weighted sum of the
regime Jacobians ``diag(tanh'(z_k)) W_hh[k]``. The transition matrix enters
through the mixing beliefs: each window step's belief is treated as the
output of exactly one filtering update whose evidence vector and prior
belief are held constant, so the likelihood path is not differentiated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cell import StepTrace
from .params import ModelParams


@dataclass
class GateTrace:
    """The filtering update that produced a step's mixing belief.

    ``None`` takes its place for the first step of a sequence, whose belief
    is the initial one and does not depend on the transition matrix.
    """

    likelihoods: np.ndarray  # (K,) evidence entering the update (any common scale)
    unnormalized: np.ndarray  # (K,) belief numerator before normalization
    prior_belief: np.ndarray  # (K,) belief the update started from
    total: float = field(init=False)  # sum of the numerator, cached

    def __post_init__(self) -> None:
        self.total = float(self.unnormalized.sum())


@dataclass
class GradientSet:
    """Partial derivatives, one array per entry of :class:`ModelParams`."""

    d_input_weights: np.ndarray  # (K, n_h, n_x)
    d_recurrent_weights: np.ndarray  # (K, n_h, n_h)
    d_output_weights: np.ndarray  # (n_y, n_h)
    d_transition: np.ndarray  # (K, K)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (
            self.d_input_weights,
            self.d_recurrent_weights,
            self.d_output_weights,
            self.d_transition,
        )

    def global_norm(self) -> float:
        total = 0.0
        for arr in self.arrays():
            flat = arr.ravel()
            total += float(flat @ flat)
        return math.sqrt(total)


def clip_gradients(grads: GradientSet, max_norm: float) -> float:
    """Scale all gradients in place to a global norm cap; returns the pre-clip norm."""
    norm = grads.global_norm()
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for arr in grads.arrays():
            arr *= scale
    return norm


def tbptt_gradients(
    traces: Sequence[StepTrace],
    gates: Sequence[Optional[GateTrace]],
    params: ModelParams,
    error: np.ndarray,
) -> GradientSet:
    """Gradients of ``eᵀe`` at the window's final step.

    ``traces`` holds the trailing window in chronological order (at most
    truncation + 1 steps; shorter near the sequence start). ``gates[i]``
    records how ``traces[i].belief_used`` came out of the previous filter
    update. ``error`` is the combined prediction error at the final step.
    """
    count = len(traces)
    if count == 0 or count != len(gates):
        raise ValueError("traces and gates must be non-empty and aligned")
    num_regimes, n_h = params.num_regimes, params.hidden_dim
    n_x = params.input_dim
    last = traces[-1]
    d_output = (-2.0 * error)[:, None] * last.combined_hidden[None, :]
    recurrent_2d = params.recurrent_weights.reshape(num_regimes * n_h, n_h)

    # Backward sweep: adjoint of the combined hidden state at each window
    # position, and the shared factor belief_k * tanh'(z_k) * adjoint.
    # Window arrays are gathered into buffers as the sweep runs so the
    # cross-window gradient sums reduce to single matrix products.
    adjoints = np.empty((count, n_h))
    weighted = np.empty((count, num_regimes, n_h))
    inputs = np.empty((count, n_x))
    hidden_ins = np.empty((count, n_h))
    regime_hidden = np.empty((count, num_regimes, n_h))
    beliefs = np.empty((count, num_regimes))
    g = -2.0 * (error @ params.output_weights)
    for i in range(count - 1, -1, -1):
        trace = traces[i]
        adjoints[i] = g
        target = weighted[i]
        np.multiply(trace.regime_fprime, g, out=target)
        target *= trace.belief_used[:, None]
        inputs[i] = trace.input
        hidden_ins[i] = trace.hidden_in
        regime_hidden[i] = trace.regime_hidden
        beliefs[i] = trace.belief_used
        if i:
            g = target.reshape(-1) @ recurrent_2d

    weighted_2d = weighted.reshape(count, num_regimes * n_h)
    d_input = (weighted_2d.T @ inputs).reshape(num_regimes, n_h, n_x)
    d_recurrent = (weighted_2d.T @ hidden_ins).reshape(num_regimes, n_h, n_h)

    # Gates can be absent only as a leading prefix: the sole step with no
    # preceding filter update is the first of the sequence.
    start = 0
    while start < count and gates[start] is None:
        start += 1
    if any(gates[i] is None for i in range(start, count)):
        raise ValueError("a missing gate may only open the window")
    if start < count:
        gated = range(start, count)
        evidence = np.empty((count - start, num_regimes))
        priors = np.empty((count - start, num_regimes))
        totals = np.empty(count - start)
        for row, i in enumerate(gated):
            evidence[row] = gates[i].likelihoods
            priors[row] = gates[i].prior_belief
            totals[row] = gates[i].total
        # d loss / d belief per gated step, then back through the belief
        # normalization onto the transition matrix, evidence held constant.
        sensitivity = np.matmul(
            regime_hidden[start:], adjoints[start:, :, None]
        )[:, :, 0]
        u = (
            sensitivity - (sensitivity * beliefs[start:]).sum(axis=1, keepdims=True)
        ) / totals[:, None]
        d_transition = priors.T @ (u * evidence)
    else:
        d_transition = np.zeros((num_regimes, num_regimes))

    return GradientSet(d_input, d_recurrent, d_output, d_transition)
