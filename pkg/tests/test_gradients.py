"""Analytic truncated-backprop gradients against finite differences."""

import numpy as np
import pytest

from regimernn import tbptt_gradients
from reference_impl import (
    assert_gradients_close,
    numeric_gradients,
    random_model,
    random_rollout,
)


def analytic_arrays(params, traces, gates, error):
    grads = tbptt_gradients(traces, gates, params, error)
    return grads.arrays()


class TestOutputWeightGradient:
    def test_matches_closed_form(self):
        """The readout gradient is -2 e hᵀ at the final step."""
        rng = np.random.default_rng(7)
        params = random_model(rng, 2, 3, 2, 2)
        traces, gates, error, _ = random_rollout(rng, params, length=5)
        grads = tbptt_gradients(traces, gates, params, error)
        expected = -2.0 * np.outer(error, traces[-1].combined_hidden)
        np.testing.assert_allclose(grads.d_output_weights, expected, rtol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(8)
        params = random_model(rng, 2, 3, 2, 1)
        traces, gates, error, target = random_rollout(rng, params, length=4)
        analytic = analytic_arrays(params, traces, gates, error)
        numeric = numeric_gradients(params, traces, gates, target)
        assert_gradients_close([analytic[2]], [numeric[2]])


class TestZeroError:
    def test_all_gradients_vanish(self):
        """Every chain starts at -2eᵀ, so zero error zeroes every gradient."""
        rng = np.random.default_rng(9)
        params = random_model(rng, 3, 4, 3, 2)
        traces, gates, _, _ = random_rollout(rng, params, length=6, window=4)
        grads = tbptt_gradients(traces, gates, params, np.zeros(2))
        for arr in grads.arrays():
            np.testing.assert_array_equal(arr, 0.0)


class TestFullGradient:
    def test_small_mixed_configuration(self):
        """All four gradients match central differences on a K=2 instance."""
        rng = np.random.default_rng(10)
        params = random_model(rng, 2, 3, 3, 1)
        traces, gates, error, target = random_rollout(rng, params, length=6, window=5)
        analytic = analytic_arrays(params, traces, gates, error)
        numeric = numeric_gradients(params, traces, gates, target)
        assert_gradients_close(analytic, numeric)

    def test_window_touching_sequence_start(self):
        """Short prefix windows carry a leading gate of None and still match."""
        rng = np.random.default_rng(11)
        params = random_model(rng, 3, 2, 2, 2)
        traces, gates, error, target = random_rollout(rng, params, length=3)
        assert gates[0] is None
        analytic = analytic_arrays(params, traces, gates, error)
        numeric = numeric_gradients(params, traces, gates, target)
        assert_gradients_close(analytic, numeric)

    def test_single_step_window(self):
        rng = np.random.default_rng(12)
        params = random_model(rng, 2, 4, 2, 1)
        traces, gates, error, target = random_rollout(rng, params, length=5, window=1)
        analytic = analytic_arrays(params, traces, gates, error)
        numeric = numeric_gradients(params, traces, gates, target)
        assert_gradients_close(analytic, numeric)

    def test_interior_gate_gap_rejected(self):
        rng = np.random.default_rng(13)
        params = random_model(rng, 2, 2, 2, 1)
        traces, gates, error, _ = random_rollout(rng, params, length=4)
        gates[2] = None
        with pytest.raises(ValueError):
            tbptt_gradients(traces, gates, params, error)
