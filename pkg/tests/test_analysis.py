"""Regime-recovery diagnostics on constructed belief trajectories."""

import numpy as np
import pytest

from regimernn import best_regime_mapping, crossover_lags, regime_accuracy
from regimernn.analysis import switch_indices


def beliefs_from_picks(picks, num_components=2, confidence=0.9):
    beliefs = np.full((len(picks), num_components), (1 - confidence) / (num_components - 1))
    for t, p in enumerate(picks):
        beliefs[t, p] = confidence
    return beliefs


class TestSwitchIndices:
    def test_positions(self):
        labels = np.array([1, 1, 2, 2, 2, 1, 1])
        np.testing.assert_array_equal(switch_indices(labels), [2, 5])

    def test_constant_labels(self):
        assert switch_indices(np.ones(5, dtype=int)).size == 0


class TestMapping:
    def test_identity_alignment(self):
        labels = np.array([1, 1, 2, 2])
        beliefs = beliefs_from_picks([0, 0, 1, 1])
        assert best_regime_mapping(beliefs, labels) == {0: 1, 1: 2}

    def test_swapped_alignment(self):
        """Component order is arbitrary; the swapped assignment must win."""
        labels = np.array([1, 1, 2, 2])
        beliefs = beliefs_from_picks([1, 1, 0, 0])
        assert best_regime_mapping(beliefs, labels) == {0: 2, 1: 1}

    def test_more_components_than_labels(self):
        labels = np.array([1, 1, 1, 1])
        beliefs = beliefs_from_picks([2, 2, 2, 0], num_components=3)
        mapping = best_regime_mapping(beliefs, labels)
        assert mapping[2] == 1


class TestAccuracy:
    def test_perfect_up_to_permutation(self):
        labels = np.array([2, 2, 1, 1, 2])
        beliefs = beliefs_from_picks([0, 0, 1, 1, 0])
        assert regime_accuracy(beliefs, labels) == 1.0

    def test_exclusion_window(self):
        """Mistakes confined to the post-switch window do not count."""
        labels = np.array([1] * 10 + [2] * 10)
        picks = [0] * 10 + [0] * 3 + [1] * 7  # 3 lagged steps after the switch
        beliefs = beliefs_from_picks(picks)
        assert regime_accuracy(beliefs, labels) == pytest.approx(17 / 20)
        assert regime_accuracy(beliefs, labels, exclude_after_switch=3) == 1.0

    def test_first_step_always_scored(self):
        """The exclusion windows start at switches, so step 0 survives even
        huge windows."""
        labels = np.array([1, 2, 1, 2])
        beliefs = beliefs_from_picks([0, 1, 0, 1])
        assert regime_accuracy(beliefs, labels, exclude_after_switch=10) == 1.0


class TestCrossoverLags:
    def test_immediate_and_lagged(self):
        labels = np.array([1] * 5 + [2] * 5 + [1] * 5)
        picks = [0] * 5 + [0, 0, 1, 1, 1] + [0] * 5  # 2-step lag, then 0-step
        beliefs = beliefs_from_picks(picks)
        np.testing.assert_array_equal(crossover_lags(beliefs, labels), [2, 0])

    def test_censoring_at_next_switch(self):
        labels = np.array([1] * 4 + [2] * 4 + [1] * 4)
        picks = [0] * 12  # never recognizes regime 2
        beliefs = beliefs_from_picks(picks)
        mapping = {0: 1, 1: 2}
        np.testing.assert_array_equal(
            crossover_lags(beliefs, labels, mapping=mapping), [4, 0]
        )

    def test_max_lag_cap(self):
        labels = np.array([1] * 4 + [2] * 8)
        picks = [0] * 12
        beliefs = beliefs_from_picks(picks)
        np.testing.assert_array_equal(
            crossover_lags(beliefs, labels, mapping={0: 1, 1: 2}, max_lag=3), [3]
        )
