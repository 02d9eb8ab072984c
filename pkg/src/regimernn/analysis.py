"""Belief-trajectory diagnostics against ground-truth regime labels.

Model regime indices are exchangeable (nothing ties index 0 to the
generator's regime 1), so accuracy is measured up to the best injective
assignment of belief components to label values.
"""

from __future__ import annotations

from itertools import permutations
from typing import Optional

import numpy as np

from .errors import ConfigurationError


def switch_indices(labels: np.ndarray) -> np.ndarray:
    """Positions where the true regime changes (first step of the new regime)."""
    labels = np.asarray(labels)
    return np.flatnonzero(labels[1:] != labels[:-1]) + 1


def best_regime_mapping(beliefs: np.ndarray, labels: np.ndarray) -> dict[int, int]:
    """Assignment of belief components to label values maximizing agreement."""
    beliefs = np.asarray(beliefs, dtype=np.float64)
    labels = np.asarray(labels)
    if beliefs.shape[0] != labels.shape[0]:
        raise ConfigurationError("beliefs and labels must align")
    num_components = beliefs.shape[1]
    values = sorted(np.unique(labels).tolist())
    picks = beliefs.argmax(axis=1)
    counts = np.zeros((num_components, len(values)), dtype=np.int64)
    for j, value in enumerate(values):
        mask = labels == value
        for i in range(num_components):
            counts[i, j] = int(np.sum(picks[mask] == i))
    best_score = -1
    best: dict[int, int] = {}
    width = min(num_components, len(values))
    for combo in permutations(range(len(values)), width):
        for comps in permutations(range(num_components), width):
            score = sum(counts[c, v] for c, v in zip(comps, combo))
            if score > best_score:
                best_score = score
                best = {c: values[v] for c, v in zip(comps, combo)}
    return best


def regime_accuracy(
    beliefs: np.ndarray,
    labels: np.ndarray,
    exclude_after_switch: int = 0,
    mapping: Optional[dict[int, int]] = None,
) -> float:
    """Fraction of steps whose argmax-belief regime matches the true label.

    Steps within ``exclude_after_switch`` of a label change are dropped,
    discounting the unavoidable post-switch adaptation window.
    """
    beliefs = np.asarray(beliefs, dtype=np.float64)
    labels = np.asarray(labels)
    if mapping is None:
        mapping = best_regime_mapping(beliefs, labels)
    picks = beliefs.argmax(axis=1)
    predicted = np.array([mapping.get(int(p), -1) for p in picks])
    included = np.ones(labels.shape[0], dtype=bool)
    if exclude_after_switch > 0:
        for s in switch_indices(labels):
            included[s : s + exclude_after_switch] = False
    if not included.any():
        raise ConfigurationError("exclusion window removed every step")
    return float(np.mean(predicted[included] == labels[included]))


def crossover_lags(
    beliefs: np.ndarray,
    labels: np.ndarray,
    mapping: Optional[dict[int, int]] = None,
    max_lag: Optional[int] = None,
) -> np.ndarray:
    """Steps from each true switch until the argmax belief first agrees.

    Searches up to the next switch (or ``max_lag``); switches never matched
    within the window are censored at the window length, keeping means
    comparable across runs.
    """
    beliefs = np.asarray(beliefs, dtype=np.float64)
    labels = np.asarray(labels)
    if mapping is None:
        mapping = best_regime_mapping(beliefs, labels)
    picks = beliefs.argmax(axis=1)
    predicted = np.array([mapping.get(int(p), -1) for p in picks])
    switches = switch_indices(labels)
    lags = []
    for idx, s in enumerate(switches):
        horizon = switches[idx + 1] - s if idx + 1 < len(switches) else len(labels) - s
        if max_lag is not None:
            horizon = min(horizon, max_lag)
        window = predicted[s : s + horizon] == labels[s]
        hits = np.flatnonzero(window)
        lags.append(int(hits[0]) if hits.size else int(horizon))
    return np.asarray(lags, dtype=np.int64)
