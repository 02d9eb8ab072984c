"""Seeded generators for the three synthetic regime-switching benchmarks.

Every generator is a pure function of its arguments: the RNG is numpy's
PCG64 (``np.random.default_rng``) with numpy's ziggurat normal transform,
explicitly seeded, so sequences are bit-reproducible for a fixed seed and
replicable by any implementation adopting the same generator. Targets
satisfy ``y[t] = x[t + 1]`` and ``regime_labels[t]`` names the (1-based)
regime that produced ``y[t]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dataio import split_60_20_20
from .errors import ConfigurationError
from .series import SeriesBundle

TWO_PI = 2.0 * math.pi

# Benchmark defaults: two AR(3) regimes differing in the sign pattern of the
# higher lags, strongly persistent chains, and a two-frequency sinusoid.
AR_MARKOV_COEFFS = ((0.95, 0.5, -0.5), (0.95, -0.5, 0.5))
AR_MARKOV_TRANSITION = ((0.998, 0.002), (0.004, 0.996))
SINE_PERIODS = (50.0, 200.0)
SINE_TRANSITION = ((0.99, 0.01), (0.01, 0.99))


def _finish(
    values: np.ndarray, labels: np.ndarray, name: str
) -> SeriesBundle:
    bundle = SeriesBundle(
        inputs=values[:-1],
        targets=values[1:],
        regime_labels=labels,
        split=None,
        name=name,
    )
    if bundle.length >= 5:
        bundle = split_60_20_20(bundle)
    return bundle


def _markov_path(
    rng: np.random.Generator, length: int, transition: np.ndarray
) -> np.ndarray:
    """First-order chain sampled from a row-stochastic matrix; 1-based labels."""
    num_states = transition.shape[0]
    cumulative = np.cumsum(transition, axis=1)
    draws = rng.random(length)
    states = np.empty(length, dtype=np.int64)
    state = int(rng.integers(num_states))
    for t in range(length):
        states[t] = state
        state = min(
            int(np.searchsorted(cumulative[state], draws[t], side="right")),
            num_states - 1,
        )
    return states + 1


def _check_transition(transition: Sequence[Sequence[float]]) -> np.ndarray:
    matrix = np.asarray(transition, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ConfigurationError("transition matrix must be square")
    if np.abs(matrix.sum(axis=1) - 1.0).max() > 1e-9 or (matrix < 0).any():
        raise ConfigurationError("transition matrix must be row-stochastic")
    return matrix


def gen_ar_deterministic(
    length: int = 5000,
    noise_std: float = 0.1,
    seed: int = 0,
    segment_length: int = 500,
    x0: float = 0.0,
) -> SeriesBundle:
    """Two AR regimes alternated on a fixed clock.

    While ``t mod (2 * segment_length) < segment_length`` the process is a
    random walk ``x[t+1] = x[t] + eps``; otherwise it contracts,
    ``x[t+1] = -0.9 x[t] + eps``, drifting toward white noise.
    """
    if length < 2:
        raise ConfigurationError("length must be >= 2")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, noise_std, size=length)
    values = np.empty(length + 1)
    values[0] = x0
    labels = np.empty(length, dtype=np.int64)
    period = 2 * segment_length
    for t in range(length):
        if t % period < segment_length:
            labels[t] = 1
            values[t + 1] = values[t] + noise[t]
        else:
            labels[t] = 2
            values[t + 1] = -0.9 * values[t] + noise[t]
    return _finish(values, labels, "ar_deterministic")


def gen_ar_markov(
    length: int = 5000,
    coeffs: Sequence[Sequence[float]] = AR_MARKOV_COEFFS,
    transition: Sequence[Sequence[float]] = AR_MARKOV_TRANSITION,
    noise_std: float = 0.1,
    seed: int = 0,
) -> SeriesBundle:
    """AR(p) regimes switched by a first-order Markov chain.

    The first p values are pure noise (warm-up); the initial regime is
    uniform. Coefficient list k applies while the chain sits in regime k.
    """
    if length < 2:
        raise ConfigurationError("length must be >= 2")
    try:
        coeff_matrix = np.asarray(coeffs, dtype=np.float64)
    except ValueError as exc:
        raise ConfigurationError(
            f"per-regime coefficient lists must share one order ({exc})"
        ) from exc
    if coeff_matrix.ndim != 2:
        raise ConfigurationError("per-regime coefficient lists must share one order")
    order = coeff_matrix.shape[1]
    matrix = _check_transition(transition)
    if matrix.shape[0] != coeff_matrix.shape[0]:
        raise ConfigurationError("one coefficient list per transition row required")
    rng = np.random.default_rng(seed)
    labels = _markov_path(rng, length, matrix)
    noise = rng.normal(0.0, noise_std, size=length + 1)
    values = np.empty(length + 1)
    head = min(order, length + 1)
    values[:head] = noise[:head]
    for t in range(order - 1, length):
        lags = values[t::-1][:order]
        values[t + 1] = coeff_matrix[labels[t] - 1] @ lags + noise[t + 1]
    return _finish(values, labels, "ar_markov")


def gen_sine_markov(
    length: int = 5000,
    periods: Sequence[float] = SINE_PERIODS,
    magnitude: float = 0.5,
    transition: Sequence[Sequence[float]] = SINE_TRANSITION,
    noise_std: float = 0.05,
    seed: int = 0,
) -> SeriesBundle:
    """Noisy sinusoid whose period is switched by a Markov chain.

    The phase advances by 1/period of the active regime each step and is
    continuous across switches (no reset), wrapped to one cycle to avoid
    accumulation error.
    """
    if length < 2:
        raise ConfigurationError("length must be >= 2")
    period_arr = np.asarray(periods, dtype=np.float64)
    if (period_arr <= 0).any():
        raise ConfigurationError("periods must be positive")
    matrix = _check_transition(transition)
    if matrix.shape[0] != period_arr.shape[0]:
        raise ConfigurationError("one period per transition row required")
    rng = np.random.default_rng(seed)
    labels = _markov_path(rng, length, matrix)
    noise = rng.normal(0.0, noise_std, size=length + 1)
    values = np.empty(length + 1)
    cycles = 0.0
    values[0] = noise[0]
    for t in range(length):
        cycles += 1.0 / period_arr[labels[t] - 1]
        cycles -= math.floor(cycles)
        values[t + 1] = magnitude * math.sin(TWO_PI * cycles) + noise[t + 1]
    return _finish(values, labels, "sine_markov")


@dataclass
class SyntheticSpec:
    """Config-file-friendly description of one synthetic benchmark."""

    kind: str
    length: int = 5000
    noise_std: Optional[float] = None  # per-kind default when None
    seed: int = 0
    segment_length: int = 500
    ar_coeffs: Sequence[Sequence[float]] = AR_MARKOV_COEFFS
    transition: Optional[Sequence[Sequence[float]]] = None
    periods: Sequence[float] = SINE_PERIODS
    magnitude: float = 0.5

    KINDS = ("ar_deterministic", "ar_markov", "sine_markov")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ConfigurationError(
                f"unknown synthetic kind {self.kind!r}; choose from {self.KINDS}"
            )
        if self.length < 2:
            raise ConfigurationError("length must be >= 2")


def generate(spec: SyntheticSpec) -> SeriesBundle:
    """Dispatch a :class:`SyntheticSpec` to its generator."""
    if spec.kind == "ar_deterministic":
        noise = 0.1 if spec.noise_std is None else spec.noise_std
        return gen_ar_deterministic(
            spec.length, noise, spec.seed, spec.segment_length
        )
    if spec.kind == "ar_markov":
        noise = 0.1 if spec.noise_std is None else spec.noise_std
        transition = AR_MARKOV_TRANSITION if spec.transition is None else spec.transition
        return gen_ar_markov(spec.length, spec.ar_coeffs, transition, noise, spec.seed)
    noise = 0.05 if spec.noise_std is None else spec.noise_std
    transition = SINE_TRANSITION if spec.transition is None else spec.transition
    return gen_sine_markov(
        spec.length, spec.periods, spec.magnitude, transition, noise, spec.seed
    )
