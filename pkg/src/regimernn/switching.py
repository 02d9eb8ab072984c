"""Filtered-belief gating over regimes.

After each observation, every regime's one-step prediction error is scored
against that regime's smoothed error covariance, the belief vector is
updated by the forward filtering recursion
``alpha ∝ phi ⊙ (transitionᵀ alpha_prev)``, and the covariances are
refreshed by exponential smoothing. Likelihood evaluation happens in log
space and is exponentiated after subtracting the per-step maximum across
regimes, which the normalized belief update is invariant to; stored
likelihood vectors therefore carry an arbitrary common positive scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, NumericError

LOG_TWO_PI = math.log(2.0 * math.pi)

LIKELIHOOD_KINDS = ("gaussian", "laplacian_scalar")


@dataclass(frozen=True)
class SwitchConfig:
    """Settings of the belief filter.

    ``beta`` in [0, 1) controls error-covariance smoothing: large values
    track errors quickly (sensitive, fast regime switches), small values
    smooth heavily. ``cov_floor`` keeps covariances positive definite while
    the rank-1 smoothing has not yet spanned the error space;
    ``likelihood_floor`` prevents a zero-sum belief update.
    """

    beta: float = 0.7
    likelihood_kind: str = "gaussian"
    cov_floor: float = 1e-6
    likelihood_floor: float = 1e-300

    def __post_init__(self) -> None:
        if not 0.0 <= self.beta < 1.0:
            raise ConfigurationError(f"beta must lie in [0, 1), got {self.beta}")
        if self.likelihood_kind not in LIKELIHOOD_KINDS:
            raise ConfigurationError(
                f"unknown likelihood kind {self.likelihood_kind!r}; "
                f"choose from {LIKELIHOOD_KINDS}"
            )
        if self.cov_floor <= 0.0 or self.likelihood_floor <= 0.0:
            raise ConfigurationError("cov_floor and likelihood_floor must be > 0")


@dataclass
class SwitchState:
    """Runtime state of the filter for one running sequence."""

    belief: np.ndarray  # (K,) filtered regime posterior
    error_covariances: np.ndarray  # (K, n_y, n_y) smoothed per-regime covariances
    last_likelihoods: np.ndarray  # (K,) evidence of the last step, max-scaled
    last_regime_errors: np.ndarray  # (K, n_y) per-regime errors of the last step
    last_unnormalized: np.ndarray  # (K,) belief numerator of the last update

    def copy(self) -> "SwitchState":
        return SwitchState(
            self.belief.copy(),
            self.error_covariances.copy(),
            self.last_likelihoods.copy(),
            self.last_regime_errors.copy(),
            self.last_unnormalized.copy(),
        )


def initial_switch_state(
    num_regimes: int, target_dim: int, cov_scale: float = 1.0
) -> SwitchState:
    """Uniform belief, identity covariances: the symmetric cold start."""
    if num_regimes < 1 or target_dim < 1:
        raise ConfigurationError("num_regimes and target_dim must be >= 1")
    belief = np.full(num_regimes, 1.0 / num_regimes)
    covs = np.tile(cov_scale * np.eye(target_dim), (num_regimes, 1, 1))
    return SwitchState(
        belief=belief,
        error_covariances=covs,
        last_likelihoods=np.ones(num_regimes),
        last_regime_errors=np.zeros((num_regimes, target_dim)),
        last_unnormalized=belief.copy(),
    )


def gaussian_log_likelihood(error: np.ndarray, covariance: np.ndarray) -> float:
    """Log density of a zero-mean multivariate normal at ``error``.

    Uses a Cholesky factorization; never forms an explicit inverse.
    """
    error = np.asarray(error, dtype=np.float64).reshape(-1)
    covariance = np.asarray(covariance, dtype=np.float64)
    n = error.shape[0]
    if covariance.shape != (n, n):
        raise ConfigurationError(
            f"covariance shape {covariance.shape} does not match error dim {n}"
        )
    if n == 1:
        r = covariance[0, 0]
        if not r > 0.0:
            raise NumericError(f"variance must be positive, got {r!r}")
        return -0.5 * (LOG_TWO_PI + math.log(r) + error[0] ** 2 / r)
    try:
        chol = np.linalg.cholesky(covariance)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"covariance not positive definite: {exc}") from exc
    white = np.linalg.solve(chol, error)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    return -0.5 * (n * LOG_TWO_PI + log_det + white @ white)


def gaussian_likelihood(error: np.ndarray, covariance: np.ndarray) -> float:
    """Multivariate normal density of a prediction error."""
    return math.exp(gaussian_log_likelihood(error, covariance))


def laplacian_likelihood_scalar(error: float, scale: float) -> float:
    """Laplace density (1 / 2r) exp(-|e| / r) for scalar targets.

    The multivariate counterpart needs the modified Bessel function of the
    second kind and is not supported.
    """
    error = np.asarray(error, dtype=np.float64).reshape(-1)
    if error.shape[0] != 1:
        raise ConfigurationError(
            "Laplace likelihood supports scalar targets only "
            f"(got dimension {error.shape[0]})"
        )
    if not scale > 0.0:
        raise NumericError(f"scale must be positive, got {scale!r}")
    return math.exp(-abs(error[0]) / scale) / (2.0 * scale)


def belief_update(
    belief_prev: np.ndarray,
    likelihoods: np.ndarray,
    transition: np.ndarray,
    likelihood_floor: float = 1e-300,
) -> np.ndarray:
    """Forward filtering update: normalize ``phi ⊙ (transitionᵀ alpha)``.

    If the numerator sums below ``likelihood_floor * K`` (all evidence
    underflowed), likelihoods are floored and the update recomputed, so a
    zero-sum never reaches the division.
    """
    updated, _ = _belief_update(
        np.asarray(belief_prev, dtype=np.float64),
        np.asarray(likelihoods, dtype=np.float64),
        np.asarray(transition, dtype=np.float64),
        likelihood_floor,
    )
    return updated


def _belief_update(
    belief_prev: np.ndarray,
    likelihoods: np.ndarray,
    transition: np.ndarray,
    likelihood_floor: float,
) -> tuple[np.ndarray, np.ndarray]:
    predicted = transition.T @ belief_prev
    numerator = likelihoods * predicted
    total = numerator.sum()
    if total < likelihood_floor * numerator.size:
        likelihoods = np.maximum(likelihoods, likelihood_floor)
        numerator = likelihoods * predicted
        total = numerator.sum()
    return numerator / total, numerator


def update_error_cov(
    cov_prev: np.ndarray,
    error: np.ndarray,
    beta: float,
    cov_floor: float = 1e-6,
) -> np.ndarray:
    """Exponentially smoothed covariance ``(1-beta) R + beta e eᵀ``.

    The result is symmetrized exactly and, whenever its smallest eigenvalue
    drops below ``cov_floor``, shifted by ``cov_floor * I`` so the stored
    covariance always satisfies ``lambda_min >= cov_floor``.
    """
    cov_prev = np.asarray(cov_prev, dtype=np.float64)
    error = np.asarray(error, dtype=np.float64).reshape(-1)
    updated = (1.0 - beta) * cov_prev + beta * np.outer(error, error)
    updated = 0.5 * (updated + updated.T)
    if updated.shape == (1, 1):
        if updated[0, 0] < cov_floor:
            updated[0, 0] += cov_floor
        return updated
    if np.linalg.eigvalsh(updated)[0] < cov_floor:
        updated += cov_floor * np.eye(updated.shape[0])
    return updated


def switch_step(
    state: SwitchState,
    regime_predictions: np.ndarray,
    target: np.ndarray,
    transition: np.ndarray,
    config: SwitchConfig,
) -> SwitchState:
    """One full filter update after observing ``target``.

    Order is fixed: per-regime errors, likelihoods against the pre-update
    covariances, belief update, covariance update.
    """
    predictions = np.asarray(regime_predictions, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    errors = target[None, :] - predictions
    num_regimes, target_dim = errors.shape
    covs = state.error_covariances
    beta = config.beta

    if config.likelihood_kind == "laplacian_scalar":
        if target_dim != 1:
            raise ConfigurationError(
                "Laplace likelihood supports scalar targets only "
                f"(got dimension {target_dim})"
            )
        scales = covs[:, 0, 0]
        log_lik = -np.log(2.0 * scales) - np.abs(errors[:, 0]) / scales
    elif target_dim == 1:
        variances = covs[:, 0, 0]
        log_lik = -0.5 * (LOG_TWO_PI + np.log(variances) + errors[:, 0] ** 2 / variances)
    else:
        log_lik = np.empty(num_regimes)
        for k in range(num_regimes):
            try:
                log_lik[k] = gaussian_log_likelihood(errors[k], covs[k])
            except NumericError as exc:
                raise NumericError(f"regime {k}: {exc}") from exc
    likelihoods = np.exp(log_lik - log_lik.max())

    belief, numerator = _belief_update(
        state.belief, likelihoods, transition, config.likelihood_floor
    )

    if target_dim == 1:
        variances = (1.0 - beta) * covs[:, 0, 0] + beta * errors[:, 0] ** 2
        variances = np.where(
            variances < config.cov_floor, variances + config.cov_floor, variances
        )
        new_covs = variances.reshape(num_regimes, 1, 1)
    else:
        new_covs = np.stack(
            [
                update_error_cov(covs[k], errors[k], beta, config.cov_floor)
                for k in range(num_regimes)
            ]
        )

    return SwitchState(
        belief=belief,
        error_covariances=new_covs,
        last_likelihoods=likelihoods,
        last_regime_errors=errors,
        last_unnormalized=numerator,
    )
