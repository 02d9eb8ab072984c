"""Regime-switching recurrent predictor with filtered-belief gating.

A recurrent cell keeps one hidden-state transition per latent regime and
mixes the per-regime states with the filtered posterior of a hidden Markov
model whose evidence is each regime's recent prediction accuracy. All
weights, including the regime transition matrix, are trained jointly by
per-step truncated backpropagation through time.
"""

from .analysis import best_regime_mapping, crossover_lags, regime_accuracy
from .backprop import GateTrace, GradientSet, clip_gradients, tbptt_gradients
from .cell import StepTrace, cell_step, combine_hidden, output_map, regime_forward
from .checkpoint import load_checkpoint, save_checkpoint
from .dataio import (
    Calibration,
    apply_calibration,
    daily_aggregate,
    difference,
    fit_calibration,
    load_csv,
    reconstruct,
    split_60_20_20,
)
from .errors import (
    ConfigurationError,
    DivergenceError,
    NumericError,
    RegimeRnnError,
    StateError,
)
from .params import ModelParams
from .series import SeriesBundle, augment_bias
from .switching import (
    SwitchConfig,
    SwitchState,
    belief_update,
    gaussian_likelihood,
    initial_switch_state,
    laplacian_likelihood_scalar,
    switch_step,
    update_error_cov,
)
from .synthetic import (
    SyntheticSpec,
    gen_ar_deterministic,
    gen_ar_markov,
    gen_sine_markov,
    generate,
)
from .training import (
    EvalResult,
    Hyperparams,
    TrainReport,
    evaluate,
    init_params,
    renormalize_transition,
    row_softmax,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Calibration",
    "ConfigurationError",
    "DivergenceError",
    "EvalResult",
    "GateTrace",
    "GradientSet",
    "Hyperparams",
    "ModelParams",
    "NumericError",
    "RegimeRnnError",
    "SeriesBundle",
    "StateError",
    "StepTrace",
    "SwitchConfig",
    "SwitchState",
    "SyntheticSpec",
    "TrainReport",
    "apply_calibration",
    "augment_bias",
    "belief_update",
    "best_regime_mapping",
    "cell_step",
    "clip_gradients",
    "combine_hidden",
    "crossover_lags",
    "daily_aggregate",
    "difference",
    "evaluate",
    "fit_calibration",
    "gaussian_likelihood",
    "gen_ar_deterministic",
    "gen_ar_markov",
    "gen_sine_markov",
    "generate",
    "init_params",
    "initial_switch_state",
    "laplacian_likelihood_scalar",
    "load_checkpoint",
    "load_csv",
    "output_map",
    "reconstruct",
    "regime_accuracy",
    "regime_forward",
    "renormalize_transition",
    "row_softmax",
    "save_checkpoint",
    "split_60_20_20",
    "switch_step",
    "tbptt_gradients",
    "train",
    "update_error_cov",
]
