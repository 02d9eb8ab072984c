"""Self-describing JSON model checkpoints.

Weights are stored as nested row-major lists with shortest-round-trip float
formatting, so save/load reproduces every parameter bit-exactly. The file
carries shapes, the transition matrix, a filter-config echo and a format
version.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigurationError
from .params import ModelParams
from .switching import SwitchConfig

FORMAT_VERSION = 1


@dataclass
class LoadedCheckpoint:
    params: ModelParams
    switch: Optional[SwitchConfig]
    hyperparams: Optional[dict[str, Any]]
    feature_dim: Optional[int]  # raw features expected, bias slot excluded
    extra: dict[str, Any]


def save_checkpoint(
    path: str | Path,
    params: ModelParams,
    switch: Optional[SwitchConfig] = None,
    hyperparams: Optional[dict[str, Any]] = None,
    feature_dim: Optional[int] = None,
    extra: Optional[dict[str, Any]] = None,
) -> None:
    params.validate()
    payload = {
        "format_version": FORMAT_VERSION,
        "model": {
            "num_regimes": params.num_regimes,
            "hidden_dim": params.hidden_dim,
            "input_dim": params.input_dim,
            "output_dim": params.output_dim,
            "feature_dim": feature_dim,
            "input_weights": params.input_weights.tolist(),
            "recurrent_weights": params.recurrent_weights.tolist(),
            "output_weights": params.output_weights.tolist(),
            "transition": params.transition.tolist(),
        },
        "switch": asdict(switch) if switch is not None else None,
        "hyperparams": hyperparams,
        "extra": extra or {},
    }
    Path(path).write_text(json.dumps(payload, indent=1), encoding="utf-8")


def load_checkpoint(path: str | Path) -> LoadedCheckpoint:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigurationError(
            f"{path}: unsupported checkpoint format version {version!r}"
        )
    try:
        model = payload["model"]
        params = ModelParams(
            input_weights=np.asarray(model["input_weights"], dtype=np.float64),
            recurrent_weights=np.asarray(model["recurrent_weights"], dtype=np.float64),
            output_weights=np.asarray(model["output_weights"], dtype=np.float64),
            transition=np.asarray(model["transition"], dtype=np.float64),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"{path}: malformed checkpoint ({exc})") from exc
    params.validate()
    switch = None
    if payload.get("switch") is not None:
        switch = SwitchConfig(**payload["switch"])
    return LoadedCheckpoint(
        params=params,
        switch=switch,
        hyperparams=payload.get("hyperparams"),
        feature_dim=model.get("feature_dim"),
        extra=payload.get("extra", {}),
    )
