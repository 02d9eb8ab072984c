"""Command-line entry point: simulate, train, eval, sweep.

Every command is driven by a flat key = value config file plus overriding
flags, writes a JSON echo of the resolved configuration next to its
outputs, and is deterministic given (config, seed). Exit codes: 0 success,
1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, replace
from itertools import product
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import best_regime_mapping, regime_accuracy
from .checkpoint import load_checkpoint, save_checkpoint
from .config import ConfigMap
from .dataio import (
    ForecastFrame,
    apply_calibration,
    daily_aggregate,
    fit_calibration,
    load_csv,
    make_daily_frame,
    make_value_frame,
    read_bundle_csv,
    write_bundle_csv,
)
from .errors import ConfigurationError, RegimeRnnError
from .series import SeriesBundle
from .switching import SwitchConfig
from .synthetic import SyntheticSpec, generate
from .training import Hyperparams, evaluate, train


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _fmt(value: float) -> str:
    """Shortest representation that round-trips the 64-bit value."""
    return repr(float(value))


def _ensure_outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_config(args) -> ConfigMap:
    cfg = ConfigMap.from_file(args.config) if args.config else ConfigMap()
    if getattr(args, "seed", None) is not None:
        cfg.set("seed", args.seed)
    if getattr(args, "data", None) is not None:
        cfg.set("data", args.data)
    if getattr(args, "time_column", None) is not None:
        cfg.set("time_column", args.time_column)
    if getattr(args, "value_column", None) is not None:
        cfg.set("value_column", args.value_column)
    return cfg


def _synthetic_spec(cfg: ConfigMap) -> SyntheticSpec:
    kind = cfg.get_str("kind")
    spec = SyntheticSpec(
        kind=kind,
        length=cfg.get_int("length", 5000),
        noise_std=cfg.get_float("noise_std") if "noise_std" in cfg else None,
        seed=cfg.get_int("seed", 0),
        segment_length=cfg.get_int("segment_length", 500),
        magnitude=cfg.get_float("magnitude", 0.5),
    )
    if "periods" in cfg:
        spec = replace(spec, periods=tuple(cfg.get_floats("periods")))
    rows = []
    for i in (1, 2, 3, 4, 5):
        key = f"transition_{i}"
        if key in cfg:
            rows.append(cfg.get_floats(key))
    if rows:
        spec = replace(spec, transition=tuple(tuple(r) for r in rows))
    coeff_rows = []
    for i in (1, 2, 3, 4, 5):
        key = f"ar_coeffs_{i}"
        if key in cfg:
            coeff_rows.append(cfg.get_floats(key))
    if coeff_rows:
        spec = replace(spec, ar_coeffs=tuple(tuple(r) for r in coeff_rows))
    return spec


def _hyperparams(cfg: ConfigMap) -> Hyperparams:
    clip_text = cfg.get_str("grad_clip", "5.0")
    grad_clip = None if clip_text.lower() in ("none", "off") else float(clip_text)
    return Hyperparams(
        num_regimes=cfg.get_int("num_regimes", 2),
        hidden_dim=cfg.get_int("hidden_dim", 16),
        truncation=cfg.get_int("truncation", 4),
        learning_rate=cfg.get_float("learning_rate", 3e-4),
        beta=cfg.get_float("beta", 0.7),
        dirichlet_rho0=cfg.get_float("dirichlet_rho0", 0.5),
        max_epochs=cfg.get_int("max_epochs", 200),
        early_stop_tolerance=cfg.get_int("early_stop_tolerance", 20),
        seed=cfg.get_int("seed", 0),
        grad_clip=grad_clip,
    )


def _switch_config(cfg: ConfigMap) -> SwitchConfig:
    return SwitchConfig(
        beta=cfg.get_float("beta", 0.7),
        likelihood_kind=cfg.get_str("likelihood", "gaussian"),
        cov_floor=cfg.get_float("cov_floor", 1e-6),
        likelihood_floor=cfg.get_float("likelihood_floor", 1e-300),
    )


def _plain_frame(bundle: SeriesBundle) -> ForecastFrame:
    """Level-space frame for data that was never differenced."""
    return ForecastFrame(
        bundle=bundle,
        level_targets=bundle.targets[:, 0].copy(),
        prev_levels=np.zeros(bundle.length),
        differenced=False,
    )


def _load_frame(cfg: ConfigMap) -> ForecastFrame:
    """Resolve the data source: synthetic spec, bundle CSV, or raw CSV."""
    if "data" in cfg:
        path = Path(cfg.get_str("data"))
        if not path.exists():
            raise ConfigurationError(f"input file not found: {path}")
        with path.open(encoding="utf-8") as handle:
            header = handle.readline().strip().split(",")
        if "x" in header and "y" in header:
            return _plain_frame(read_bundle_csv(path))
        raw = load_csv(
            path,
            time_column=cfg.get_str("time_column", "timestamp"),
            value_column=cfg.get_str("value_column", "value"),
        )
        use_diff = cfg.get_bool("difference", False)
        if cfg.get_bool("daily_aggregate", False):
            daily = daily_aggregate(raw)
            if daily.gap_days:
                _log(f"daily aggregation skipped {daily.gap_days} empty day(s)")
            return make_daily_frame(
                daily,
                use_differences=use_diff,
                difference_all=cfg.get_bool("difference_all", False),
            )
        return make_value_frame(raw.values, use_differences=use_diff)
    if "kind" in cfg:
        return _plain_frame(generate(_synthetic_spec(cfg)))
    raise ConfigurationError("no data source: set 'kind' or 'data' (or pass --data)")


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    spec = _synthetic_spec(cfg)
    bundle = generate(spec)
    out = _ensure_outdir(args)
    write_bundle_csv(out / "series.csv", bundle)
    (out / "spec.json").write_text(
        json.dumps(asdict(spec), indent=1), encoding="utf-8"
    )
    cfg.write_echo(out / "config_echo.json")
    _log(f"wrote {bundle.length} steps to {out / 'series.csv'}")
    return 0


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    frame = _load_frame(cfg)
    bundle = frame.bundle
    hp = _hyperparams(cfg)
    switch = _switch_config(cfg)
    out = _ensure_outdir(args)
    _log(
        f"training on {bundle.length} steps "
        f"(K={hp.num_regimes}, n_h={hp.hidden_dim}, tau={hp.truncation})"
    )
    params, report = train(bundle, hp, switch)
    switch = replace(switch, beta=hp.beta)

    save_checkpoint(
        out / "checkpoint.json",
        params,
        switch=switch,
        hyperparams=asdict(hp),
        feature_dim=bundle.feature_dim,
        extra={"differenced": frame.differenced, "source": bundle.name},
    )
    with (out / "epochs.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for i in range(report.epochs_run):
            writer.writerow(
                [str(i + 1), _fmt(report.train_losses[i]), _fmt(report.val_losses[i])]
            )
    val_result = evaluate(bundle, params, switch, "val")
    summary = {
        "best_epoch": report.best_epoch,
        "best_val_loss": report.best_val_loss,
        "epochs_run": report.epochs_run,
        "stopped_early": report.stopped_early,
        "val_rmse": val_result.rmse,
        "val_mae": val_result.mae,
        "vanilla_equivalent": hp.num_regimes == 1,
        "hyperparams": asdict(hp),
        "switch": asdict(switch),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1), encoding="utf-8")
    cfg.write_echo(out / "config_echo.json")
    _log(
        f"finished after {report.epochs_run} epoch(s); "
        f"best val loss {report.best_val_loss:.6g} at epoch {report.best_epoch}"
    )
    return 0


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    loaded = load_checkpoint(args.checkpoint)
    frame = _load_frame(cfg)
    bundle = frame.bundle
    if loaded.feature_dim is not None and loaded.feature_dim != bundle.feature_dim:
        raise ConfigurationError(
            f"checkpoint expects {loaded.feature_dim} feature(s) but the data "
            f"provides {bundle.feature_dim}"
        )
    switch = loaded.switch or SwitchConfig()
    segment = args.segment
    result = evaluate(bundle, loaded.params, switch, segment)
    count = result.predictions.shape[0]

    if frame.differenced:
        predictions = (
            frame.prev_levels[result.start : result.start + count]
            + result.predictions[:, 0]
        )
        truths = frame.level_targets[result.start : result.start + count]
    else:
        predictions = result.predictions[:, 0]
        truths = frame.level_targets[result.start : result.start + count]

    calibration = None
    if cfg.get_bool("calibrate", False):
        val_result = evaluate(bundle, loaded.params, switch, "val")
        val_count = val_result.predictions.shape[0]
        if frame.differenced:
            val_preds = (
                frame.prev_levels[val_result.start : val_result.start + val_count]
                + val_result.predictions[:, 0]
            )
        else:
            val_preds = val_result.predictions[:, 0]
        val_truths = frame.level_targets[val_result.start : val_result.start + val_count]
        calibration = fit_calibration(val_preds, val_truths)
        if calibration.intercept_only:
            _log("constant validation predictions: intercept-only calibration")
        predictions = apply_calibration(calibration, predictions)

    errors = truths - predictions
    metrics = {
        "segment": segment,
        "steps": count,
        "rmse": float(np.sqrt(np.mean(errors**2))),
        "mae": float(np.mean(np.abs(errors))),
        "model_space_rmse": result.rmse,
        "model_space_mae": result.mae,
    }
    if calibration is not None:
        metrics["calibration"] = asdict(calibration)
    if bundle.regime_labels is not None:
        labels = bundle.regime_labels[result.start : result.start + count]
        mapping = best_regime_mapping(result.beliefs, labels)
        metrics["regime_accuracy"] = regime_accuracy(
            result.beliefs, labels, mapping=mapping
        )
        metrics["regime_mapping"] = {str(k): int(v) for k, v in mapping.items()}

    out = _ensure_outdir(args)
    num_regimes = result.beliefs.shape[1]
    with (out / "predictions.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["t", "y_true", "y_pred"]
            + [f"alpha_{k + 1}" for k in range(num_regimes)]
        )
        for i in range(count):
            writer.writerow(
                [str(result.start + i), _fmt(truths[i]), _fmt(predictions[i])]
                + [_fmt(result.beliefs[i, k]) for k in range(num_regimes)]
            )
    (out / "metrics.json").write_text(json.dumps(metrics, indent=1), encoding="utf-8")
    cfg.write_echo(out / "config_echo.json")
    _log(f"evaluated {count} step(s): rmse {metrics['rmse']:.6g}, mae {metrics['mae']:.6g}")
    return 0


_GRID_FIELDS = {
    "num_regimes": int,
    "hidden_dim": int,
    "truncation": int,
    "learning_rate": float,
    "beta": float,
    "dirichlet_rho0": float,
    "max_epochs": int,
    "early_stop_tolerance": int,
    "seed": int,
}


def _sweep_one(cfg_values: dict[str, str], combo: dict[str, str]) -> dict[str, object]:
    cfg = ConfigMap(cfg_values)
    for key, value in combo.items():
        cfg.set(key, value)
    frame = _load_frame(cfg)
    hp = _hyperparams(cfg)
    switch = _switch_config(cfg)
    params, report = train(frame.bundle, hp, switch)
    val = evaluate(frame.bundle, params, replace(switch, beta=hp.beta), "val")
    row: dict[str, object] = dict(combo)
    row["val_loss"] = report.best_val_loss
    row["val_rmse"] = val.rmse
    row["val_mae"] = val.mae
    row["epochs_run"] = report.epochs_run
    return row


def cmd_sweep(args) -> int:
    cfg = _resolve_config(args)
    axes = cfg.grid_axes()
    if not axes:
        raise ConfigurationError("no grid axes: add 'grid.<param> = v1 v2 ...' keys")
    for name in axes:
        if name not in _GRID_FIELDS:
            raise ConfigurationError(
                f"unknown grid axis {name!r}; supported: {sorted(_GRID_FIELDS)}"
            )
    names = sorted(axes)
    combos = [dict(zip(names, values)) for values in product(*(axes[n] for n in names))]
    _log(f"sweeping {len(combos)} configuration(s) over axes {names}")
    base = {k: v for k, v in cfg.echo().items() if not k.startswith("grid.")}
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_one, [base] * len(combos), combos))
    else:
        rows = [_sweep_one(base, combo) for combo in combos]

    best_index = min(range(len(rows)), key=lambda i: rows[i]["val_loss"])
    out = _ensure_outdir(args)
    with (out / "sweep.csv").open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names + ["val_loss", "val_rmse", "val_mae", "epochs_run", "best"])
        for i, row in enumerate(rows):
            writer.writerow(
                [row[n] for n in names]
                + [
                    _fmt(row["val_loss"]),
                    _fmt(row["val_rmse"]),
                    _fmt(row["val_mae"]),
                    str(row["epochs_run"]),
                    "1" if i == best_index else "0",
                ]
            )
    (out / "best.json").write_text(
        json.dumps(rows[best_index], indent=1), encoding="utf-8"
    )
    cfg.write_echo(out / "config_echo.json")
    _log(f"best configuration: {rows[best_index]}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regimernn",
        description="Regime-switching recurrent predictor: simulate, train, eval, sweep.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, data: bool = False) -> None:
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", required=True, help="output directory")
        if data:
            p.add_argument("--data", help="input CSV (bundle or raw schema)")
            p.add_argument("--time-column", dest="time_column")
            p.add_argument("--value-column", dest="value_column")

    p_sim = sub.add_parser("simulate", help="generate a synthetic benchmark series")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_train = sub.add_parser("train", help="train on synthetic or CSV data")
    common(p_train, data=True)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a segment")
    common(p_eval, data=True)
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument(
        "--segment", default="test", choices=["train", "val", "test", "all"]
    )
    p_eval.set_defaults(func=cmd_eval)

    p_sweep = sub.add_parser("sweep", help="run a hyperparameter grid")
    common(p_sweep, data=True)
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RegimeRnnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())
