"""Run configurations: dataclasses, validation, and JSON loading.

Hyperparameter ranges follow the experiment protocol: learning rates in
[1e-4, 3e-2], dropout in [0, 0.5], hidden size 256 and batch size 128 by
default. ``load_config`` fills defaults and rejects unknown keys.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

ENCODER_KINDS = ("treelstm", "lstm", "bilstm", "cnn")
LINEARIZATIONS = ("pre", "post", "in")
OUTPUT_ORDERS = ("cd_nu_on", "on_nu_cd")

LR_RANGE = (1e-4, 3e-2)
DROPOUT_RANGE = (0.0, 0.5)


@dataclass
class RunConfig:
    """Pronunciation-task configuration."""

    encoder: str = "treelstm"
    layers: int = 1
    scenario: int = 1
    linearization: str = "pre"
    operators: bool = True
    output_order: str = "cd_nu_on"
    learning_rate: float = 3e-3
    dropout: float = 0.1
    epochs: int = 200
    batch_size: int = 128
    hidden: int = 256
    d_in: int = 64
    seed: int = 0
    head_bias: bool = True
    tree_bias: bool = True
    cnn_filters: int = 200
    clip_norm: float = 5.0


@dataclass
class LmConfig:
    """Character language-model configuration."""

    input_kind: str = "standard"  # standard lookup or hierarchical composition
    layer_sizes: tuple[int, ...] = (1000, 1000, 200)
    embed_dim: int = 200
    learning_rate: float = 2e-3
    dropout_input: float = 0.1
    dropout_hidden: float = 0.1
    dropout_output: float = 0.25
    epochs: int = 300
    batch_size: int = 100
    bptt: int = 32
    seed: int = 0
    tree_bias: bool = True
    clip_norm: float = 5.0
    cache_embeddings: bool = True


def _check_range(name: str, value: float, lo: float, hi: float) -> None:
    if not lo <= value <= hi:
        raise ConfigError(f"{name}={value} outside allowed range [{lo}, {hi}]")


def _check_choice(name: str, value, allowed) -> None:
    if value not in allowed:
        raise ConfigError(f"{name}={value!r} not one of {sorted(allowed)}")


def validate_config(config: RunConfig) -> RunConfig:
    _check_choice("encoder", config.encoder, ENCODER_KINDS)
    _check_choice("linearization", config.linearization, LINEARIZATIONS)
    _check_choice("output_order", config.output_order, OUTPUT_ORDERS)
    _check_choice("scenario", config.scenario, (1, 2, 3))
    _check_choice("layers", config.layers, (1, 2))
    _check_range("dropout", config.dropout, *DROPOUT_RANGE)
    for name in ("epochs", "batch_size", "hidden", "d_in", "cnn_filters"):
        if getattr(config, name) < 1:
            raise ConfigError(f"{name} must be positive")
    return config


def validate_strict(config: RunConfig) -> RunConfig:
    """Full validation including the search-range bound on the learning rate
    (training code itself accepts any non-negative rate)."""
    validate_config(config)
    _check_range("learning_rate", config.learning_rate, *LR_RANGE)
    return config


def validate_lm_config(config: LmConfig) -> LmConfig:
    _check_choice("input_kind", config.input_kind, ("standard", "hierarchical"))
    if not config.layer_sizes or any(s < 1 for s in config.layer_sizes):
        raise ConfigError("layer_sizes must be positive")
    for name in ("dropout_input", "dropout_hidden", "dropout_output"):
        _check_range(name, getattr(config, name), 0.0, 0.5)
    for name in ("epochs", "batch_size", "bptt", "embed_dim"):
        if getattr(config, name) < 1:
            raise ConfigError(f"{name} must be positive")
    if config.learning_rate <= 0:
        raise ConfigError("learning_rate must be positive")
    return config


def config_to_dict(config) -> dict:
    out = dataclasses.asdict(config)
    for key, value in out.items():
        if isinstance(value, tuple):
            out[key] = list(value)
    return out


def _from_dict(cls, payload: dict, context: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(payload) - set(known)
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    kwargs = dict(payload)
    if "layer_sizes" in kwargs and isinstance(kwargs["layer_sizes"], list):
        kwargs["layer_sizes"] = tuple(kwargs["layer_sizes"])
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


#: JSON keys that point at input/output files rather than hyperparameters.
DATA_KEYS = ("split", "splits", "rules", "readings", "variants",
             "corpus_train", "corpus_valid", "corpus_test", "out_dir",
             "matrix", "grid")


@dataclass
class LoadedConfig:
    run: RunConfig | LmConfig
    data: dict


def load_config(path, kind: str = "run") -> LoadedConfig:
    """Read and validate a JSON config file.

    Hyperparameters live under ``"run"``; file paths and experiment-matrix
    settings live beside it under the documented data keys.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(payload) - set(DATA_KEYS) - {"run"}
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    run_payload = payload.get("run", {})
    if kind == "run":
        config = _from_dict(RunConfig, run_payload, str(path))
        validate_strict(config)
    elif kind == "lm":
        config = _from_dict(LmConfig, run_payload, str(path))
        validate_lm_config(config)
    else:
        raise ConfigError(f"unknown config kind {kind!r}")
    data = {k: payload[k] for k in DATA_KEYS if k in payload}
    return LoadedConfig(config, data)
