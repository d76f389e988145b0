"""Run-configuration files: strict JSON schema with echoed defaults."""

import json
import os

from .model import ModelConfig, config_for_tasks
from .problems import PROBLEM_IDS
from .trainer import TrainConfig

ENV_SEED = "COACTION_SEED"

_DEFAULTS = {
    "mode": "multitask",
    "backbone": "transformer",
    "d_task": 6,
    "iterations": 0,       # 0 = mode default (5000 multitask / 1000 single)
    "batch": 256,
    "lr": 2e-3,
    "clip_norm": 1.0,
    "use_extreme": True,
    "reference_scalar": 3.5,
    "eval_points": 100,
    "seed": 0,
}

_TYPES = {
    "tasks": list,
    "mode": str,
    "backbone": str,
    "d_task": int,
    "iterations": int,
    "batch": int,
    "lr": (int, float),
    "clip_norm": (int, float),
    "use_extreme": bool,
    "reference_scalar": (int, float),
    "eval_points": int,
    "seed": int,
}


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


def resolve_run_config(doc: dict) -> dict:
    """Validate a raw config dict and fill in defaults (echoed back)."""
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object")
    unknown = set(doc) - set(_TYPES)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "tasks" not in doc:
        raise ConfigError("field 'tasks' is required")

    resolved = dict(_DEFAULTS)
    resolved.update(doc)
    for key, typ in _TYPES.items():
        value = resolved[key]
        if isinstance(value, bool) and typ is not bool:
            raise ConfigError(f"field '{key}' has wrong type")
        if not isinstance(value, typ):
            raise ConfigError(f"field '{key}' has wrong type")
    for tid in resolved["tasks"]:
        if tid not in PROBLEM_IDS:
            raise ConfigError(f"field 'tasks' names unknown problem '{tid}'")
    if os.environ.get(ENV_SEED):
        resolved["seed"] = int(os.environ[ENV_SEED])
    return resolved


def load_run_config(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from err
    return resolve_run_config(doc)


def build_configs(resolved: dict) -> tuple[ModelConfig, TrainConfig]:
    model_cfg = config_for_tasks(resolved["tasks"], backbone=resolved["backbone"],
                                 d_task=resolved["d_task"], seed=resolved["seed"])
    train_cfg = TrainConfig(mode=resolved["mode"],
                            iterations=resolved["iterations"],
                            batch=resolved["batch"], lr=resolved["lr"],
                            clip_norm=resolved["clip_norm"],
                            use_extreme=resolved["use_extreme"],
                            seed=resolved["seed"],
                            reference_scalar=resolved["reference_scalar"],
                            eval_points=resolved["eval_points"])
    return model_cfg, train_cfg
