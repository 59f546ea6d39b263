"""Configuration helpers: environment settings and experiment config files."""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from . import models

# Environment variables and their defaults.
SETTING_DEFAULTS: Dict[str, str] = {
    "AREALAW_DIMENSION_GUARD": "20000",
    "AREALAW_JOBS": "1",
    "AREALAW_SEED": "20240101",
    "AREALAW_LOG_LEVEL": "WARNING",
    "AREALAW_QUAD_TOL": "1e-10",
    "AREALAW_CONVERGE_TOL": "1e-4",
}


class ConfigError(ValueError):
    """Raised for unreadable or invalid experiment configuration."""


def get_setting(name: str) -> Optional[str]:
    """Look up a setting from the environment first, then the built-in defaults."""
    env_value = os.getenv(name)
    if env_value and env_value.strip():
        return env_value.strip()
    return SETTING_DEFAULTS.get(name)


def _typed_setting(name: str, cast: Callable[[str], Any]) -> Any:
    raw = get_setting(name)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"setting {name}={raw!r} is not a valid {cast.__name__}") from exc


def get_int_setting(name: str) -> Optional[int]:
    return _typed_setting(name, int)


def get_float_setting(name: str) -> Optional[float]:
    return _typed_setting(name, float)


_INT_KEYS = {"d", "L_A", "n_cap", "dimension_guard", "seed"}
_INT_LIST_KEYS = {"L", "n_max"}
_FLOAT_LIST_KEYS = {"beta"}
_FLOAT_KEYS = {"J", "U", "mu", "gamma", "quad_tol", "converge_tol"}
_STR_KEYS = {"out"}
KNOWN_KEYS = _INT_KEYS | _INT_LIST_KEYS | _FLOAT_LIST_KEYS | _FLOAT_KEYS | _STR_KEYS
_OPTIONAL_KEYS = {"L_A", "n_cap", "gamma"}


def _parse_int_items(key: str, raw: Union[str, int, List[Any]]) -> List[int]:
    if isinstance(raw, list):
        items: List[Any] = raw
    elif isinstance(raw, int):
        items = [raw]
    else:
        items = [part.strip() for part in str(raw).split(",") if part.strip()]
    values: List[int] = []
    for item in items:
        text = str(item)
        try:
            bounds = [int(part) for part in text.split("..", 1)]
        except ValueError as exc:
            raise ConfigError(f"{key}: {text!r} is not an integer or a..b range") from exc
        if len(bounds) == 2:
            start, stop = bounds
            if stop < start:
                raise ConfigError(f"{key}: empty range {text}")
            values.extend(range(start, stop + 1))
        else:
            values.append(bounds[0])
    if not values:
        raise ConfigError(f"{key}: no values given")
    return values


def _parse_float_items(key: str, raw: Union[str, float, List[Any]]) -> List[float]:
    if isinstance(raw, list):
        items: List[Any] = raw
    elif isinstance(raw, (int, float)):
        items = [raw]
    else:
        items = [part.strip() for part in str(raw).split(",") if part.strip()]
    try:
        values = [float(item) for item in items]
    except ValueError as exc:
        raise ConfigError(f"{key}: {raw!r} is not a list of numbers") from exc
    if not values:
        raise ConfigError(f"{key}: no values given")
    return values


def _single(key: str, values: List[Any]) -> Any:
    if len(values) != 1:
        raise ConfigError(f"{key} takes a single value, got {len(values)}")
    return values[0]


def _convert(key: str, raw: Any) -> Any:
    if key in _OPTIONAL_KEYS and (raw is None or str(raw).strip().lower() in ("", "none", "null")):
        return None
    if key in _INT_LIST_KEYS:
        return _parse_int_items(key, raw)
    if key in _FLOAT_LIST_KEYS:
        return _parse_float_items(key, raw)
    if key in _INT_KEYS:
        return _single(key, _parse_int_items(key, raw))
    if key in _FLOAT_KEYS:
        return _single(key, _parse_float_items(key, raw))
    return str(raw)


def parse_key_values(text: str) -> Dict[str, str]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    entries: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {number}: expected key = value, got {content!r}")
        key, value = (part.strip() for part in content.split("=", 1))
        if key in entries:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        entries[key] = value
    return entries


def config_from_mapping(entries: Dict[str, Any]) -> models.ExperimentConfig:
    unknown = sorted(set(entries) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    values: Dict[str, Any] = {
        "dimension_guard": get_int_setting("AREALAW_DIMENSION_GUARD"),
        "seed": get_int_setting("AREALAW_SEED"),
        "quad_tol": get_float_setting("AREALAW_QUAD_TOL"),
        "converge_tol": get_float_setting("AREALAW_CONVERGE_TOL"),
    }
    for key, raw in entries.items():
        values[key] = _convert(key, raw)
    config = models.ExperimentConfig(**values)
    validate_config(config)
    return config


def validate_config(config: models.ExperimentConfig) -> None:
    """Reject parameters outside the hypotheses U, mu > 0, J >= 0, beta > 0."""
    problems: List[str] = []
    if config.d < 1:
        problems.append(f"d must be >= 1, got {config.d}")
    if any(L < 2 for L in config.L):
        problems.append(f"every L must be >= 2, got {config.L}")
    if config.L_A is not None and any(not 1 <= config.L_A <= L - 1 for L in config.L):
        problems.append(f"L_A={config.L_A} must lie in 1..L-1 for every L in {config.L}")
    if any(n < 1 for n in config.n_max):
        problems.append(f"every n_max must be >= 1, got {config.n_max}")
    if config.n_cap is not None and config.n_cap < 0:
        problems.append(f"n_cap must be >= 0, got {config.n_cap}")
    if any(beta <= 0 for beta in config.beta):
        problems.append(f"every beta must be > 0, got {config.beta}")
    if config.J < 0:
        problems.append(f"J must be >= 0, got {config.J}")
    if config.U <= 0:
        problems.append(f"U must be > 0, got {config.U}")
    if config.mu <= 0:
        problems.append(f"mu must be > 0, got {config.mu}")
    if config.gamma is not None and config.gamma <= 0:
        problems.append(f"gamma must be > 0, got {config.gamma}")
    if config.quad_tol <= 0 or config.converge_tol <= 0:
        problems.append("tolerances must be > 0")
    if config.dimension_guard < 1:
        problems.append(f"dimension_guard must be >= 1, got {config.dimension_guard}")
    if config.seed < 0:
        problems.append(f"seed must be >= 0, got {config.seed}")
    if problems:
        raise ConfigError("; ".join(problems))


def parse_config_text(text: str, *, as_json: Optional[bool] = None) -> models.ExperimentConfig:
    if as_json is None:
        as_json = text.lstrip().startswith("{")
    if as_json:
        try:
            entries = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if not isinstance(entries, dict):
            raise ConfigError("JSON config must be an object")
    else:
        entries = parse_key_values(text)
    return config_from_mapping(entries)


def load_config(path: Union[str, Path]) -> models.ExperimentConfig:
    config_path = Path(path)
    try:
        text = config_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    return parse_config_text(text, as_json=True if config_path.suffix.lower() == ".json" else None)


__all__ = [
    "ConfigError",
    "KNOWN_KEYS",
    "SETTING_DEFAULTS",
    "config_from_mapping",
    "get_float_setting",
    "get_int_setting",
    "get_setting",
    "load_config",
    "parse_config_text",
    "parse_key_values",
    "validate_config",
]
