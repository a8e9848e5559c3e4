"""Run configuration: one JSON document driving the whole pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .client import EndpointConfig
from .sweep import default_thresholds, validate_thresholds


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    master_seed: int = 39
    train_size: int = 100
    test_size: int = 100
    splits: int = 3
    split_patterns: Optional[tuple[tuple[str, ...], ...]] = None  # explicit rule subsets
    base_capacity: int = 8
    templates: Optional[str] = None
    repair: str = "deterministic"
    metric: str = "final"
    thresholds: tuple[float, ...] = field(default_factory=default_thresholds)
    out_dir: str = "out"
    endpoints: tuple[EndpointConfig, ...] = ()


_INT_FIELDS = ("master_seed", "train_size", "test_size", "splits", "base_capacity")


def _validate_split_patterns(value) -> tuple[tuple[str, ...], ...]:
    from .nal import ALL_PATTERNS, RulePattern

    if not isinstance(value, list) or not all(isinstance(s, list) for s in value):
        raise ConfigError("field 'split_patterns' must be a list of lists of pattern keys")
    seen: set[str] = set()
    subsets = []
    for i, subset in enumerate(value):
        if not subset:
            raise ConfigError(f"field 'split_patterns[{i}]' must be non-empty")
        keys = []
        for key in subset:
            try:
                RulePattern.from_key(key)
            except ValueError as exc:
                raise ConfigError(f"field 'split_patterns[{i}]': {exc}") from exc
            if key in seen:
                raise ConfigError(f"field 'split_patterns': pattern {key!r} appears twice")
            seen.add(key)
            keys.append(key)
        subsets.append(tuple(keys))
    if len(seen) != len(ALL_PATTERNS):
        raise ConfigError("field 'split_patterns' must cover all nine patterns")
    return tuple(subsets)


def run_config_from_dict(payload: dict) -> RunConfig:
    known = {
        "master_seed", "train_size", "test_size", "splits", "split_patterns", "base_capacity",
        "templates", "repair", "metric", "thresholds", "out_dir", "endpoints",
    }
    for key in payload:
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
    kwargs: dict = {}
    for name in _INT_FIELDS:
        if name in payload:
            value = payload[name]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"field {name!r} must be an integer, got {value!r}")
            kwargs[name] = value
    for name in ("templates", "repair", "metric", "out_dir"):
        if name in payload:
            value = payload[name]
            if value is not None and not isinstance(value, str):
                raise ConfigError(f"field {name!r} must be a string, got {value!r}")
            kwargs[name] = value
    if kwargs.get("train_size", 1) < 1:
        raise ConfigError("field 'train_size' must be >= 1")
    if kwargs.get("test_size", 1) < 1:
        raise ConfigError("field 'test_size' must be >= 1")
    if not 1 <= kwargs.get("splits", 3) <= 9:
        raise ConfigError("field 'splits' must be in 1..9")
    if kwargs.get("repair", "deterministic") not in ("none", "deterministic", "model"):
        raise ConfigError("field 'repair' must be none, deterministic, or model")
    if kwargs.get("metric", "final") not in ("conformity", "final"):
        raise ConfigError("field 'metric' must be conformity or final")
    if payload.get("split_patterns") is not None:
        kwargs["split_patterns"] = _validate_split_patterns(payload["split_patterns"])
        if kwargs.get("splits", len(kwargs["split_patterns"])) != len(kwargs["split_patterns"]):
            raise ConfigError("field 'splits' disagrees with the number of split_patterns")
        kwargs["splits"] = len(kwargs["split_patterns"])
    if "thresholds" in payload:
        try:
            kwargs["thresholds"] = validate_thresholds(payload["thresholds"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'thresholds': {exc}") from exc
    if "endpoints" in payload:
        endpoints = payload["endpoints"]
        if not isinstance(endpoints, list):
            raise ConfigError("field 'endpoints' must be a list of endpoint objects")
        built = []
        for i, item in enumerate(endpoints):
            if not isinstance(item, dict):
                raise ConfigError(f"field 'endpoints[{i}]' must be an object")
            try:
                built.append(EndpointConfig(**item))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"field 'endpoints[{i}]': {exc}") from exc
        kwargs["endpoints"] = tuple(built)
    return RunConfig(**kwargs)


def load_run_config(path: str | Path) -> RunConfig:
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config file must hold a JSON object")
    return run_config_from_dict(payload)


def load_endpoint(path: str | Path) -> EndpointConfig:
    try:
        payload = json.loads(Path(path).read_text("utf-8"))
        return EndpointConfig(**payload)
    except OSError as exc:
        raise ConfigError(f"cannot read endpoint file: {exc}") from exc
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad endpoint file {path}: {exc}") from exc
