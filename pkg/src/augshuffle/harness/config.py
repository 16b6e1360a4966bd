"""``key = value`` config files merged with command-line overrides."""

from __future__ import annotations

import os
from dataclasses import fields

from ..errors import ConfigError
from .experiments import ExperimentConfig

SEED_ENV = "AUGSHUFFLE_SEED"

_LISTS = {"protocols": str, "epsilons": float, "omega_ratios": float}
_ALIASES = {"protocol": "protocols", "eps": "epsilons", "epsilon": "epsilons", "targets": "n_targets",
            "fraction": "attack_fraction", "format": "dataset_format"}
_NULLABLE = {"dataset", "defense", "local_epsilon"}


def _field_types():
    return {f.name: f.type for f in fields(ExperimentConfig) if f.name != "extra"}


def _convert(key, raw):
    if key in _LISTS:
        items = [part.strip() for part in str(raw).split(",") if part.strip()] if isinstance(raw, str) else list(raw)
        try:
            return tuple(_LISTS[key](item) for item in items)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    if key in _NULLABLE and raw in (None, "", "none"):
        return None
    kind = _field_types()[key]
    try:
        if kind.startswith("int"):
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        if kind.startswith("float"):
            return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {kind.split()[0]}, got {raw!r}") from None
    return str(raw)


def canonical_key(key):
    key = key.strip().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in _field_types():
        raise ConfigError(f"unknown config key {key!r}")
    return key


def parse_config_text(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        try:
            key = canonical_key(key)
            values[key] = _convert(key, raw.strip())
        except ConfigError as err:
            raise ConfigError(f"{source}:{lineno}: {err}") from None
    return values


def read_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read(), str(path))
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from None


def build_config(file_values=None, overrides=None, environ=None):
    """Merge defaults, file values, the seed env var and flag overrides.

    Precedence, lowest first: defaults, file, ``AUGSHUFFLE_SEED``, flags.
    """
    environ = os.environ if environ is None else environ
    merged = dict(file_values or {})
    if environ.get(SEED_ENV, "").strip():
        merged["seed"] = _convert("seed", environ[SEED_ENV].strip())
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        key = canonical_key(key)
        merged[key] = _convert(key, raw)
    try:
        return ExperimentConfig(**merged)
    except TypeError as err:
        raise ConfigError(str(err)) from None
