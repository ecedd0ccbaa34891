"""Flat ``key = value`` configuration files.

Blank lines and lines starting with ``#`` are ignored. Every key must be one
of :data:`DEFAULTS`; values are parsed with the type of the default (``None``
defaults take an int for ``max_events`` and a float for ``max_seconds``).
Command-line flags override file values, which override the defaults.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError

DEFAULTS = {
    # embedder
    "vector_size": 100,
    "epochs": 100,
    "negative": 5,
    "alpha": 0.025,
    "min_alpha": 1e-4,
    "min_count": 2,
    "infer_epochs": 50,
    # saf
    "kinds": "content-tags",
    "classifier": "svm",
    "k": 5,
    "n_trees": 50,
    # crawl
    "max_events": None,
    "max_seconds": None,
    # session
    "seed": 0,
    "workers": 1,
}

_NONE_TYPES = {"max_events": int, "max_seconds": float}
_POSITIVE = {"vector_size", "epochs", "negative", "min_count", "infer_epochs", "k", "n_trees", "workers"}


def _coerce(key, raw):
    default = DEFAULTS[key]
    typ = _NONE_TYPES.get(key, type(default))
    try:
        value = typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {typ.__name__}, got {raw!r}") from None
    if key in _POSITIVE and value < 1:
        raise ConfigError(f"{key} must be >= 1")
    if key in ("max_events", "max_seconds") and value < 0:
        raise ConfigError(f"{key} must be >= 0")
    if key in ("alpha", "min_alpha") and value <= 0:
        raise ConfigError(f"{key} must be > 0")
    return value


def parse_config(text: str, source="<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip().replace("-", "_"), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        if key not in DEFAULTS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: key {key!r} given twice")
        out[key] = _coerce(key, value)
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path))


def resolve(file_values: dict, overrides: dict) -> dict:
    """Defaults, then file values, then non-``None`` flag values."""
    cfg = dict(DEFAULTS)
    cfg.update(file_values)
    for key, value in overrides.items():
        if value is not None:
            if key not in DEFAULTS:
                raise ConfigError(f"unknown setting {key!r}")
            cfg[key] = _coerce(key, value)
    if cfg["min_alpha"] > cfg["alpha"]:
        raise ConfigError("min_alpha must not exceed alpha")
    return cfg
