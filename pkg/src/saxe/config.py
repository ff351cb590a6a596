"""Run configuration: a flat key=value file plus command-line overrides."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path

METHOD_CHOICES = ("glove", "bert-default", "bert-prob")

_PATH_KEYS = (
    "db", "vocab", "wp_vocab", "contexts", "embeddings", "stats_sample",
    "targets", "categories", "corpus", "pronouns", "plural_map",
    "number_lexicon", "occurrence_embeddings", "series", "out",
)


@dataclass
class RunConfig:
    # inputs and outputs; stages check the paths they actually need
    db: str | None = None
    vocab: str | None = None
    wp_vocab: str | None = None
    contexts: str | None = None
    embeddings: str | None = None
    stats_sample: str | None = None
    targets: str | None = None
    categories: str | None = None
    corpus: str | None = None
    pronouns: str | None = None
    plural_map: str | None = None
    number_lexicon: str | None = None
    occurrence_embeddings: str | None = None
    series: str | None = None
    out: str = "out"
    # method and thresholds
    method: str = "bert-prob"
    zscored: bool = True
    seed: int = 0
    threads: int = 1
    min_pole: int = 3
    context_k: int = 100
    pool_cap: int = 1000
    bootstrap: int = 1000
    alpha: float = 0.001
    k_clusters: int = 6
    restarts: int = 10
    smoothing: int = 3
    fem_threshold: float = 0.75
    vocab_min: int = 500
    stratum_cap: int = 500
    monthly_cap: int = 1000
    per_adjective_mean: bool = False
    freq_denominator: str = "docs"  # or "tokens"

    def __post_init__(self):
        if self.method not in METHOD_CHOICES:
            raise ValueError(f"method must be one of {METHOD_CHOICES}, got {self.method!r}")
        if self.freq_denominator not in ("docs", "tokens"):
            raise ValueError(
                f"freq_denominator must be docs or tokens, got {self.freq_denominator!r}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        for key in ("min_pole", "context_k", "pool_cap", "bootstrap", "k_clusters",
                    "restarts", "smoothing", "vocab_min", "stratum_cap", "monthly_cap",
                    "threads"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive, got {getattr(self, key)}")
        if not 0.0 <= self.fem_threshold <= 1.0:
            raise ValueError(f"fem_threshold must be in [0,1], got {self.fem_threshold}")


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELDS[name].type
    if name in _PATH_KEYS or kind in ("str", "str | None"):
        return raw
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"config key {name}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config(path) -> RunConfig:
    """Parse "key = value" lines; '#' starts a comment; unknown keys error."""
    values: dict[str, object] = {}
    base = Path(path).resolve().parent
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key not in _FIELDS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            value = _coerce(key, raw)
            if key in _PATH_KEYS and isinstance(value, str) and value:
                p = Path(value)
                value = str(p if p.is_absolute() else base / p)
            values[key] = value
    return RunConfig(**values)


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    values = {f.name: getattr(config, f.name) for f in fields(RunConfig)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _FIELDS:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = value
    return RunConfig(**values)


def config_hash(config: RunConfig) -> str:
    """Stable digest of the full configuration (path values included)."""
    canon = "\n".join(
        f"{f.name}={getattr(config, f.name)}" for f in sorted(fields(RunConfig), key=lambda f: f.name)
    )
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
