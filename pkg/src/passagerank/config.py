"""Experiment configuration: defaults, flat key=value files, overrides.

The config file format is one `key = value` pair per line; blank lines
and `#` comments are ignored; no includes, no sections. Command-line
flags override file values, which override the built-in defaults. The
fingerprint of a resolved configuration (everything except thread
count, which must never change results) goes into run tags for
provenance.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .fusion import parse_filter_label, serialize_filters
from .passages import FilterSpec


def parse_filters(text: str) -> tuple[FilterSpec, ...]:
    """Parse `50,150,inf` or `50:25,150:75,inf` into filter specs."""
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    if not parts:
        raise ValueError("filter list is empty")
    return tuple(parse_filter_label(p) for p in parts)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str | None = None
    index: str | None = None
    topics: str | None = None
    qrels: str | None = None
    stoplist: str | None = None
    text_tags: tuple[str, ...] = ("TEXT",)
    filters: tuple[FilterSpec, ...] = (
        FilterSpec.window(50),
        FilterSpec.window(150),
        FilterSpec.whole_document(),
    )
    lambda_c: float = 0.5
    oov_floor: int = 1
    top_k: int = 2000
    pooling: str = "max"
    feature_set: str = "doc+query"
    homogeneity_m: int | None = None  # None: smallest finite filter
    passage_size: int = 50
    learning_rate: float = 0.05
    batch_size: int = 64
    max_epochs: int = 50
    patience: int = 5
    negatives_per_positive: int = 5
    folds: int = 5
    permutations: int = 100_000
    seed: int = 0
    threads: int = 1

    def smallest_finite_filter(self) -> FilterSpec:
        finite = [f for f in self.filters if not f.is_infinite]
        if self.homogeneity_m is not None:
            return FilterSpec.window(self.homogeneity_m)
        if not finite:
            raise ValueError(
                "no finite filter configured; set homogeneity_m explicitly"
            )
        return min(finite, key=lambda f: f.m)

    def fingerprint(self) -> str:
        """Short hash over every knob that can affect computed outputs.

        Storage locations and thread count are excluded: the same
        experiment run against the same data in a different directory,
        or with more workers, must keep its tag.
        """
        skip = {"threads", "corpus", "index", "topics", "qrels", "stoplist"}
        lines = []
        for f in fields(self):
            if f.name in skip:
                continue
            value = getattr(self, f.name)
            if f.name == "filters":
                value = ",".join(serialize_filters(value))
            elif f.name == "text_tags":
                value = ",".join(value)
            lines.append(f"{f.name}={value!r}")
        digest = hashlib.sha1("\n".join(sorted(lines)).encode("utf-8"))
        return digest.hexdigest()[:10]

    def run_tag(self, mode: str) -> str:
        return f"{mode}-{self.fingerprint()}"


_STR_KEYS = {"corpus", "index", "topics", "qrels", "stoplist", "pooling",
             "feature_set"}
_INT_KEYS = {"oov_floor", "top_k", "homogeneity_m", "passage_size",
             "batch_size", "max_epochs", "patience", "negatives_per_positive",
             "folds", "permutations", "seed", "threads"}
_FLOAT_KEYS = {"lambda_c", "learning_rate"}


def _parse_value(key: str, raw: str):
    if key in _STR_KEYS:
        return raw
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "filters":
        return parse_filters(raw)
    if key == "text_tags":
        return tuple(t.strip() for t in raw.split(",") if t.strip())
    raise ValueError(f"unknown config key {key!r}")


def read_config_file(path: str | Path) -> dict:
    """Parse a key=value config file into typed values."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = value', got {line!r}"
                )
            key, raw = (s.strip() for s in text.split("=", 1))
            try:
                values[key] = _parse_value(key, raw)
            except ValueError as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return values


def build_config(
    config_path: str | Path | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Defaults, overlaid by the config file, overlaid by CLI overrides."""
    cfg = ExperimentConfig()
    if config_path is not None:
        cfg = replace(cfg, **read_config_file(config_path))
    if overrides:
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config overrides: {sorted(unknown)}")
        cfg = replace(cfg, **overrides)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if not 0.0 < cfg.lambda_c < 1.0:
        raise ValueError(f"lambda_c must be in (0, 1), got {cfg.lambda_c}")
    if cfg.pooling not in ("max", "mean"):
        raise ValueError(f"pooling must be 'max' or 'mean', got {cfg.pooling!r}")
    if cfg.feature_set not in ("doc", "query", "doc+query"):
        raise ValueError(f"unknown feature_set {cfg.feature_set!r}")
    if not cfg.filters:
        raise ValueError("at least one filter is required")
    for name in ("top_k", "passage_size", "batch_size", "max_epochs",
                 "patience", "negatives_per_positive", "folds", "permutations",
                 "threads"):
        if getattr(cfg, name) < 1:
            raise ValueError(f"{name} must be >= 1")
    if cfg.oov_floor < 0:
        raise ValueError("oov_floor must be >= 0")
    if cfg.learning_rate < 0:
        raise ValueError("learning_rate must be >= 0")
    if cfg.homogeneity_m is not None and cfg.homogeneity_m < 1:
        raise ValueError("homogeneity_m must be >= 1")


def require_set(cfg: ExperimentConfig, *keys: str) -> None:
    """Fail fast with an actionable message when required keys are unset."""
    missing = [k for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ValueError(
            "missing required configuration: "
            + ", ".join(f"--{k.replace('_', '-')}" for k in missing)
        )


def require(cfg: ExperimentConfig, *keys: str) -> None:
    """require_set plus an existence check (for input paths)."""
    require_set(cfg, *keys)
    for k in keys:
        p = Path(getattr(cfg, k))
        if not p.exists():
            raise ValueError(f"{k} path does not exist: {p}")
