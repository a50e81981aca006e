"""Flat key=value run configuration.

Every tunable default of the pipeline lives here so scaled-down desk runs
can override dimensions, epochs and rates from one file. Unknown keys are
rejected and values are type-checked at parse time. The environment
variable TWEETPOLARITY_CONFIG supplies a default path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

ENV_VAR = "TWEETPOLARITY_CONFIG"


def _parse_int_tuple(s: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in s.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {s!r}") from None


@dataclass
class RunConfig:
    # embedding / input geometry
    d: int = 200
    s_prime: int = 80
    # CNN
    filter_sizes: tuple[int, ...] = (3, 4, 5)
    filters_per_size: int = 200
    hidden: int = 30
    # LSTM
    lstm_m: int = 200
    # shared training
    dropout: float = 0.5
    lr: float = 0.001
    batch_size: int = 32
    seed: int = 0
    distant_frozen_epochs: int = 1
    distant_unfrozen_epochs: int = 6
    sup_frozen_epochs: int = 5
    sup_unfrozen_epochs: int = 5
    # vocabulary
    min_count: int = 2
    labeled_min_count: int = 1
    # skip-gram pretraining
    sg_window: int = 5
    sg_negatives: int = 5
    sg_epochs: int = 5
    sg_lr: float = 0.025
    sg_min_lr: float = 1e-4
    sg_subsample: float = 1e-3
    sg_table_size: int = 1_000_000
    # evaluation
    kld_n_test: int = 0  # 0 means: must be given on the command line
    # preprocessing
    emoticon_rules: str = ""

    @classmethod
    def load(cls, path: str | Path | None = None) -> "RunConfig":
        """Read overrides from a file; falls back to $TWEETPOLARITY_CONFIG,
        then to built-in defaults."""
        if path is None:
            path = os.environ.get(ENV_VAR) or None
        cfg = cls()
        if path is None:
            return cfg
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        casts = {f.name: f.type for f in fields(cls)}
        hints = {"filter_sizes": _parse_int_tuple}
        for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if not sep:
                raise ConfigError(f"line {lineno}: expected key=value")
            if key not in casts:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            current = getattr(cfg, key)
            try:
                if key in hints:
                    setattr(cfg, key, hints[key](value))
                elif isinstance(current, bool):
                    setattr(cfg, key, value.lower() in ("1", "true", "yes"))
                elif isinstance(current, int):
                    setattr(cfg, key, int(value))
                elif isinstance(current, float):
                    setattr(cfg, key, float(value))
                else:
                    setattr(cfg, key, value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: bad value {value!r} for {key}") from None
        return cfg
