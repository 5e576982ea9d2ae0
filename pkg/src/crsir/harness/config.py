"""Experiment configuration."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from ..errors import DomainError, UnknownTransformCode

DEFAULT_C_GRID = (1, 5, 10, 20, 30)
DEFAULT_TAU_GRID = (0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
TRANSFORM_CODES = ("none", "log", "diff", "diff2", "logdiff", "logdiff2")


@dataclass(frozen=True)
class PanelConfig:
    """Settings for one rolling forecasting study.

    ``eval_start`` is the first forecast origin (row position); ``None`` means
    the earliest origin with a full window. ``cv_refresh`` reruns the
    cross-validation every that many origins and reuses the last choice in
    between.
    """

    data_path: str | None = None
    transform_codes: dict = field(default_factory=dict)
    forecast_targets: tuple = ()
    predictors: tuple = ()
    horizons: tuple = (1, 2, 4)
    window_length: int = 100
    cv_c: tuple = DEFAULT_C_GRID
    cv_tau: tuple = DEFAULT_TAU_GRID
    H: int | None = None
    alpha: float = 0.05
    seed: int = 0
    eval_start: int | None = None
    eval_step: int = 1
    cv_refresh: int = 1
    winsorize_iqr: float | None = None
    n_factors: int = 5

    def __post_init__(self):
        for name in ("forecast_targets", "predictors", "horizons", "cv_c", "cv_tau"):
            object.__setattr__(self, name, tuple(getattr(self, name) or ()))
        object.__setattr__(self, "transform_codes", dict(self.transform_codes or {}))
        if self.window_length < 40:
            raise DomainError(f"window_length must be at least 40, got {self.window_length}")
        if not self.horizons or any(int(h) != h or h < 1 for h in self.horizons):
            raise DomainError(f"horizons must be positive integers, got {self.horizons}")
        if not self.cv_c or any(c < 1 for c in self.cv_c):
            raise DomainError(f"cluster grid must hold positive integers, got {self.cv_c}")
        if not self.cv_tau or any(not 0.0 <= t <= 1.0 for t in self.cv_tau):
            raise DomainError(f"tau grid must lie in [0, 1], got {self.cv_tau}")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.eval_step < 1 or self.cv_refresh < 1:
            raise DomainError("eval_step and cv_refresh must be positive")
        bad = {k: v for k, v in self.transform_codes.items() if v not in TRANSFORM_CODES}
        if bad:
            raise UnknownTransformCode(f"unknown transform codes {bad}")

    def grid(self):
        return [(c, tau) for c in self.cv_c for tau in self.cv_tau]

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path, **overrides):
    """Read a YAML file whose keys are ``PanelConfig`` field names."""
    raw = yaml.safe_load(Path(path).read_text()) or {}
    known = {f.name for f in fields(PanelConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise DomainError(f"unknown config keys: {', '.join(unknown)}")
    if raw.get("data_path") and not Path(raw["data_path"]).is_absolute():
        raw["data_path"] = str(Path(path).parent / raw["data_path"])
    return PanelConfig(**raw).with_overrides(**overrides)


def dump_config(config, path):
    d = {f.name: getattr(config, f.name) for f in fields(PanelConfig)}
    d = {k: (list(v) if isinstance(v, tuple) else v) for k, v in d.items()}
    Path(path).write_text(yaml.safe_dump(d, sort_keys=False))
