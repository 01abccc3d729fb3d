"""Preprocessing stage catalog: descriptors, fitting, and application.

Every stage kind implements fit(train frame, labels) -> FittedStage, and a
fitted stage applies deterministically to any conforming frame. Learned
state comes from training data only. Samplers are the exception: they
resample the training rows at fit time and never touch test data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, StageError
from ..frame import CATEGORICAL, NUMERIC, Frame

SCALER_KINDS = ("zscore", "minmax", "maxabs", "robust")
SELECTOR_KINDS = ("kbest", "fpr", "percentile")
ENCODER_KINDS = ("onehot", "ordinal_label", "kbins", "binarize")
SAMPLER_KINDS = ("smote", "edited_nn_undersample", "random_undersample")
CUSTOM_KINDS = ("row_filter", "value_replace", "column_drop")
STAGE_KINDS = SCALER_KINDS + ("normalizer", "quantile_mapper", "power_mapper",
                              "pca") + SELECTOR_KINDS + ENCODER_KINDS + \
    ("imputer", "drop_missing") + SAMPLER_KINDS + CUSTOM_KINDS + ("noop",)

_PARAM_DEFAULTS = {
    "normalizer": {"norm": "l2"},
    "quantile_mapper": {"n_quantiles": 100, "output": "uniform"},
    "pca": {"n_components": 2},
    "kbest": {"k": 10},
    "fpr": {"alpha": 0.05},
    "percentile": {"percentile": 50},
    "kbins": {"n_bins": 4},
    "binarize": {"threshold": 0.0},
    "imputer": {"strategy": "mean"},
    "smote": {"k_neighbors": 5},
    "row_filter": {"predicates": []},
    "value_replace": {"column": None, "from_value": None, "to_value": None},
    "column_drop": {"drop": []},
}

_FILTER_OPS = ("le", "ge", "eq", "ne")


def _validate_params(kind, p):
    if kind == "normalizer" and p["norm"] not in ("l1", "l2"):
        raise ConfigError(f"normalizer norm must be l1 or l2, got {p['norm']!r}")
    if kind == "quantile_mapper":
        if p["n_quantiles"] < 2:
            raise ConfigError("n_quantiles must be >= 2")
        if p["output"] not in ("uniform", "normal"):
            raise ConfigError("quantile output must be uniform or normal")
    if kind == "pca" and p["n_components"] < 1:
        raise ConfigError("component count must be >= 1")
    if kind == "kbest" and p["k"] < 1:
        raise ConfigError("k must be >= 1")
    if kind == "fpr" and not 0 < p["alpha"] < 1:
        raise ConfigError("alpha must be in (0,1)")
    if kind == "percentile" and not 0 < p["percentile"] <= 100:
        raise ConfigError("percentile must be in (0,100]")
    if kind == "kbins" and p["n_bins"] < 2:
        raise ConfigError("n_bins must be >= 2")
    if kind == "imputer" and p["strategy"] not in ("mean", "median",
                                                   "most_frequent"):
        raise ConfigError(f"unknown imputer strategy {p['strategy']!r}")
    if kind == "smote" and p["k_neighbors"] < 1:
        raise ConfigError("k_neighbors must be >= 1")
    if kind == "row_filter":
        for pred in p["predicates"]:
            keys = set(pred)
            if keys != {"column", "op", "value"}:
                raise ConfigError(f"bad predicate keys {sorted(keys)}")
            if pred["op"] not in _FILTER_OPS:
                raise ConfigError(f"unknown predicate op {pred['op']!r}")
    if kind == "value_replace":
        for k in ("column", "from_value", "to_value"):
            if p[k] is None:
                raise ConfigError(f"value_replace requires {k}")


@dataclass(frozen=True)
class StageDescriptor:
    kind: str
    params: dict = field(default_factory=dict)
    columns: tuple | None = None      # target columns; default chosen per kind
    name: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in STAGE_KINDS:
            raise ConfigError(f"unknown stage kind {self.kind!r}")
        merged = dict(_PARAM_DEFAULTS.get(self.kind, {}))
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigError(f"{self.kind}: unknown params {sorted(unknown)}")
        merged.update(self.params)
        _validate_params(self.kind, merged)
        object.__setattr__(self, "params", merged)
        if self.columns is not None:
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def display_name(self) -> str:
        return self.name or self.kind

    def is_sampler(self) -> bool:
        return self.kind in SAMPLER_KINDS


class FittedStage:
    """Deterministic application of a fitted stage to a frame.

    transform returns (frame, keep_idx, notes): keep_idx is None unless the
    stage drops rows, notes carries per-call bookkeeping (e.g. rows failing
    a predicate because of a missing cell).
    """

    def __init__(self, descriptor: StageDescriptor, targets: list[str]):
        self.descriptor = descriptor
        self.targets = list(targets)
        self.warnings: list[str] = []

    @property
    def kind(self) -> str:
        return self.descriptor.kind

    def transform(self, frame: Frame, aux=None):
        raise NotImplementedError

    def warn(self, message: str):
        self.warnings.append(message)


def resolve_targets(desc: StageDescriptor, frame: Frame) -> list[str]:
    """Target columns: the declared subset, or the kind's natural default."""
    if desc.columns is not None:
        missing = [c for c in desc.columns if c not in frame]
        if missing:
            raise StageError(f"{desc.kind}: unknown column(s) {missing}")
        return list(desc.columns)
    if desc.kind in ("onehot", "ordinal_label"):
        return frame.categorical_names()
    if desc.kind == "imputer" and desc.params["strategy"] == "most_frequent":
        return frame.names
    if desc.kind in ("drop_missing", "row_filter", "value_replace",
                     "column_drop", "noop") or desc.kind in SAMPLER_KINDS:
        return frame.names
    return frame.numeric_names()


def require_numeric_complete(frame: Frame, targets, kind) -> np.ndarray:
    """Matrix of target columns; reject categoricals and missing cells."""
    cols = []
    for name in targets:
        col = frame.column(name)
        if col.kind != NUMERIC:
            raise StageError(f"{kind}: column {name!r} is categorical")
        if np.isnan(col.values).any():
            raise StageError(f"{kind}: column {name!r} contains missing values")
        cols.append(col.values)
    if not cols:
        raise StageError(f"{kind}: no target columns")
    return np.column_stack(cols)


from . import custom, encoding, sampling, scaling, selection  # noqa: E402

_FITTERS = {}
for mod in (scaling, encoding, selection, sampling, custom):
    _FITTERS.update(mod.FITTERS)


def fit_stage(desc: StageDescriptor, frame: Frame, y: np.ndarray,
              rng: np.random.Generator | None = None) -> FittedStage:
    """Fit one stage on training data. Samplers are fitted via fit_sampler."""
    if desc.is_sampler():
        raise StageError(f"{desc.kind} is a sampler; use resample_train")
    fitter = _FITTERS[desc.kind]
    return fitter(desc, frame, y)


def resample_train(desc: StageDescriptor, frame: Frame, y: np.ndarray,
                   priv: np.ndarray, rng: np.random.Generator):
    """Apply a sampling stage to the training partition only."""
    if not desc.is_sampler():
        raise StageError(f"{desc.kind} is not a sampler")
    return sampling.resample(desc, frame, y, priv, rng)
