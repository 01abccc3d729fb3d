"""Categorical encoders, discretizers, imputation, and missing-row removal."""

from __future__ import annotations

import numpy as np

from ..errors import NoObservedValues, StageError
from ..frame import CATEGORICAL, NUMERIC, Column, Frame
from . import FittedStage, resolve_targets


def _categorical_values(frame, name, kind):
    col = frame.column(name)
    if col.kind != CATEGORICAL:
        raise StageError(f"{kind}: column {name!r} is numeric, not categorical")
    return col.values


def _require_observed(values, name, kind):
    if any(v is None for v in values):
        raise StageError(f"{kind}: column {name!r} contains missing values")


class OneHot(FittedStage):
    def __init__(self, desc, targets, categories):
        super().__init__(desc, targets)
        self.categories = categories  # column -> ordered category list

    def transform(self, frame: Frame, aux=None):
        for name in self.targets:
            values = _categorical_values(frame, name, self.kind)
            _require_observed(values, name, self.kind)
            cats = self.categories[name]
            block = []
            for cat in cats:
                ind = np.array([1.0 if v == cat else 0.0 for v in values])
                block.append(Column(f"{name}={cat}", NUMERIC, ind))
            # unseen test categories leave the whole block at zero
            frame = frame.replace_at(name, block)
        return frame, None, None


def fit_onehot(desc, frame, y):
    targets = resolve_targets(desc, frame)
    categories = {}
    for name in targets:
        values = _categorical_values(frame, name, desc.kind)
        _require_observed(values, name, desc.kind)
        categories[name] = sorted(set(values))
    return OneHot(desc, targets, categories)


class OrdinalLabel(FittedStage):
    def __init__(self, desc, targets, codes):
        super().__init__(desc, targets)
        self.codes = codes  # column -> token -> code

    def transform(self, frame: Frame, aux=None):
        for name in self.targets:
            values = _categorical_values(frame, name, self.kind)
            _require_observed(values, name, self.kind)
            table = self.codes[name]
            unseen = len(table)  # reserved code for unseen test categories
            enc = np.array([float(table.get(v, unseen)) for v in values])
            frame = frame.replace_at(name, [Column(name, NUMERIC, enc)])
        return frame, None, None


def fit_ordinal(desc, frame, y):
    targets = resolve_targets(desc, frame)
    codes = {}
    for name in targets:
        values = _categorical_values(frame, name, desc.kind)
        _require_observed(values, name, desc.kind)
        codes[name] = {c: i for i, c in enumerate(sorted(set(values)))}
    return OrdinalLabel(desc, targets, codes)


class KBins(FittedStage):
    def __init__(self, desc, targets, lows, widths):
        super().__init__(desc, targets)
        self.lows = lows
        self.widths = widths

    def transform(self, frame: Frame, aux=None):
        n_bins = self.descriptor.params["n_bins"]
        for name, lo, w in zip(self.targets, self.lows, self.widths):
            col = frame.column(name)
            if col.kind != NUMERIC:
                raise StageError(f"kbins: column {name!r} is categorical")
            if np.isnan(col.values).any():
                raise StageError(f"kbins: column {name!r} has missing values")
            if w == 0.0:
                binned = np.zeros_like(col.values)
            else:
                binned = np.floor((col.values - lo) / w)
                binned = np.clip(binned, 0, n_bins - 1)
            frame = frame.with_column(Column(name, NUMERIC, binned))
        return frame, None, None


def fit_kbins(desc, frame, y):
    targets = resolve_targets(desc, frame)
    n_bins = desc.params["n_bins"]
    lows, widths = [], []
    fitted = KBins(desc, targets, lows, widths)
    for name in targets:
        col = frame.column(name)
        if col.kind != NUMERIC:
            raise StageError(f"kbins: column {name!r} is categorical")
        if np.isnan(col.values).any():
            raise StageError(f"kbins: column {name!r} has missing values")
        lo, hi = col.values.min(), col.values.max()
        if hi == lo:
            fitted.warn(f"kbins: column {name!r} is constant; single bin")
            lows.append(lo)
            widths.append(0.0)
        else:
            lows.append(float(lo))
            widths.append(float(hi - lo) / n_bins)
    return fitted


class Binarize(FittedStage):
    def transform(self, frame: Frame, aux=None):
        thr = self.descriptor.params["threshold"]
        for name in self.targets:
            col = frame.column(name)
            if col.kind != NUMERIC:
                raise StageError(f"binarize: column {name!r} is categorical")
            if np.isnan(col.values).any():
                raise StageError(f"binarize: column {name!r} has missing values")
            frame = frame.with_column(
                Column(name, NUMERIC, (col.values > thr).astype(np.float64)))
        return frame, None, None


def fit_binarize(desc, frame, y):
    return Binarize(desc, resolve_targets(desc, frame))


class Imputer(FittedStage):
    def __init__(self, desc, targets, stats):
        super().__init__(desc, targets)
        self.stats = stats  # column -> fill value

    def transform(self, frame: Frame, aux=None):
        for name in self.targets:
            col = frame.column(name)
            fill = self.stats[name]
            mask = col.missing_mask()
            if not mask.any():
                continue
            vals = col.values.copy()
            vals[mask] = fill
            frame = frame.with_column(Column(name, col.kind, vals))
        return frame, None, None


def fit_imputer(desc, frame, y):
    strategy = desc.params["strategy"]
    targets = resolve_targets(desc, frame)
    stats = {}
    for name in targets:
        col = frame.column(name)
        if strategy in ("mean", "median") and col.kind != NUMERIC:
            raise StageError(
                f"imputer[{strategy}]: column {name!r} is categorical")
        mask = col.missing_mask()
        observed = col.values[~mask]
        if len(observed) == 0:
            raise NoObservedValues(
                f"imputer: column {name!r} has no observed training values")
        if strategy == "mean":
            stats[name] = float(observed.mean())
        elif strategy == "median":
            stats[name] = float(np.median(observed))
        else:  # most_frequent; ties resolve to the smallest value
            uniq, counts = np.unique(observed, return_counts=True)
            stats[name] = uniq[np.argmax(counts)]
    return Imputer(desc, targets, stats)


class DropMissing(FittedStage):
    def transform(self, frame: Frame, aux=None):
        mask = np.zeros(frame.n_rows, dtype=bool)
        for name in self.targets:
            mask |= frame.column(name).missing_mask()
        if mask.all():
            raise StageError("drop_missing removed every row")
        keep = np.flatnonzero(~mask)
        return frame.take(keep), keep, {"dropped": int(mask.sum())}


def fit_drop_missing(desc, frame, y):
    return DropMissing(desc, resolve_targets(desc, frame))


FITTERS = {
    "onehot": fit_onehot,
    "ordinal_label": fit_ordinal,
    "kbins": fit_kbins,
    "binarize": fit_binarize,
    "imputer": fit_imputer,
    "drop_missing": fit_drop_missing,
}
