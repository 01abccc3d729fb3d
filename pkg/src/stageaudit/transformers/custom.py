"""Declarative custom stages: row filters, value replacement, column drops.

These apply to train and test alike. Row-filter predicates may reference
the raw label/sensitive columns carried in `aux` (needed for data-cleaning
predicates like score quality flags).
"""

from __future__ import annotations

import numpy as np

from ..errors import StageError
from ..frame import CATEGORICAL, NUMERIC, Column, Frame
from . import FittedStage, resolve_targets


def _lookup(frame: Frame, aux, name: str):
    if name in frame:
        return frame.column(name)
    if aux and name in aux:
        return aux[name]
    raise StageError(f"row_filter: unknown column {name!r}")


def _predicate_mask(col: Column, op: str, value):
    """(satisfied, missing) boolean masks for one predicate."""
    missing = col.missing_mask()
    if col.kind == NUMERIC:
        v = float(value)
        with np.errstate(invalid="ignore"):
            if op == "le":
                sat = col.values <= v
            elif op == "ge":
                sat = col.values >= v
            elif op == "eq":
                sat = col.values == v
            else:
                sat = col.values != v
    else:
        if op in ("le", "ge"):
            raise StageError(
                f"row_filter: ordering on categorical column {col.name!r}")
        tokens = np.array([x if x is not None else "" for x in col.values],
                          dtype=object)
        sat = tokens == str(value) if op == "eq" else tokens != str(value)
    sat = np.asarray(sat, dtype=bool)
    sat[missing] = False  # a predicate on a missing cell never holds
    return sat, missing


class RowFilter(FittedStage):
    def transform(self, frame: Frame, aux=None):
        keep = np.ones(frame.n_rows, dtype=bool)
        missing_hit = np.zeros(frame.n_rows, dtype=bool)
        for pred in self.descriptor.params["predicates"]:
            col = _lookup(frame, aux, pred["column"])
            sat, missing = _predicate_mask(col, pred["op"], pred["value"])
            missing_hit |= keep & ~sat & missing
            keep &= sat
        if not keep.any():
            raise StageError("row_filter removed every row")
        idx = np.flatnonzero(keep)
        notes = {"filtered": int((~keep).sum()),
                 "missing_predicate_rows": int(missing_hit.sum())}
        return frame.take(idx), idx, notes


def fit_row_filter(desc, frame, y):
    return RowFilter(desc, [])


class ValueReplace(FittedStage):
    def transform(self, frame: Frame, aux=None):
        p = self.descriptor.params
        col = frame.column(p["column"])
        if col.kind != CATEGORICAL:
            raise StageError(
                f"value_replace: column {p['column']!r} is not categorical")
        src, dst = str(p["from_value"]), str(p["to_value"])
        vals = np.array([dst if v == src else v for v in col.values],
                        dtype=object)
        return frame.with_column(Column(col.name, CATEGORICAL, vals)), None, None


def fit_value_replace(desc, frame, y):
    p = desc.params
    if p["column"] not in frame:
        raise StageError(f"value_replace: unknown column {p['column']!r}")
    return ValueReplace(desc, [p["column"]])


class ColumnDrop(FittedStage):
    def transform(self, frame: Frame, aux=None):
        return frame.drop(self.targets), None, None


def fit_column_drop(desc, frame, y):
    gone = list(desc.params["drop"]) or list(desc.columns or ())
    missing = [c for c in gone if c not in frame]
    if missing:
        raise StageError(f"column_drop: unknown column(s) {missing}")
    if not gone:
        raise StageError("column_drop: no columns given")
    return ColumnDrop(desc, gone)


FITTERS = {
    "row_filter": fit_row_filter,
    "value_replace": fit_value_replace,
    "column_drop": fit_column_drop,
}
