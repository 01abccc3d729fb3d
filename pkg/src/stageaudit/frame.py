"""Columnar container for tabular data flowing through pipeline stages.

Numeric columns are float64 arrays with NaN as the missing marker;
categorical columns are object arrays of str tokens with None as missing.
Frames are treated as immutable: every operation returns a new Frame that
shares unchanged column arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # NUMERIC or CATEGORICAL
    values: np.ndarray

    def missing_mask(self) -> np.ndarray:
        if self.kind == NUMERIC:
            return np.isnan(self.values)
        return np.array([v is None for v in self.values], dtype=bool)

    def has_missing(self) -> bool:
        return bool(self.missing_mask().any())


def numeric_column(name: str, values) -> Column:
    return Column(name, NUMERIC, np.asarray(values, dtype=np.float64))


def categorical_column(name: str, values) -> Column:
    arr = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        arr[i] = None if v is None else str(v)
    return Column(name, CATEGORICAL, arr)


class Frame:
    def __init__(self, columns: list[Column]):
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate column names: {names}")
        if columns:
            n = len(columns[0].values)
            for c in columns:
                if len(c.values) != n:
                    raise ValueError("ragged columns")
        self.columns = list(columns)
        self._index = {c.name: i for i, c in enumerate(columns)}

    @property
    def n_rows(self) -> int:
        return 0 if not self.columns else len(self.columns[0].values)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def column(self, name: str) -> Column:
        try:
            return self.columns[self._index[name]]
        except KeyError:
            raise KeyError(f"unknown column {name!r}") from None

    def kinds(self) -> dict[str, str]:
        return {c.name: c.kind for c in self.columns}

    def numeric_names(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == NUMERIC]

    def categorical_names(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == CATEGORICAL]

    def take(self, idx) -> "Frame":
        """Row subset/selection by integer index array or boolean mask."""
        idx = np.asarray(idx)
        return Frame([Column(c.name, c.kind, c.values[idx]) for c in self.columns])

    def drop(self, names) -> "Frame":
        gone = set(names)
        return Frame([c for c in self.columns if c.name not in gone])

    def with_column(self, col: Column) -> "Frame":
        """Replace a same-named column in place, or append."""
        cols = list(self.columns)
        if col.name in self._index:
            cols[self._index[col.name]] = col
        else:
            cols.append(col)
        return Frame(cols)

    def replace_at(self, name: str, replacement: list[Column]) -> "Frame":
        """Substitute one column with a block of columns at its position."""
        i = self._index[name]
        return Frame(self.columns[:i] + list(replacement) + self.columns[i + 1:])

    def matrix(self) -> np.ndarray:
        """All-numeric view as an (n, d) float64 matrix, in column order."""
        bad = self.categorical_names()
        if bad:
            raise ValueError(f"non-numeric columns remain: {bad}")
        if not self.columns:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        return np.column_stack([c.values for c in self.columns])

    def missing_any(self) -> np.ndarray:
        """Boolean mask of rows with at least one missing cell."""
        mask = np.zeros(self.n_rows, dtype=bool)
        for c in self.columns:
            mask |= c.missing_mask()
        return mask

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        if self.names != other.names:
            return False
        for a, b in zip(self.columns, other.columns):
            if a.kind != b.kind:
                return False
            if a.kind == NUMERIC:
                if not np.array_equal(a.values, b.values, equal_nan=True):
                    return False
            elif not all(x == y for x, y in zip(a.values, b.values)):
                return False
        return True
