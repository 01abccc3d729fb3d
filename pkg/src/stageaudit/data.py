"""Dataset loading, validation, group bookkeeping, and train/test splitting."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, EmptyGroup, MissingNotAllowed, NonBinaryLabel
from .frame import CATEGORICAL, NUMERIC, Column, Frame

DEFAULT_MISSING_TOKENS = ("", "NA", "?")


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str  # "numeric" | "categorical"
    allowed_missing: bool = False

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ConfigError(f"column {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class GroupSpec:
    sensitive_column: str
    privileged_values: frozenset
    favorable_label: str

    def __post_init__(self):
        if not self.privileged_values:
            raise ConfigError("privileged_values must be non-empty")


@dataclass(frozen=True)
class GroupCounts:
    """Stratum sizes: group x true label."""

    n_u: int
    n_p: int
    n_u_y1: int
    n_u_y0: int
    n_p_y1: int
    n_p_y0: int

    def __post_init__(self):
        if self.n_u_y1 + self.n_u_y0 != self.n_u or self.n_p_y1 + self.n_p_y0 != self.n_p:
            raise DataError("inconsistent group counts")


@dataclass(frozen=True)
class Dataset:
    """Immutable validated table with group/label designations.

    `frame` holds the feature columns only. The raw label and sensitive
    token columns ride alongside so later row filters can reference them;
    `y` is the 0/1 favorability-mapped label and `priv` the privileged-group
    membership mask.
    """

    schema: tuple[ColumnSchema, ...]
    frame: Frame
    y: np.ndarray
    priv: np.ndarray
    group: GroupSpec
    label_column: str
    raw: dict = field(repr=False)  # label/sensitive raw token columns
    include_sensitive: bool = True

    def __post_init__(self):
        if self.n == 0:
            raise DataError("dataset has no rows")
        n_p = int(self.priv.sum())
        if n_p == 0 or n_p == self.n:
            raise EmptyGroup(
                f"group sizes n_p={n_p}, n_u={self.n - n_p}; both must be >= 1")
        ones = int(self.y.sum())
        if ones == 0 or ones == self.n:
            raise NonBinaryLabel(
                "label is single-class after favorability mapping")

    @property
    def n(self) -> int:
        return len(self.y)

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(
            schema=self.schema,
            frame=self.frame.take(idx),
            y=self.y[idx],
            priv=self.priv[idx],
            group=self.group,
            label_column=self.label_column,
            raw={k: v[idx] for k, v in self.raw.items()},
            include_sensitive=self.include_sensitive,
        )

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.n).encode())
        for cs in self.schema:
            h.update(f"{cs.name}:{cs.kind}:{cs.allowed_missing};".encode())
        for col in self.frame.columns:
            if col.kind == NUMERIC:
                h.update(col.values.tobytes())
            else:
                for v in col.values:
                    h.update(b"\x00" if v is None else v.encode())
        h.update(self.y.tobytes())
        h.update(self.priv.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_idx: np.ndarray = field(repr=False)
    test_idx: np.ndarray = field(repr=False)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(self.train_idx.astype(np.int64).tobytes())
        h.update(self.test_idx.astype(np.int64).tobytes())
        h.update(f"{self.seed}:{self.train_fraction}".encode())
        return h.hexdigest()


def _parse_cell(token: str, kind: str, missing_tokens) -> object:
    if token in missing_tokens:
        return None
    if kind == NUMERIC:
        try:
            return float(token)
        except ValueError:
            raise DataError(f"non-numeric cell {token!r}") from None
    return token


def load_csv(path, schema, label_column, group, *, missing_tokens=DEFAULT_MISSING_TOKENS,
             label_replacements=None, include_sensitive=True) -> Dataset:
    """Load and validate an RFC-4180 CSV against a declared schema.

    Missing cells are recorded as explicit markers (NaN / None), never
    dropped. The label column is mapped favorable->1 / other->0 after the
    optional token replacements.
    """
    schema = tuple(schema)
    names = [c.name for c in schema]
    if len(set(names)) != len(names):
        raise ConfigError("schema column names must be unique")
    by_name = {c.name: c for c in schema}
    if label_column not in by_name:
        raise ConfigError(f"label column {label_column!r} not in schema")
    if by_name[label_column].kind != CATEGORICAL:
        raise ConfigError("label column must be declared categorical")
    sens = group.sensitive_column
    if sens not in by_name:
        raise ConfigError(f"sensitive column {sens!r} not in schema")
    if by_name[sens].kind != CATEGORICAL:
        raise ConfigError("sensitive column must be categorical")
    if sens == label_column:
        raise ConfigError("sensitive column cannot be the label column")

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != names:
            raise DataError(
                f"{path}: header {header!r} does not match schema {names!r}")
        cells = {name: [] for name in names}
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise DataError(f"{path}:{row_no}: expected {len(names)} cells, "
                                f"got {len(row)}")
            for name, token in zip(names, row):
                cells[name].append(
                    _parse_cell(token, by_name[name].kind, missing_tokens))
    n = len(cells[names[0]])
    if n == 0:
        raise DataError(f"{path}: no data rows")

    for cs in schema:
        vals = cells[cs.name]
        n_missing = sum(v is None for v in vals)
        if n_missing and not cs.allowed_missing:
            raise MissingNotAllowed(
                f"column {cs.name!r} has {n_missing} missing cell(s) "
                "but allowed_missing is false")
    # Label and sensitive cells must be observed for every row.
    for special in (label_column, sens):
        if any(v is None for v in cells[special]):
            raise MissingNotAllowed(f"column {special!r} may not be missing")

    label_tokens = list(cells[label_column])
    if label_replacements:
        label_tokens = [label_replacements.get(t, t) for t in label_tokens]
    fav = str(group.favorable_label)
    y = np.array([1 if t == fav else 0 for t in label_tokens], dtype=np.int8)

    sens_tokens = cells[sens]
    observed_sens = set(sens_tokens)
    pv = {str(v) for v in group.privileged_values}
    if not pv & observed_sens:
        raise EmptyGroup(f"no observed value of {sens!r} is privileged")
    if not observed_sens - pv:
        raise EmptyGroup(f"every observed value of {sens!r} is privileged; "
                         "privileged_values must be a strict subset")
    priv = np.array([t in pv for t in sens_tokens], dtype=bool)

    feature_schema = [cs for cs in schema if cs.name != label_column]
    if not include_sensitive:
        feature_schema = [cs for cs in feature_schema if cs.name != sens]
    cols = []
    for cs in feature_schema:
        vals = cells[cs.name]
        if cs.kind == NUMERIC:
            arr = np.array([np.nan if v is None else v for v in vals],
                           dtype=np.float64)
            cols.append(Column(cs.name, NUMERIC, arr))
        else:
            arr = np.empty(n, dtype=object)
            arr[:] = vals
            cols.append(Column(cs.name, CATEGORICAL, arr))
    raw = {
        label_column: np.array(label_tokens, dtype=object),
        sens: np.array(sens_tokens, dtype=object),
    }
    return Dataset(schema=schema, frame=Frame(cols), y=y, priv=priv, group=group,
                   label_column=label_column, raw=raw,
                   include_sensitive=include_sensitive)


def save_csv(dataset: Dataset, path, *, missing_token="") -> None:
    """Serialize back to CSV in schema order (round-trip inverse of load_csv).

    Raw label/sensitive tokens are written as loaded; label_replacements are
    not undone, so a reloaded dataset compares equal when loaded without them.
    """
    names = [cs.name for cs in dataset.schema]
    by_name = {cs.name: cs for cs in dataset.schema}

    def fmt_numeric(x):
        if np.isnan(x):
            return missing_token
        return repr(float(x))

    columns = {}
    for name in names:
        if name in dataset.raw:
            columns[name] = [str(v) for v in dataset.raw[name]]
        elif name in dataset.frame:
            col = dataset.frame.column(name)
            if col.kind == NUMERIC:
                columns[name] = [fmt_numeric(v) for v in col.values]
            else:
                columns[name] = [missing_token if v is None else v
                                 for v in col.values]
        else:
            raise DataError(f"column {name!r} was dropped; cannot round-trip")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(dataset.n):
            writer.writerow([columns[name][i] for name in names])


def _train_size(n: int, fraction: float) -> int:
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"train fraction must be in (0,1), got {fraction}")
    k = int(np.floor(n * fraction + 0.5))
    if k < 1 or k > n - 1:
        raise DataError(f"fraction {fraction} leaves an empty side for n={n}")
    return k


def split(dataset: Dataset, fraction: float, seed: int,
          stratify_on_label: bool = False) -> SplitPair:
    """Deterministic shuffled split; a pure function of (dataset, fraction, seed)."""
    n = dataset.n
    rng = np.random.default_rng(seed)
    if not stratify_on_label:
        perm = rng.permutation(n)
        k = _train_size(n, fraction)
        train_idx, test_idx = perm[:k], perm[k:]
    else:
        train_parts, test_parts = [], []
        for cls in (0, 1):
            cls_idx = np.flatnonzero(dataset.y == cls)
            if len(cls_idx) < 2:
                raise DataError(
                    f"class {cls} has {len(cls_idx)} instance(s); "
                    "stratified split impossible")
            perm = cls_idx[rng.permutation(len(cls_idx))]
            k = _train_size(len(cls_idx), fraction)
            train_parts.append(perm[:k])
            test_parts.append(perm[k:])
        train_idx = np.sort(np.concatenate(train_parts))
        test_idx = np.sort(np.concatenate(test_parts))
    train_idx = train_idx.astype(np.int64)
    test_idx = test_idx.astype(np.int64)
    return SplitPair(
        train=dataset.take(train_idx),
        test=dataset.take(test_idx),
        seed=seed,
        train_fraction=fraction,
        train_idx=train_idx,
        test_idx=test_idx,
    )


def group_counts(y: np.ndarray, priv: np.ndarray) -> GroupCounts:
    """Stratum sizes n_u, n_p, n_{g,Y=1}, n_{g,Y=0} from label/group arrays."""
    y = np.asarray(y)
    priv = np.asarray(priv, dtype=bool)
    u = ~priv
    return GroupCounts(
        n_u=int(u.sum()),
        n_p=int(priv.sum()),
        n_u_y1=int((u & (y == 1)).sum()),
        n_u_y0=int((u & (y == 0)).sum()),
        n_p_y1=int((priv & (y == 1)).sum()),
        n_p_y0=int((priv & (y == 0)).sum()),
    )


def dataset_group_counts(dataset: Dataset) -> GroupCounts:
    return group_counts(dataset.y, dataset.priv)
