"""Train-set resampling: SMOTE oversampling and two undersamplers.

Samplers never touch test data; the pipeline invokes them at fit time only.
All randomness flows through the generator handed in by the pipeline, so a
fixed (train, params, seed) fully determines the output.
"""

from __future__ import annotations

import numpy as np

from .._core import pairwise_sq_dists
from ..errors import StageError
from ..frame import NUMERIC, Column, Frame
from . import require_numeric_complete, resolve_targets


def _class_split(y):
    idx1 = np.flatnonzero(y == 1)
    idx0 = np.flatnonzero(y == 0)
    if len(idx1) <= len(idx0):
        return idx1, idx0  # minority, majority
    return idx0, idx1


def _rebuild(frame: Frame, X: np.ndarray, names) -> Frame:
    return Frame([Column(n, NUMERIC, X[:, j]) for j, n in enumerate(names)])


def _stable_neighbor_order(dists: np.ndarray) -> np.ndarray:
    # equal distances resolve to the lowest point index
    return np.argsort(dists, axis=1, kind="stable")


def _smote(desc, frame, y, priv, rng):
    names = resolve_targets(desc, frame)
    X = require_numeric_complete(frame, names, "smote")
    minority, majority = _class_split(y)
    deficit = len(majority) - len(minority)
    if deficit == 0:
        return frame, y, priv
    if len(minority) < 2:
        raise StageError("smote needs at least 2 minority instances")
    k = min(desc.params["k_neighbors"], len(minority) - 1)
    Xm = X[minority]
    order = _stable_neighbor_order(pairwise_sq_dists(Xm, Xm))
    # drop self (distance zero at own index) from each neighbor list
    neighbors = np.empty((len(minority), k), dtype=np.int64)
    for i in range(len(minority)):
        row = order[i]
        neighbors[i] = row[row != i][:k]
    synth = np.empty((deficit, X.shape[1]))
    synth_priv = np.empty(deficit, dtype=bool)
    for s in range(deficit):
        i = int(rng.integers(0, len(minority)))
        j = int(neighbors[i, int(rng.integers(0, k))])
        gap = rng.random()
        synth[s] = Xm[i] + gap * (Xm[j] - Xm[i])
        synth_priv[s] = priv[minority[i]]
    minority_label = int(y[minority[0]])
    new_X = np.concatenate([X, synth])
    new_y = np.concatenate([y, np.full(deficit, minority_label, dtype=y.dtype)])
    new_priv = np.concatenate([priv, synth_priv])
    return _rebuild(frame, new_X, names), new_y, new_priv


def _knn_labels(X, y, k):
    """Leave-one-out k-NN vote for every instance; ties keep the own label."""
    order = _stable_neighbor_order(pairwise_sq_dists(X, X))
    votes = np.empty(len(y), dtype=np.int64)
    for i in range(len(y)):
        nn = order[i][order[i] != i][:k]
        votes[i] = y[nn].sum()
    pred = np.where(2 * votes > k, 1, np.where(2 * votes < k, -1, -2))
    # -2 marks a tie; treat as agreeing with the true label
    out = np.where(pred == -2, y, np.where(pred == 1, 1, 0))
    return out


def _edited_nn(desc, frame, y, priv, rng):
    names = resolve_targets(desc, frame)
    X = require_numeric_complete(frame, names, "edited_nn_undersample")
    keep = np.arange(len(y))
    for k in (1, 2, 3):
        yk = y[keep]
        minority, majority = _class_split(yk)
        if len(majority) <= len(minority) or len(keep) <= k:
            break
        pred = _knn_labels(X[keep], yk, k)
        maj_label = int(yk[majority[0]])
        drop_local = np.flatnonzero((yk == maj_label) & (pred != yk))
        if len(drop_local) == len(majority):
            break  # never empty the majority class
        keep = np.delete(keep, drop_local)
    return frame.take(keep), y[keep], priv[keep]


def _random_under(desc, frame, y, priv, rng):
    names = resolve_targets(desc, frame)
    require_numeric_complete(frame, names, "random_undersample")
    minority, majority = _class_split(y)
    if len(majority) == len(minority):
        return frame, y, priv
    chosen = rng.choice(majority, size=len(minority), replace=False)
    keep = np.sort(np.concatenate([minority, chosen]))
    return frame.take(keep), y[keep], priv[keep]


_SAMPLERS = {
    "smote": _smote,
    "edited_nn_undersample": _edited_nn,
    "random_undersample": _random_under,
}


def resample(desc, frame, y, priv, rng):
    y = np.asarray(y)
    if y.min() == y.max():
        raise StageError(f"{desc.kind}: training data has a single class")
    return _SAMPLERS[desc.kind](desc, frame, y, np.asarray(priv, dtype=bool),
                                rng)


FITTERS = {}
