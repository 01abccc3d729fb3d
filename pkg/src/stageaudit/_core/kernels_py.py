"""Pure-numpy kernels, numerically identical to the compiled backend.

Bit-identical results matter: audit reports must not depend on which backend
is installed. Both backends therefore perform the same scalar operations in
the same order per element — cumulative integer counts for the split scan,
and per-feature accumulation (not a vectorized reduction) for distances.
"""

from __future__ import annotations

import numpy as np


def split_scan(vals: np.ndarray, y: np.ndarray, min_leaf: int) -> tuple[int, float]:
    """Best binary-split boundary for one sorted feature column.

    `vals` must be sorted ascending with `y` (0/1 labels) aligned. Boundary
    p puts rows [0..p] left and [p+1..] right; a boundary is valid when both
    sides have at least `min_leaf` rows and vals[p] != vals[p+1].

    Returns (p, score) where score = sum over children of
    n_child * gini_child expressed as n - (c0^2 + c1^2)/n; lower is better.
    The first boundary attaining the minimum wins (lowest threshold).
    Returns (-1, inf) when no boundary is valid.
    """
    n = len(vals)
    if n < 2 * min_leaf:
        return -1, np.inf
    c1 = np.cumsum(y[:-1], dtype=np.int64)          # favorables in [0..p]
    n_left = np.arange(1, n, dtype=np.int64)
    c0 = n_left - c1
    total1 = c1[-1] + int(y[-1])
    n_right = n - n_left
    c1r = total1 - c1
    c0r = n_right - c1r
    fl = n_left.astype(np.float64)
    fr = n_right.astype(np.float64)
    score = (fl - (c0 * c0 + c1 * c1).astype(np.float64) / fl) \
        + (fr - (c0r * c0r + c1r * c1r).astype(np.float64) / fr)
    valid = (vals[1:] != vals[:-1]) \
        & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return -1, np.inf
    score = np.where(valid, score, np.inf)
    pos = int(np.argmin(score))                      # first occurrence of min
    return pos, float(score[pos])


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, accumulated feature by feature."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    out = np.zeros((a.shape[0], b.shape[0]), dtype=np.float64)
    for f in range(a.shape[1]):
        d = a[:, f, None] - b[None, :, f]
        out += d * d
    return out
