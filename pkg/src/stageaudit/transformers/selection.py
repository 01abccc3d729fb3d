"""ANOVA-based feature selection and principal component projection."""

from __future__ import annotations

import numpy as np
from scipy.stats import f as f_dist

from ..errors import EmptyFeatureSet, StageError
from ..frame import NUMERIC, Column, Frame
from . import FittedStage, require_numeric_complete, resolve_targets


def anova_f(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """One-way ANOVA F statistic of each column against a binary label.

    F = (SSB/1) / (SSW/(n-2)). A constant column gets F = 0; zero
    within-group variance with nonzero between-group variance gives inf.
    """
    y = np.asarray(y)
    m0 = y == 0
    m1 = ~m0
    n0, n1 = int(m0.sum()), int(m1.sum())
    if n0 == 0 or n1 == 0:
        raise StageError("feature selection needs both classes in training data")
    n = n0 + n1
    grand = X.mean(axis=0)
    mean0 = X[m0].mean(axis=0)
    mean1 = X[m1].mean(axis=0)
    ssb = n0 * (mean0 - grand) ** 2 + n1 * (mean1 - grand) ** 2
    ssw = ((X[m0] - mean0) ** 2).sum(axis=0) + ((X[m1] - mean1) ** 2).sum(axis=0)
    out = np.empty(X.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        out = ssb / (ssw / (n - 2))
    out[(ssw == 0) & (ssb == 0)] = 0.0
    out[(ssw == 0) & (ssb > 0)] = np.inf
    return out


class KeepColumns(FittedStage):
    def __init__(self, desc, targets, keep, scores):
        super().__init__(desc, targets)
        self.keep = list(keep)          # surviving target columns, in order
        self.scores = scores            # column -> F statistic

    def transform(self, frame: Frame, aux=None):
        gone = [c for c in self.targets if c not in set(self.keep)]
        return frame.drop(gone), None, None


def fit_selector(desc, frame, y):
    targets = resolve_targets(desc, frame)
    X = require_numeric_complete(frame, targets, desc.kind)
    fstat = anova_f(X, y)
    d = len(targets)
    fitted_warning = None
    if desc.kind == "kbest":
        k = desc.params["k"]
        if k >= d:
            if k > d:
                fitted_warning = f"kbest: k={k} > {d} features; keeping all"
            chosen = np.arange(d)
        else:
            # rank by F descending, ties to the lower feature index
            order = np.lexsort((np.arange(d), -fstat))
            chosen = np.sort(order[:k])
    elif desc.kind == "percentile":
        n_keep = max(1, int(np.floor(d * desc.params["percentile"] / 100.0
                                     + 0.5)))
        order = np.lexsort((np.arange(d), -fstat))
        chosen = np.sort(order[:n_keep])
    else:  # fpr
        n = len(y)
        pvals = f_dist.sf(fstat, 1, n - 2)
        chosen = np.flatnonzero(pvals < desc.params["alpha"])
        if len(chosen) == 0:
            raise EmptyFeatureSet(
                "fpr selection kept no features "
                f"(alpha={desc.params['alpha']})")
    keep = [targets[i] for i in chosen]
    fitted = KeepColumns(desc, targets, keep,
                         {t: float(s) for t, s in zip(targets, fstat)})
    if fitted_warning:
        fitted.warn(fitted_warning)
    return fitted


class PCAProject(FittedStage):
    def __init__(self, desc, targets, mean, components, explained, names):
        super().__init__(desc, targets)
        self.mean = mean
        self.components = components    # (k, d) orthonormal rows
        self.explained_variance = explained
        self.output_names = names

    def transform(self, frame: Frame, aux=None):
        X = require_numeric_complete(frame, self.targets, self.kind)
        Z = (X - self.mean) @ self.components.T
        block = [Column(name, NUMERIC, Z[:, i])
                 for i, name in enumerate(self.output_names)]
        # the component block takes the position of the first target column
        frame = frame.replace_at(self.targets[0], block)
        return frame.drop(self.targets[1:]), None, None


def fit_pca(desc, frame, y):
    targets = resolve_targets(desc, frame)
    X = require_numeric_complete(frame, targets, desc.kind)
    k = desc.params["n_components"]
    if k > X.shape[1]:
        raise StageError(f"pca: n_components={k} exceeds {X.shape[1]} features")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    # deterministic sign: the largest-magnitude loading of each component > 0
    for i in range(vt.shape[0]):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
    components = vt[:k]
    explained = (s[:k] ** 2) / (len(X) - 1) if len(X) > 1 else s[:k] ** 2
    names = []
    for i in range(k):
        name = f"pc{i + 1}"
        if name in frame and name not in targets:
            raise StageError(f"pca: output column {name!r} already exists")
        names.append(name)
    fitted = PCAProject(desc, targets, mean, components, explained, names)
    effective = int((s > (s[0] * 1e-12 if len(s) and s[0] > 0 else 0)).sum())
    if effective < k:
        fitted.warn(f"pca: rank deficiency; only {effective} of {k} "
                    "components carry variance")
    return fitted


FITTERS = {
    "kbest": fit_selector,
    "fpr": fit_selector,
    "percentile": fit_selector,
    "pca": fit_pca,
}
