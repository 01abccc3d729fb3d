"""Deterministic, seedable binary classifiers built on the kernel backend.

Tie-breaking is fixed so pipelines are reproducible bit-for-bit:
equal split scores go to the lowest feature index and lowest threshold,
k-NN and leaf/forest vote ties resolve to the unfavorable label (0).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._core import pairwise_sq_dists, split_scan
from .errors import ConfigError, DataError

CLASSIFIER_KINDS = ("logistic_regression", "decision_tree", "random_forest",
                    "k_neighbors")

_DEFAULTS = {
    "logistic_regression": {"l2": 1e-2, "max_iter": 2000, "tol": 1e-6,
                            "learning_rate": None, "standardize": False},
    "decision_tree": {"max_depth": 8, "min_samples_leaf": 5},
    "random_forest": {"n_estimators": 11, "max_depth": 8, "min_samples_leaf": 5},
    "k_neighbors": {"k": 5},
}


def _validate_params(kind, p):
    if kind == "logistic_regression":
        if p["l2"] < 0:
            raise ConfigError("l2 must be >= 0")
        if p["learning_rate"] is not None and p["learning_rate"] <= 0:
            raise ConfigError("learning-rate must be > 0")
        if p["max_iter"] < 1 or p["tol"] <= 0:
            raise ConfigError("bad stopping parameters")
    elif kind in ("decision_tree", "random_forest"):
        if p["max_depth"] < 1:
            raise ConfigError("tree depth must be >= 1")
        if p["min_samples_leaf"] < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if kind == "random_forest" and p["n_estimators"] < 1:
            raise ConfigError("forest size must be >= 1")
    elif kind == "k_neighbors":
        if p["k"] < 1:
            raise ConfigError("k must be >= 1")
    else:
        raise ConfigError(f"unknown classifier kind {kind!r}")


@dataclass(frozen=True)
class ClassifierDescriptor:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CLASSIFIER_KINDS:
            raise ConfigError(f"unknown classifier kind {self.kind!r}")
        merged = dict(_DEFAULTS[self.kind])
        unknown = set(self.params) - set(merged)
        if unknown:
            raise ConfigError(f"{self.kind}: unknown params {sorted(unknown)}")
        merged.update(self.params)
        _validate_params(self.kind, merged)
        object.__setattr__(self, "params", merged)


class FittedClassifier:
    kind = "base"

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class ConstantClassifier(FittedClassifier):
    kind = "constant"

    def __init__(self, label: int):
        self.label = int(label)

    def predict(self, X):
        return np.full(X.shape[0], self.label, dtype=np.int8)


# ---------------------------------------------------------------- logistic

def sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(w, X_aug, y, l2):
    """Mean negative log-likelihood with L2 penalty on non-intercept weights."""
    z = X_aug @ w
    # softplus(z) - y*z, stable for large |z|
    nll = np.logaddexp(0.0, z) - y * z
    reg = 0.5 * l2 * float(w[1:] @ w[1:])
    return float(nll.mean()) + reg


def logistic_grad(w, X_aug, y, l2):
    """Analytic gradient of logistic_loss."""
    p = sigmoid(X_aug @ w)
    g = X_aug.T @ (p - y) / len(y)
    g[1:] += l2 * w[1:]
    return g


class LogisticRegression(FittedClassifier):
    kind = "logistic_regression"

    def __init__(self, w, mean, scale, n_iter):
        self.w = w          # [intercept, coefs...]
        self.mean = mean    # standardization state or None
        self.scale = scale
        self.n_iter = n_iter

    def decision(self, X):
        if self.mean is not None:
            X = (X - self.mean) / self.scale
        return X @ self.w[1:] + self.w[0]

    def predict(self, X):
        if X.shape[1] != len(self.w) - 1:
            raise DataError(f"expected {len(self.w) - 1} features, "
                            f"got {X.shape[1]}")
        return (self.decision(X) > 0).astype(np.int8)


def _fit_logistic(X, y, p):
    mean = scale = None
    if p["standardize"]:
        mean = X.mean(axis=0)
        scale = X.std(axis=0, ddof=1) if len(X) > 1 else np.ones(X.shape[1])
        scale = np.where(scale == 0, 1.0, scale)
        X = (X - mean) / scale
    X_aug = np.column_stack([np.ones(len(X)), X])
    y = y.astype(np.float64)
    lr = p["learning_rate"]
    if lr is None:
        # 1/L with L the Lipschitz bound of the mean logistic loss gradient
        smax = np.linalg.svd(X_aug, compute_uv=False)[0]
        lr = 1.0 / (smax * smax / (4.0 * len(y)) + p["l2"])
    w = np.zeros(X_aug.shape[1])
    it = 0
    for it in range(1, p["max_iter"] + 1):
        g = logistic_grad(w, X_aug, y, p["l2"])
        if np.max(np.abs(g)) < p["tol"]:
            break
        w = w - lr * g
    return LogisticRegression(w, mean, scale, it)


# ------------------------------------------------------------------- trees

@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    label: int = 0


class DecisionTree(FittedClassifier):
    kind = "decision_tree"

    def __init__(self, root, n_features):
        self.root = root
        self.n_features = n_features

    def predict(self, X):
        if X.shape[1] != self.n_features:
            raise DataError(f"expected {self.n_features} features, "
                            f"got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=np.int8)
        self._fill(self.root, X, np.arange(X.shape[0]), out)
        return out

    def _fill(self, node, X, idx, out):
        if len(idx) == 0:
            return
        if node.feature < 0:
            out[idx] = node.label
            return
        go_left = X[idx, node.feature] <= node.threshold
        self._fill(node.left, X, idx[go_left], out)
        self._fill(node.right, X, idx[~go_left], out)


def _leaf(y):
    ones = int(y.sum())
    return _Node(label=1 if 2 * ones > len(y) else 0)


def _grow(X, y, depth, max_depth, min_leaf, rng, max_features):
    n, d = X.shape
    ones = int(y.sum())
    if ones == 0 or ones == n or depth >= max_depth or n < 2 * min_leaf:
        return _leaf(y)
    if max_features is not None and max_features < d:
        feats = np.sort(rng.choice(d, size=max_features, replace=False))
    else:
        feats = np.arange(d)
    best = (np.inf, -1, -1)  # score, feature, boundary
    orders = {}
    for f in feats:
        order = np.argsort(X[:, f], kind="stable")
        pos, score = split_scan(X[order, f], y[order], min_leaf)
        if pos >= 0 and score < best[0]:
            best = (score, int(f), pos)
            orders[f] = order
    if best[1] < 0:
        return _leaf(y)
    _, f, pos = best
    order = orders[f]
    vals = X[order, f]
    thr = 0.5 * (vals[pos] + vals[pos + 1])
    go_left = X[:, f] <= thr
    node = _Node(feature=f, threshold=float(thr))
    node.left = _grow(X[go_left], y[go_left], depth + 1, max_depth, min_leaf,
                      rng, max_features)
    node.right = _grow(X[~go_left], y[~go_left], depth + 1, max_depth,
                       min_leaf, rng, max_features)
    return node


class RandomForest(FittedClassifier):
    kind = "random_forest"

    def __init__(self, trees):
        self.trees = trees

    def predict(self, X):
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for t in self.trees:
            votes += t.predict(X)
        return (2 * votes > len(self.trees)).astype(np.int8)


class KNeighbors(FittedClassifier):
    kind = "k_neighbors"

    def __init__(self, X, y, k):
        self.X = X
        self.y = y
        self.k = min(k, len(y))

    def predict(self, X, block=512):
        if X.shape[1] != self.X.shape[1]:
            raise DataError(f"expected {self.X.shape[1]} features, "
                            f"got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=np.int8)
        for start in range(0, X.shape[0], block):
            chunk = X[start:start + block]
            dist = pairwise_sq_dists(chunk, self.X)
            # stable sort: equal distances resolve to the lowest train index
            nn = np.argsort(dist, axis=1, kind="stable")[:, :self.k]
            votes = self.y[nn].sum(axis=1)
            out[start:start + block] = (2 * votes > self.k).astype(np.int8)
        return out


def fit(desc: ClassifierDescriptor, X: np.ndarray, y: np.ndarray,
        context_seed: int = 0) -> FittedClassifier:
    """Train a classifier; context_seed folds in the experiment repeat."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int8)
    if np.isnan(X).any():
        raise DataError("classifier input contains missing values")
    if len(X) != len(y) or len(y) == 0:
        raise DataError("bad training data shape")
    p = desc.params
    ones = int(y.sum())
    if ones == 0 or ones == len(y):
        warnings.warn("single-class training data; constant classifier",
                      stacklevel=2)
        return ConstantClassifier(1 if ones else 0)
    if desc.kind == "logistic_regression":
        return _fit_logistic(X, y, p)
    if desc.kind == "decision_tree":
        rng = np.random.default_rng(
            np.random.SeedSequence([desc.seed, context_seed]))
        root = _grow(X, y, 0, p["max_depth"], p["min_samples_leaf"], rng, None)
        return DecisionTree(root, X.shape[1])
    if desc.kind == "random_forest":
        ss = np.random.SeedSequence([desc.seed, context_seed])
        children = ss.spawn(p["n_estimators"])
        max_features = max(1, int(np.sqrt(X.shape[1])))
        trees = []
        for child in children:
            rng = np.random.default_rng(child)
            boot = rng.integers(0, len(y), size=len(y))
            Xb, yb = X[boot], y[boot]
            if yb.min() == yb.max():
                trees.append(DecisionTree(_leaf(yb), X.shape[1]))
                continue
            root = _grow(Xb, yb, 0, p["max_depth"], p["min_samples_leaf"],
                         rng, max_features)
            trees.append(DecisionTree(root, X.shape[1]))
        return RandomForest(trees)
    if desc.kind == "k_neighbors":
        return KNeighbors(X.copy(), y.copy(), p["k"])
    raise ConfigError(f"unknown classifier kind {desc.kind!r}")
