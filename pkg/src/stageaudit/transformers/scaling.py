"""Column scalers, row normalizers, and the non-linear mappers."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from ..frame import Column, Frame
from . import FittedStage, require_numeric_complete, resolve_targets


class ColumnAffine(FittedStage):
    """Per-column x -> (x - shift) / scale; scale 0 marks a passthrough."""

    def __init__(self, desc, targets, shift, scale):
        super().__init__(desc, targets)
        self.shift = shift
        self.scale = scale

    def transform(self, frame: Frame, aux=None):
        require_numeric_complete(frame, self.targets, self.kind)
        for name, mu, s in zip(self.targets, self.shift, self.scale):
            if s == 0.0:
                continue
            col = frame.column(name)
            frame = frame.with_column(Column(name, col.kind,
                                             (col.values - mu) / s))
        return frame, None, None


def fit_scaler(desc, frame, y):
    targets = _targets(desc, frame)
    X = require_numeric_complete(frame, targets, desc.kind)
    shift = np.zeros(X.shape[1])
    scale = np.zeros(X.shape[1])
    fitted = ColumnAffine(desc, targets, shift, scale)
    for j, name in enumerate(targets):
        col = X[:, j]
        if desc.kind == "zscore":
            mu = col.mean()
            s = col.std(ddof=1) if len(col) > 1 else 0.0
        elif desc.kind == "minmax":
            mu = col.min()
            s = col.max() - col.min()
        elif desc.kind == "maxabs":
            mu = 0.0
            s = np.abs(col).max()
        else:  # robust
            mu = float(np.median(col))
            q25, q75 = np.quantile(col, [0.25, 0.75])
            s = q75 - q25
        if s == 0.0:
            fitted.warn(f"{desc.kind}: column {name!r} is degenerate "
                        "(zero spread); passed through unscaled")
        shift[j], scale[j] = mu, s
    return fitted


class RowNormalizer(FittedStage):
    def transform(self, frame: Frame, aux=None):
        X = require_numeric_complete(frame, self.targets, self.kind)
        if self.descriptor.params["norm"] == "l1":
            norms = np.abs(X).sum(axis=1)
        else:
            norms = np.sqrt((X * X).sum(axis=1))
        norms = np.where(norms == 0.0, 1.0, norms)  # all-zero rows unchanged
        X = X / norms[:, None]
        for j, name in enumerate(self.targets):
            frame = frame.with_column(Column(name, "numeric", X[:, j]))
        return frame, None, None


def fit_normalizer(desc, frame, y):
    targets = _targets(desc, frame)
    require_numeric_complete(frame, targets, desc.kind)
    return RowNormalizer(desc, targets)


class QuantileMapper(FittedStage):
    def __init__(self, desc, targets, knots, probs):
        super().__init__(desc, targets)
        self.knots = knots   # per-column training quantiles
        self.probs = probs

    def transform(self, frame: Frame, aux=None):
        require_numeric_complete(frame, self.targets, self.kind)
        normal = self.descriptor.params["output"] == "normal"
        for name, q in zip(self.targets, self.knots):
            x = frame.column(name).values
            p = np.interp(x, q, self.probs)
            if normal:
                p = ndtri(np.clip(p, 1e-7, 1.0 - 1e-7))
            frame = frame.with_column(Column(name, "numeric", p))
        return frame, None, None


def fit_quantile_mapper(desc, frame, y):
    targets = _targets(desc, frame)
    X = require_numeric_complete(frame, targets, desc.kind)
    nq = desc.params["n_quantiles"]
    if nq > len(X):
        nq = len(X)
        fitted_warn = (f"n_quantiles reduced to the {nq} training rows")
    else:
        fitted_warn = None
    probs = np.linspace(0.0, 1.0, nq)
    knots = [np.quantile(X[:, j], probs) for j in range(X.shape[1])]
    fitted = QuantileMapper(desc, targets, knots, probs)
    if fitted_warn:
        fitted.warn(fitted_warn)
    return fitted


# ------------------------------------------------------------- Yeo-Johnson

def yeo_johnson(x: np.ndarray, lam: float) -> np.ndarray:
    """Monotone power transform defined for all reals; lam=1 is identity."""
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    if abs(lam) > 1e-12:
        out[pos] = (np.power(x[pos] + 1.0, lam) - 1.0) / lam
    else:
        out[pos] = np.log1p(x[pos])
    if abs(lam - 2.0) > 1e-12:
        out[~pos] = -(np.power(1.0 - x[~pos], 2.0 - lam) - 1.0) / (2.0 - lam)
    else:
        out[~pos] = -np.log1p(-x[~pos])
    return out


def yeo_johnson_loglik(x: np.ndarray, lam: float) -> float:
    psi = yeo_johnson(x, lam)
    var = psi.var()
    if var <= 0.0:
        return -np.inf
    n = len(x)
    return (-0.5 * n * np.log(var)
            + (lam - 1.0) * float(np.sum(np.sign(x) * np.log1p(np.abs(x)))))


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-5) -> float:
    """Golden-section search for the maximizer of a unimodal function."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class PowerMapper(FittedStage):
    def __init__(self, desc, targets, lambdas, means, stds):
        super().__init__(desc, targets)
        self.lambdas = lambdas
        self.means = means
        self.stds = stds

    def transform(self, frame: Frame, aux=None):
        require_numeric_complete(frame, self.targets, self.kind)
        for name, lam, mu, s in zip(self.targets, self.lambdas, self.means,
                                    self.stds):
            if lam is None:
                continue  # degenerate column passthrough
            x = yeo_johnson(frame.column(name).values, lam)
            frame = frame.with_column(Column(name, "numeric", (x - mu) / s))
        return frame, None, None


def fit_power_mapper(desc, frame, y):
    targets = _targets(desc, frame)
    X = require_numeric_complete(frame, targets, desc.kind)
    lambdas, means, stds = [], [], []
    fitted = PowerMapper(desc, targets, lambdas, means, stds)
    for j, name in enumerate(targets):
        col = X[:, j]
        if col.min() == col.max():
            fitted.warn(f"power_mapper: column {name!r} is constant; "
                        "passed through")
            lambdas.append(None)
            means.append(0.0)
            stds.append(1.0)
            continue
        lam = golden_section_max(lambda l: yeo_johnson_loglik(col, l),
                                 -5.0, 5.0)
        psi = yeo_johnson(col, lam)
        mu = psi.mean()
        s = psi.std(ddof=1) if len(psi) > 1 else 1.0
        lambdas.append(float(lam))
        means.append(float(mu))
        stds.append(float(s) if s > 0 else 1.0)
    return fitted


_targets = resolve_targets


class Noop(FittedStage):
    def transform(self, frame: Frame, aux=None):
        return frame, None, None


def fit_noop(desc, frame, y):
    return Noop(desc, [])


FITTERS = {
    "zscore": fit_scaler,
    "minmax": fit_scaler,
    "maxabs": fit_scaler,
    "robust": fit_scaler,
    "normalizer": fit_normalizer,
    "quantile_mapper": fit_quantile_mapper,
    "power_mapper": fit_power_mapper,
    "noop": fit_noop,
}
