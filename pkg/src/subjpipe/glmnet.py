"""Binary logistic regression with an elastic-net penalty, trained by SAGA.

The objective, for labels y in {-1, +1}, per-sample weights s and margin
m_i = w.x_i + b, is

    J(w, b) = (1/n) sum_i s_i * log(1 + exp(-y_i m_i))
              + (1/(c n)) * (alpha * ||w||_1 + (1 - alpha)/2 * ||w||_2^2)

with the bias unpenalized and c the inverse regularization strength.  The
solver keeps a table of per-sample smooth gradients, takes one seeded
uniformly-sampled step at a time, and applies soft-thresholding for the L1
part after each smooth step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, ClassifierMixin

from .corpus import Label
from .errors import DomainError, FormatError, TruncationError

import struct

MAGIC = b"SGLM"
VERSION = 1

LABEL_TO_SIGN = {Label.SUBJ: 1, Label.OBJ: -1}
SIGN_TO_LABEL = {1: Label.SUBJ, -1: Label.OBJ}


class ClassWeightMode(Enum):
    NONE = "none"
    BALANCED = "balanced"


@dataclass(frozen=True)
class TrainConfig:
    c: float = 0.5
    l1_ratio: float = 0.5
    class_weight_mode: ClassWeightMode = ClassWeightMode.BALANCED
    max_epochs: int = 1000
    tolerance: float = 1e-6
    seed: int = 0
    threshold: float = 0.5
    standardize: bool = False

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("c must be positive")
        if not 0.0 <= self.l1_ratio <= 1.0:
            raise DomainError("l1_ratio must lie in [0, 1]")
        if self.max_epochs <= 0 or self.tolerance <= 0:
            raise DomainError("max_epochs and tolerance must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise DomainError("threshold must lie in (0, 1)")


def balanced_weights(labels) -> dict:
    """Per-class weight n_total / (2 * n_class), equalizing class mass."""
    labels = list(labels)
    counts: dict = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    if len(counts) < 2:
        raise DomainError("balanced weights need both classes present")
    n = len(labels)
    return {lab: n / (2 * cnt) for lab, cnt in counts.items()}


def soft_threshold(v, t):
    """Proximal map of t * |.|: shrink toward zero by t."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("threshold must be nonnegative")
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _penalties(cfg: TrainConfig, n: int) -> tuple[float, float]:
    lam1 = cfg.l1_ratio / (cfg.c * n)
    lam2 = (1.0 - cfg.l1_ratio) / (cfg.c * n)
    return lam1, lam2


def objective(X, y, s, w, b, cfg: TrainConfig) -> float:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = X.shape[0]
    margins = X @ w + b
    loss = float(np.mean(s * np.logaddexp(0.0, -y * margins)))
    lam1, lam2 = _penalties(cfg, n)
    return loss + lam1 * float(np.sum(np.abs(w))) + 0.5 * lam2 * float(w @ w)


def smooth_gradient(X, y, s, w, b, cfg: TrainConfig) -> tuple[np.ndarray, float]:
    """Analytic gradient of the differentiable part (log-loss + L2)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = X.shape[0]
    margins = X @ w + b
    # d/dm of s*log(1+exp(-y m)) is -s*y*sigma(-y m)
    coef = -s * y / (1.0 + np.exp(y * margins))
    _, lam2 = _penalties(cfg, n)
    grad_w = X.T @ coef / n + lam2 * w
    grad_b = float(np.mean(coef))
    return grad_w, grad_b


@njit(cache=True)
def _saga_epoch(X, y, s, w, b, phi, avg_w, avg_b, idx, gamma, lam1, lam2):  # pragma: no cover
    n, d = X.shape
    shrink = gamma * lam1
    for t in range(n):
        j = idx[t]
        m = b
        for k in range(d):
            m += w[k] * X[j, k]
        z = -y[j] * m
        if z >= 0.0:
            sig = 1.0 / (1.0 + np.exp(-z))
        else:
            ez = np.exp(z)
            sig = ez / (1.0 + ez)
        phi_new = -s[j] * y[j] * sig
        delta = phi_new - phi[j]
        b -= gamma * (delta + avg_b)
        for k in range(d):
            v = w[k] - gamma * (delta * X[j, k] + avg_w[k] + lam2 * w[k])
            if v > shrink:
                w[k] = v - shrink
            elif v < -shrink:
                w[k] = v + shrink
            else:
                w[k] = 0.0
        for k in range(d):
            avg_w[k] += delta * X[j, k] / n
        avg_b += delta / n
        phi[j] = phi_new
    return b, avg_b


class ElasticNetLogistic(BaseEstimator, ClassifierMixin):
    """Elastic-net logistic regression fit by the seeded incremental solver.

    Targets are +1/-1 (+1 is the SUBJ class).  ``class_weight="balanced"``
    reweights samples by n_total / (2 * n_class); ``standardize=True``
    z-scores features with training statistics (off by default, reduced
    embeddings are already centered).
    """

    def __init__(
        self,
        c: float = 0.5,
        l1_ratio: float = 0.5,
        class_weight: str | None = "balanced",
        max_epochs: int = 1000,
        tol: float = 1e-6,
        seed: int = 0,
        threshold: float = 0.5,
        standardize: bool = False,
    ):
        self.c = c
        self.l1_ratio = l1_ratio
        self.class_weight = class_weight
        self.max_epochs = max_epochs
        self.tol = tol
        self.seed = seed
        self.threshold = threshold
        self.standardize = standardize

    def _config(self) -> TrainConfig:
        mode = ClassWeightMode.BALANCED if self.class_weight == "balanced" else ClassWeightMode.NONE
        return TrainConfig(
            c=self.c,
            l1_ratio=self.l1_ratio,
            class_weight_mode=mode,
            max_epochs=self.max_epochs,
            tolerance=self.tol,
            seed=self.seed,
            threshold=self.threshold,
            standardize=self.standardize,
        )

    def fit(self, X, y):
        cfg = self._config()
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        if n < 2:
            raise DomainError("need at least 2 samples")
        if not (np.any(y > 0) and np.any(y < 0)):
            raise DomainError("both classes must be present")
        if cfg.class_weight_mode is ClassWeightMode.BALANCED:
            per_class = balanced_weights([1 if v > 0 else -1 for v in y])
            s = np.array([per_class[1 if v > 0 else -1] for v in y])
        else:
            s = np.ones(n)
        if self.standardize:
            self.feature_mean_ = X.mean(axis=0)
            scale = X.std(axis=0)
            scale[scale == 0.0] = 1.0
            self.feature_scale_ = scale
            X = (X - self.feature_mean_) / self.feature_scale_
            X = np.ascontiguousarray(X)
        else:
            self.feature_mean_ = None
            self.feature_scale_ = None

        lam1, lam2 = _penalties(cfg, n)
        lip = np.max(s * np.sum(X * X, axis=1)) / 4.0 + lam2
        gamma = 1.0 / (3.0 * (lip + lam2))

        w = np.zeros(d)
        b = 0.0
        # gradient table: per-sample scalar d(loss_i)/d(margin) at theta = 0
        phi = -s * y * 0.5
        avg_w = X.T @ phi / n
        avg_b = float(np.mean(phi))
        rng = np.random.default_rng(cfg.seed)
        self.converged_ = False
        epoch = 0
        for epoch in range(1, cfg.max_epochs + 1):
            w_prev = w.copy()
            b_prev = b
            idx = rng.integers(0, n, size=n)
            b, avg_b = _saga_epoch(X, y, s, w, b, phi, avg_w, avg_b, idx, gamma, lam1, lam2)
            change = max(float(np.max(np.abs(w - w_prev))), abs(b - b_prev))
            if change < cfg.tolerance:
                self.converged_ = True
                break
        self.coef_ = w
        self.intercept_ = float(b)
        self.n_epochs_ = epoch
        self.sample_weight_ = s
        return self

    def _check_fitted(self):
        if not hasattr(self, "coef_"):
            raise DomainError("model is not fitted")

    def decision_function(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.coef_.shape[0]:
            raise DomainError(f"expected shape (*, {self.coef_.shape[0]}), got {X.shape}")
        if self.feature_mean_ is not None:
            X = (X - self.feature_mean_) / self.feature_scale_
        return X @ self.coef_ + self.intercept_

    def predict_proba(self, X):
        """Probability of the positive (SUBJ) class per row."""
        margins = self.decision_function(X)
        return 1.0 / (1.0 + np.exp(-margins))

    def predict(self, X):
        """+1 where P(SUBJ) >= threshold, else -1 (ties go positive)."""
        proba = self.predict_proba(X)
        return np.where(proba >= self.threshold, 1, -1)

    def predict_labels(self, X) -> list[Label]:
        return [SIGN_TO_LABEL[int(v)] for v in self.predict(X)]


def fit_saga(X, labels, cfg: TrainConfig) -> ElasticNetLogistic:
    """Fit from a TrainConfig and a list of Label (or +1/-1) targets."""
    y = np.array([LABEL_TO_SIGN[l] if isinstance(l, Label) else int(l) for l in labels])
    model = ElasticNetLogistic(
        c=cfg.c,
        l1_ratio=cfg.l1_ratio,
        class_weight="balanced" if cfg.class_weight_mode is ClassWeightMode.BALANCED else None,
        max_epochs=cfg.max_epochs,
        tol=cfg.tolerance,
        seed=cfg.seed,
        threshold=cfg.threshold,
        standardize=cfg.standardize,
    )
    return model.fit(X, y)


def save_model(model: ElasticNetLogistic) -> bytes:
    model._check_fitted()
    d = model.coef_.shape[0]
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out += struct.pack("<I", d)
    out += np.ascontiguousarray(model.coef_, dtype="<f8").tobytes()
    out += struct.pack("<dd", model.intercept_, model.threshold)
    out.append(1)  # positive class code: SUBJ
    return bytes(out)


def load_model(raw: bytes) -> ElasticNetLogistic:
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if raw[4] != VERSION:
        raise FormatError(f"unsupported version {raw[4]}")
    (d,) = struct.unpack_from("<I", raw, 5)
    need = 9 + 8 * d + 16 + 1
    if len(raw) < need:
        raise TruncationError(f"container needs {need} bytes, got {len(raw)}")
    coef = np.frombuffer(raw, dtype="<f8", count=d, offset=9).copy()
    bias, threshold = struct.unpack_from("<dd", raw, 9 + 8 * d)
    model = ElasticNetLogistic(threshold=threshold)
    model.coef_ = coef
    model.intercept_ = float(bias)
    model.feature_mean_ = None
    model.feature_scale_ = None
    model.converged_ = True
    return model
