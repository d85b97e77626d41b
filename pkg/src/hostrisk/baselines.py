"""Comparison classifiers sharing the DBN's scoring interface.

MNN: one hidden layer (F, 50, 2).  DNN: same topology as the DBN but randomly
initialized with no pre-training.  LR: a single sigmoid unit trained by
cross-entropy gradient descent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dbn import Normalization
from .nnet import FinetuneConfig, SoftmaxHead, sgd_train, softmax_probs
from .rbm import sigmoid

__all__ = ["BaselineKind", "BaselineModel", "train_baseline", "score_baseline"]

MNN_HIDDEN = 50
DNN_HIDDEN = (20, 10)


class BaselineKind(str, Enum):
    MNN = "mnn"
    DNN = "dnn"
    LR = "lr"


@dataclass(frozen=True)
class BaselineModel:
    """Either an MLP (weights/biases + softmax head) or LR (coef + intercept)."""

    kind: BaselineKind
    weights: tuple[np.ndarray, ...]    # hidden layers; empty for LR
    biases: tuple[np.ndarray, ...]
    head: SoftmaxHead | None           # None for LR
    coef: np.ndarray | None            # LR only
    intercept: float | None            # LR only
    normalization: Normalization
    schema_id: str = ""

    @property
    def n_features(self) -> int:
        if self.kind is BaselineKind.LR:
            return self.coef.size
        return self.weights[0].shape[1]

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_features:
            raise ValueError(
                f"feature vector length {x.shape[-1]}, expected {self.n_features}"
            )
        return x


def _hidden_sizes(kind: BaselineKind, dbn_hidden: tuple[int, ...]) -> tuple[int, ...]:
    if kind is BaselineKind.MNN:
        return (MNN_HIDDEN,)
    return dbn_hidden


def train_baseline(
    kind: BaselineKind,
    X: np.ndarray,
    y: np.ndarray,
    cfg: FinetuneConfig,
    normalization: Normalization | None = None,
    schema_id: str = "",
    dbn_hidden: tuple[int, ...] = DNN_HIDDEN,
) -> BaselineModel:
    """Train a baseline on an already-normalized feature matrix."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate label set: need at least two classes")
    n_features = X.shape[1]
    if normalization is None:
        normalization = Normalization.identity(n_features)
    rng = np.random.default_rng(cfg.seed)

    if kind is BaselineKind.LR:
        coef = np.zeros(n_features)
        intercept = 0.0
        n = X.shape[0]
        for _ in range(cfg.epochs):
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                resid = sigmoid(X[idx] @ coef + intercept) - y[idx]
                coef -= cfg.learning_rate * (resid @ X[idx]) / idx.size
                intercept -= cfg.learning_rate * float(resid.mean())
        return BaselineModel(kind, (), (), None, coef, intercept,
                             normalization, schema_id)

    # Xavier initialization, standard for randomly initialized sigmoid nets
    sizes = (n_features, *_hidden_sizes(kind, dbn_hidden), 2)
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / (sizes[t] + sizes[t + 1])),
                   size=(sizes[t + 1], sizes[t]))
        for t in range(len(sizes) - 2)
    ]
    biases = [np.zeros(sizes[t + 1]) for t in range(len(sizes) - 2)]
    head = SoftmaxHead(
        rng.normal(0.0, np.sqrt(2.0 / (sizes[-2] + 2)), size=(2, sizes[-2])),
        np.zeros(2),
    )
    if cfg.epochs > 0:
        weights, biases, head = sgd_train(weights, biases, head, X, y, cfg)
    return BaselineModel(kind, tuple(weights), tuple(biases), head,
                         None, None, normalization, schema_id)


def score_baseline(model: BaselineModel, x: np.ndarray) -> float:
    """Risky-class probability for one raw feature vector."""
    return float(score_baseline_many(model, np.atleast_2d(
        model._check_input(x)))[0])


def score_baseline_many(model: BaselineModel, X: np.ndarray) -> np.ndarray:
    """Vectorized risky-class probabilities over raw rows."""
    X = np.atleast_2d(model._check_input(np.asarray(X, dtype=float)))
    Xn = model.normalization.apply(X)
    if model.kind is BaselineKind.LR:
        return sigmoid(Xn @ model.coef + model.intercept)
    act = Xn
    for w, b in zip(model.weights, model.biases):
        act = sigmoid(act @ w.T + b)
    return softmax_probs(model.head, act)[:, 1]
