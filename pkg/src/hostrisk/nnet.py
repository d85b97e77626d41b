"""Feed-forward machinery shared by DBN fine-tuning and the neural baselines.

A network here is a stack of sigmoid layers (weights shaped (out, in), one
bias per hidden unit) topped by a softmax head.  Training is plain mini-batch
gradient descent on mean cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rbm import sigmoid


@dataclass(frozen=True)
class SoftmaxHead:
    """Softmax regression head: coefficients (L, top_size), intercepts (L,)."""

    coefficients: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        d = np.asarray(self.intercepts, dtype=float)
        if c.ndim != 2 or d.ndim != 1 or c.shape[0] != d.size:
            raise ValueError("head shapes inconsistent")
        if not (np.isfinite(c).all() and np.isfinite(d).all()):
            raise ValueError("head parameters must be finite")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "intercepts", d)

    @property
    def n_classes(self) -> int:
        return self.intercepts.size


@dataclass(frozen=True)
class FinetuneConfig:
    """Supervised training settings; a short final batch is allowed."""

    epochs: int = 100
    batch_size: int = 50
    learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def softmax_probs(head: SoftmaxHead, x_top: np.ndarray) -> np.ndarray:
    """Class probabilities exp(c_l.x + d_l) / sum_k exp(c_k.x + d_k).

    Computed with max-logit subtraction; accepts a single vector or a batch.
    """
    x_top = np.asarray(x_top, dtype=float)
    if x_top.shape[-1] != head.coefficients.shape[1]:
        raise ValueError(
            f"representation length {x_top.shape[-1]}, "
            f"expected {head.coefficients.shape[1]}"
        )
    logits = x_top @ head.coefficients.T + head.intercepts
    logits = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=-1, keepdims=True)


def forward(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    head: SoftmaxHead,
    X: np.ndarray,
) -> tuple[list[np.ndarray], np.ndarray]:
    """Returns the activation list (input first) and softmax probabilities."""
    acts = [np.atleast_2d(np.asarray(X, dtype=float))]
    for w, b in zip(weights, biases):
        acts.append(sigmoid(acts[-1] @ w.T + b))
    return acts, softmax_probs(head, acts[-1])


def cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    """Mean negative log-probability of the true class."""
    picked = probs[np.arange(len(y)), y]
    return float(-np.mean(np.log(np.clip(picked, 1e-300, None))))


def loss_and_grads(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    head: SoftmaxHead,
    X: np.ndarray,
    y: np.ndarray,
):
    """Mean cross-entropy plus gradients for every parameter.

    Returns (loss, dweights, dbiases, dcoef, dintercept); the backward pass
    chains softmax-CE deltas through the sigmoid derivatives a*(1-a).
    """
    y = np.asarray(y, dtype=int)
    acts, probs = forward(weights, biases, head, X)
    n = len(y)
    loss = cross_entropy(probs, y)

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    dcoef = dlogits.T @ acts[-1]
    dintercept = dlogits.sum(axis=0)

    dact = dlogits @ head.coefficients
    dweights: list[np.ndarray] = [np.empty(0)] * len(weights)
    dbiases: list[np.ndarray] = [np.empty(0)] * len(weights)
    for t in range(len(weights) - 1, -1, -1):
        a = acts[t + 1]
        dz = dact * a * (1.0 - a)
        dweights[t] = dz.T @ acts[t]
        dbiases[t] = dz.sum(axis=0)
        dact = dz @ weights[t]
    return loss, dweights, dbiases, dcoef, dintercept


def sgd_train(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    head: SoftmaxHead,
    X: np.ndarray,
    y: np.ndarray,
    cfg: FinetuneConfig,
) -> tuple[list[np.ndarray], list[np.ndarray], SoftmaxHead]:
    """Mini-batch gradient descent; inputs are not mutated."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("degenerate label set: need at least two classes")
    weights = [w.copy() for w in weights]
    biases = [b.copy() for b in biases]
    coef = head.coefficients.copy()
    intercept = head.intercepts.copy()
    rng = np.random.default_rng(cfg.seed)
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            _, dw, db, dc, dd = loss_and_grads(
                weights, biases, SoftmaxHead(coef, intercept), X[idx], y[idx]
            )
            for t in range(len(weights)):
                weights[t] -= cfg.learning_rate * dw[t]
                biases[t] -= cfg.learning_rate * db[t]
            coef -= cfg.learning_rate * dc
            intercept -= cfg.learning_rate * dd
    return weights, biases, SoftmaxHead(coef, intercept)
