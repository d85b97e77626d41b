"""Deep Belief Network: greedy layer-wise pre-training of stacked RBMs,
softmax head, supervised fine-tuning by backpropagation, and risk scoring.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nnet import FinetuneConfig, SoftmaxHead, sgd_train, softmax_probs
from .rbm import CdConfig, RbmParams, cd_k_update, hidden_given_visible, init_rbm

__all__ = [
    "DbnArchitecture",
    "Normalization",
    "DbnModel",
    "pretrain",
    "propagate",
    "finetune",
    "predict",
    "score",
    "score_many",
]


@dataclass(frozen=True)
class DbnArchitecture:
    """Layer sizes from input features down to the class count."""

    layer_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 3:
            raise ValueError("architecture needs at least input, hidden, output")
        if any(s < 1 for s in sizes):
            raise ValueError("layer sizes must be positive")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_features(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_classes(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class Normalization:
    """Per-feature min/max captured at training time; apply maps into [0, 1]."""

    minimums: np.ndarray
    maximums: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Normalization":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return cls(X.min(axis=0), X.max(axis=0))

    @classmethod
    def identity(cls, n_features: int) -> "Normalization":
        return cls(np.zeros(n_features), np.ones(n_features))

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.maximums - self.minimums
        safe = np.where(span > 0, span, 1.0)
        out = (X - self.minimums) / safe
        return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class DbnModel:
    """Trained stack + head with the metadata needed to score raw vectors."""

    rbm_layers: tuple[RbmParams, ...]
    head: SoftmaxHead
    architecture: DbnArchitecture
    normalization: Normalization
    schema_id: str = ""

    def __post_init__(self):
        sizes = self.architecture.layer_sizes
        for t, layer in enumerate(self.rbm_layers):
            if layer.n_visible != sizes[t] or layer.n_hidden != sizes[t + 1]:
                raise ValueError(
                    f"layer {t} is {layer.n_hidden}x{layer.n_visible}, "
                    f"architecture expects {sizes[t + 1]}x{sizes[t]}"
                )
        if self.head.coefficients.shape != (sizes[-1], sizes[-2]):
            raise ValueError("softmax head shape does not match architecture")

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.architecture.n_features:
            raise ValueError(
                f"feature vector length {x.shape[-1]}, "
                f"expected {self.architecture.n_features}"
            )
        return x


def pretrain(
    arch: DbnArchitecture,
    X: np.ndarray,
    cfg: CdConfig,
    epochs: int = 30,
    batch_size: int = 50,
) -> list[RbmParams]:
    """Greedy layer-wise CD training of the RBM stack (head layer excluded).

    Each trained layer's hidden activation probabilities become the next
    layer's input.  Deterministic given cfg.seed.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty training matrix")
    if X.shape[1] != arch.n_features:
        raise ValueError(
            f"feature matrix has {X.shape[1]} columns, "
            f"architecture expects {arch.n_features}"
        )
    rng = np.random.default_rng(cfg.seed)
    sizes = arch.layer_sizes
    stack: list[RbmParams] = []
    layer_input = X
    for t in range(len(sizes) - 2):
        params = init_rbm(sizes[t], sizes[t + 1], rng)
        n = layer_input.shape[0]
        for _ in range(epochs):
            order = rng.permutation(n)
            for start in range(0, n, batch_size):
                batch = layer_input[order[start:start + batch_size]]
                params = cd_k_update(params, batch, cfg, rng)
        stack.append(params)
        layer_input = hidden_given_visible(params, layer_input)
    return stack


def propagate(stack: list[RbmParams] | tuple[RbmParams, ...], x: np.ndarray) -> np.ndarray:
    """Deterministic upward pass: sigmoid activation probabilities per layer."""
    out = np.asarray(x, dtype=float)
    for layer in stack:
        out = hidden_given_visible(layer, out)
    return out


def finetune(
    stack: list[RbmParams] | tuple[RbmParams, ...],
    X: np.ndarray,
    y: np.ndarray,
    cfg: FinetuneConfig,
    normalization: Normalization | None = None,
    schema_id: str = "",
) -> DbnModel:
    """Supervised fine-tuning: zero-initialized softmax head, backprop through
    every stack layer.  X must already be normalized to [0, 1].
    """
    stack = list(stack)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    if X.shape[1] != stack[0].n_visible:
        raise ValueError("feature matrix does not match stack input size")
    n_classes = 2 if y.size == 0 else max(2, int(y.max()) + 1)
    top = stack[-1].n_hidden
    head = SoftmaxHead(np.zeros((n_classes, top)), np.zeros(n_classes))
    weights = [layer.weights for layer in stack]
    biases = [layer.hidden_bias for layer in stack]
    if cfg.epochs > 0:
        if len(np.unique(y)) < 2:
            raise ValueError("degenerate label set: need at least two classes")
        weights, biases, head = sgd_train(weights, biases, head, X, y, cfg)
    layers = tuple(
        RbmParams(w, old.visible_bias, b)
        for w, b, old in zip(weights, biases, stack)
    )
    arch = DbnArchitecture(
        (stack[0].n_visible, *(l.n_hidden for l in stack), n_classes)
    )
    if normalization is None:
        normalization = Normalization.identity(arch.n_features)
    return DbnModel(layers, head, arch, normalization, schema_id)


def predict(model: DbnModel, x: np.ndarray) -> int:
    """Class with the largest probability; ties go to the lowest class index."""
    probs = class_probabilities(model, x)
    return int(np.argmax(probs))


def class_probabilities(model: DbnModel, x: np.ndarray) -> np.ndarray:
    x = model._check_input(x)
    top = propagate(model.rbm_layers, model.normalization.apply(x))
    return softmax_probs(model.head, top)


def score(model: DbnModel, x: np.ndarray) -> float:
    """Probability of the risky class (class 1) for one raw feature vector."""
    return float(class_probabilities(model, x)[..., 1])


def score_many(model: DbnModel, X: np.ndarray) -> np.ndarray:
    """Vectorized score over the rows of a raw feature matrix."""
    X = np.atleast_2d(model._check_input(np.asarray(X, dtype=float)))
    return class_probabilities(model, X)[:, 1]
