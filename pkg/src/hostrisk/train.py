"""End-to-end training helpers shared by the CLI and the benchmark tests:
seeded train/test splitting, model construction per kind, and uniform
scoring across DBN and baseline models.
"""

from __future__ import annotations

import sys

import numpy as np

from .baselines import BaselineKind, BaselineModel, score_baseline_many, train_baseline
from .dbn import (
    DbnArchitecture,
    DbnModel,
    Normalization,
    finetune,
    pretrain,
    score_many,
)
from .nnet import FinetuneConfig
from .rbm import CdConfig

__all__ = ["split_labeled", "train_model", "score_model",
           "DEFAULT_DBN_HIDDEN", "PRETRAIN_EPOCHS"]

DEFAULT_DBN_HIDDEN = (20, 10)
PRETRAIN_EPOCHS = 30
MAX_SPLIT_RETRIES = 100


def split_labeled(
    y: np.ndarray,
    train_fraction: float,
    seed: int,
    log=sys.stderr,
) -> tuple[np.ndarray, np.ndarray]:
    """Plain random split of label indices into (train_idx, test_idx).

    With heavy class imbalance a draw can leave one side single-class; such
    splits are re-drawn from a derived seed and the event is logged.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    y = np.asarray(y)
    n = y.size
    n_train = int(round(n * train_fraction))
    if n_train < 1 or n_train >= n:
        raise ValueError("split leaves an empty side")
    seq = np.random.SeedSequence(seed)
    for attempt in range(MAX_SPLIT_RETRIES):
        rng = np.random.default_rng(seq)
        order = rng.permutation(n)
        tr, te = order[:n_train], order[n_train:]
        if len(np.unique(y[tr])) == 2 and len(np.unique(y[te])) == 2:
            return tr, te
        if log is not None:
            print(f"split attempt {attempt} left a single-class side; "
                  "re-drawing with derived seed", file=log)
        seq = seq.spawn(1)[0]
    raise ValueError("could not draw a two-class split; labels too sparse")


def train_model(
    kind: str,
    X: np.ndarray,
    y: np.ndarray,
    seed: int,
    schema_id: str = "",
    dbn_hidden: tuple[int, ...] = DEFAULT_DBN_HIDDEN,
    cd: CdConfig | None = None,
    ft: FinetuneConfig | None = None,
    pretrain_epochs: int = PRETRAIN_EPOCHS,
) -> DbnModel | BaselineModel:
    """Fit normalization on X, then train the requested model kind."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int)
    norm = Normalization.fit(X)
    Xn = norm.apply(X)
    cd = cd or CdConfig(seed=seed)
    ft = ft or FinetuneConfig(seed=seed)
    if kind == "dbn":
        arch = DbnArchitecture((X.shape[1], *dbn_hidden, 2))
        stack = pretrain(arch, Xn, cd, epochs=pretrain_epochs,
                         batch_size=ft.batch_size)
        return finetune(stack, Xn, y, ft, normalization=norm,
                        schema_id=schema_id)
    return train_baseline(BaselineKind(kind), Xn, y, ft,
                          normalization=norm, schema_id=schema_id,
                          dbn_hidden=dbn_hidden)


def score_model(model, X: np.ndarray) -> np.ndarray:
    """Risk scores over raw feature rows, uniform across model kinds."""
    if isinstance(model, DbnModel):
        return score_many(model, X)
    return score_baseline_many(model, X)
