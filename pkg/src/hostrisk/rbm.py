"""Restricted Boltzmann Machine primitives.

Energy, conditional distributions, Gibbs sampling, CD-k updates, and exact
inference by enumeration for small models (the test oracle path).

Conventions: weights have shape (n_hidden, n_visible), so w[i, j] couples
hidden unit i with visible unit j.  Visible units take real values in [0, 1]
(normalized features treated as Bernoulli means); hidden units are binary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RbmParams",
    "CdConfig",
    "ExactDistribution",
    "energy",
    "hidden_given_visible",
    "visible_given_hidden",
    "gibbs_step",
    "gibbs_visible_samples",
    "exact_distribution",
    "exact_loglik_gradient",
    "cd_k_update",
    "reconstruction_error",
    "init_rbm",
]

ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class RbmParams:
    """RBM parameters: weight matrix plus visible/hidden bias vectors."""

    weights: np.ndarray       # (n_hidden, n_visible)
    visible_bias: np.ndarray  # (n_visible,)
    hidden_bias: np.ndarray   # (n_hidden,)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        a = np.asarray(self.visible_bias, dtype=float)
        b = np.asarray(self.hidden_bias, dtype=float)
        if w.ndim != 2 or a.ndim != 1 or b.ndim != 1:
            raise ValueError("weights must be 2-D, biases 1-D")
        if w.shape != (b.size, a.size):
            raise ValueError(
                f"weights shape {w.shape} does not match biases "
                f"(expected {(b.size, a.size)})"
            )
        if not (np.isfinite(w).all() and np.isfinite(a).all() and np.isfinite(b).all()):
            raise ValueError("RBM parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "visible_bias", a)
        object.__setattr__(self, "hidden_bias", b)

    @property
    def n_visible(self) -> int:
        return self.visible_bias.size

    @property
    def n_hidden(self) -> int:
        return self.hidden_bias.size


@dataclass(frozen=True)
class CdConfig:
    """Contrastive-divergence settings: chain length k, learning rate, seed."""

    k: int = 1
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")


def init_rbm(n_visible: int, n_hidden: int, rng: np.random.Generator) -> RbmParams:
    """Standard initialization: N(0, 0.01) weights, zero biases."""
    w = rng.normal(0.0, 0.01, size=(n_hidden, n_visible))
    return RbmParams(w, np.zeros(n_visible), np.zeros(n_hidden))


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def _check_visible(p: RbmParams, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != p.n_visible:
        raise ValueError(
            f"visible vector length {v.shape[-1]}, expected {p.n_visible}"
        )
    return v


def _check_hidden(p: RbmParams, h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=float)
    if h.shape[-1] != p.n_hidden:
        raise ValueError(
            f"hidden vector length {h.shape[-1]}, expected {p.n_hidden}"
        )
    return h


def energy(v: np.ndarray, h: np.ndarray, p: RbmParams) -> float:
    """Energy of a joint configuration:

    E(v, h) = -sum_ij w_ij h_i v_j - sum_j a_j v_j - sum_i b_i h_i
    """
    v = _check_visible(p, v)
    h = _check_hidden(p, h)
    return float(-(h @ p.weights @ v) - p.visible_bias @ v - p.hidden_bias @ h)


def hidden_given_visible(p: RbmParams, v: np.ndarray) -> np.ndarray:
    """p(h_i = 1 | v) = sigmoid(b_i + sum_j v_j w_ij).  Accepts a batch."""
    v = _check_visible(p, v)
    return sigmoid(v @ p.weights.T + p.hidden_bias)


def visible_given_hidden(p: RbmParams, h: np.ndarray) -> np.ndarray:
    """p(v_j = 1 | h) = sigmoid(a_j + sum_i h_i w_ij).  Accepts a batch."""
    h = _check_hidden(p, h)
    return sigmoid(h @ p.weights + p.visible_bias)


def gibbs_step(
    p: RbmParams, v: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """One alternation of the chain used by CD.

    Samples h ~ Bernoulli(p(h|v)) and returns it with the mean-field visible
    reconstruction p(v|h_sample) (probabilities, not samples).
    """
    ph = hidden_given_visible(p, v)
    h_sample = (rng.random(ph.shape) < ph).astype(float)
    v_next = visible_given_hidden(p, h_sample)
    return h_sample, v_next


def gibbs_visible_samples(
    p: RbmParams,
    n_samples: int,
    rng: np.random.Generator,
    burn_in: int = 100,
) -> np.ndarray:
    """Proper binary Gibbs chain; returns (n_samples, n_visible) 0/1 samples.

    Both layers are sampled, so the stationary distribution is the model joint;
    this is the path checked against exact enumeration.
    """
    v = (rng.random(p.n_visible) < 0.5).astype(float)
    out = np.empty((n_samples, p.n_visible))
    for t in range(burn_in + n_samples):
        ph = hidden_given_visible(p, v)
        h = (rng.random(ph.shape) < ph).astype(float)
        pv = visible_given_hidden(p, h)
        v = (rng.random(pv.shape) < pv).astype(float)
        if t >= burn_in:
            out[t - burn_in] = v
    return out


def _enumerate_states(n: int) -> np.ndarray:
    """All binary vectors of length n; row index i has bit j = (i >> j) & 1."""
    idx = np.arange(2**n)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(float)


@dataclass(frozen=True)
class ExactDistribution:
    """Joint p(v, h) tabulated over every binary configuration.

    joint[iv, ih] is the probability of visible state iv and hidden state ih,
    with states indexed as in _enumerate_states (bit j of the index is unit j).
    """

    visible_states: np.ndarray  # (2^m, m)
    hidden_states: np.ndarray   # (2^n, n)
    joint: np.ndarray           # (2^m, 2^n)
    log_z: float

    def visible_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    def expectation_vh(self) -> np.ndarray:
        """Model expectation E[v_j h_i], shaped like the weight matrix."""
        return np.einsum("ab,bi,aj->ij", self.joint, self.hidden_states,
                         self.visible_states)

    def expectation_visible(self) -> np.ndarray:
        return self.visible_marginal() @ self.visible_states

    def expectation_hidden(self) -> np.ndarray:
        return self.joint.sum(axis=0) @ self.hidden_states


def exact_distribution(p: RbmParams) -> ExactDistribution:
    """Enumerate all 2^(m+n) configurations; only valid for tiny models."""
    m, n = p.n_visible, p.n_hidden
    if m + n > ENUMERATION_LIMIT:
        raise ValueError(
            f"model with {m}+{n} units is too large for exact inference "
            f"(limit {ENUMERATION_LIMIT} total)"
        )
    vs = _enumerate_states(m)
    hs = _enumerate_states(n)
    # negative energy for every (v, h) pair
    neg_e = hs @ p.weights @ vs.T + (hs @ p.hidden_bias)[:, None] \
        + (vs @ p.visible_bias)[None, :]
    neg_e = neg_e.T  # (2^m, 2^n)
    shift = neg_e.max()
    z_shifted = np.exp(neg_e - shift).sum()
    log_z = float(shift + np.log(z_shifted))
    joint = np.exp(neg_e - log_z)
    return ExactDistribution(vs, hs, joint, log_z)


def free_energy(p: RbmParams, v: np.ndarray) -> np.ndarray:
    """F(v) = -a.v - sum_i log(1 + exp(b_i + W_i.v)); p(v) = exp(-F(v))/Z."""
    v = np.atleast_2d(_check_visible(p, v))
    act = v @ p.weights.T + p.hidden_bias
    return -(v @ p.visible_bias) - np.logaddexp(0.0, act).sum(axis=1)


def exact_log_likelihood(p: RbmParams, data: np.ndarray) -> float:
    """Mean log p(v) over data rows, with Z from exact enumeration."""
    dist = exact_distribution(p)
    return float(np.mean(-free_energy(p, data)) - dist.log_z)


def exact_loglik_gradient(p: RbmParams, data: np.ndarray) -> np.ndarray:
    """Exact gradient of mean log p(v) with respect to the weights.

    Data phase E_data[v_j p(h_i=1|v)] minus model phase E_model[v_j h_i]
    computed from the enumerated distribution.
    """
    data = np.atleast_2d(_check_visible(p, data))
    ph = hidden_given_visible(p, data)          # (B, n)
    data_phase = ph.T @ data / data.shape[0]    # (n, m)
    model_phase = exact_distribution(p).expectation_vh()
    return data_phase - model_phase


def cd_k_update(
    p: RbmParams,
    batch: np.ndarray,
    cfg: CdConfig,
    rng: np.random.Generator,
    exact_model_phase: bool = False,
) -> RbmParams:
    """One CD-k parameter update averaged over a batch; returns new params.

    Positive phase uses sampled binary hidden states; the model-phase hidden
    factor uses p(h=1|v^k) for lower variance.  With exact_model_phase the
    sampling chain is replaced by enumeration and the positive phase is
    Rao-Blackwellized, making the step direction equal to the exact gradient.
    """
    batch = np.atleast_2d(_check_visible(p, batch))
    if batch.shape[0] == 0:
        raise ValueError("empty batch")
    eps = cfg.learning_rate
    b_size = batch.shape[0]

    if exact_model_phase:
        ph0 = hidden_given_visible(p, batch)
        pos_w = ph0.T @ batch / b_size
        pos_a = batch.mean(axis=0)
        pos_b = ph0.mean(axis=0)
        dist = exact_distribution(p)
        neg_w = dist.expectation_vh()
        neg_a = dist.expectation_visible()
        neg_b = dist.expectation_hidden()
    else:
        ph0 = hidden_given_visible(p, batch)
        h0 = (rng.random(ph0.shape) < ph0).astype(float)
        pos_w = h0.T @ batch / b_size
        pos_a = batch.mean(axis=0)
        pos_b = h0.mean(axis=0)
        vk = visible_given_hidden(p, h0)
        for _ in range(cfg.k - 1):
            phk = hidden_given_visible(p, vk)
            hk = (rng.random(phk.shape) < phk).astype(float)
            vk = visible_given_hidden(p, hk)
        phk = hidden_given_visible(p, vk)
        neg_w = phk.T @ vk / b_size
        neg_a = vk.mean(axis=0)
        neg_b = phk.mean(axis=0)

    return RbmParams(
        p.weights + eps * (pos_w - neg_w),
        p.visible_bias + eps * (pos_a - neg_a),
        p.hidden_bias + eps * (pos_b - neg_b),
    )


def reconstruction_error(
    p: RbmParams, data: np.ndarray, seed: int = 0
) -> float:
    """Mean squared one-step reconstruction error, deterministic given seed.

    Hidden states are sampled binary, visible reconstruction is mean-field.
    """
    data = np.atleast_2d(_check_visible(p, data))
    if data.shape[0] == 0:
        raise ValueError("empty data")
    rng = np.random.default_rng(seed)
    ph = hidden_given_visible(p, data)
    h = (rng.random(ph.shape) < ph).astype(float)
    recon = visible_given_hidden(p, h)
    return float(np.mean((recon - data) ** 2))
