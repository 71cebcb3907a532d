"""Gaussian mixture density network: forward pass, exact NLL and backpropagation.

Shapes follow the row-major batch convention: inputs ``(B, D)``, weight
matrices ``(fan_in, fan_out)``, targets ``(B, M)``.  Hidden layers use
LeakyReLU; the heads are

* weights: softmax,
* means: ``tanh`` or identity,
* standard deviations: ``softplus(z) * tanh(z)**2 + eps0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from ..errors import InvalidInputError, NumericError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
MU_ACTIVATIONS = ("tanh", "identity")


@dataclass(frozen=True)
class MdnConfig:
    input_dim: int
    hidden_sizes: tuple[int, ...] = (320, 256, 256, 192, 128, 80)
    n_components: int = 10
    mu_activation: str = "tanh"
    epsilon0: float = 1e-4
    leaky_slope: float = 0.01
    train_biases: bool = False

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_dim < 1 or self.n_components < 1:
            raise InvalidInputError("input_dim and n_components must be at least 1")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise InvalidInputError("hidden_sizes must be a nonempty list of positive ints")
        if self.epsilon0 <= 0:
            raise InvalidInputError("epsilon0 must be positive")
        if self.mu_activation not in MU_ACTIVATIONS:
            raise InvalidInputError(f"mu_activation must be one of {MU_ACTIVATIONS}")

    @property
    def layer_shapes(self) -> list[tuple[int, int]]:
        sizes = (self.input_dim,) + self.hidden_sizes
        hidden = [(sizes[i], sizes[i + 1]) for i in range(len(self.hidden_sizes))]
        head = (self.hidden_sizes[-1], self.n_components)
        return hidden + [head, head, head]


@dataclass(eq=False)
class MdnParams:
    """Hidden weights ``W_0..W_H`` followed by the pi, mu and delta heads.

    ``biases`` is ``None`` when they are frozen at zero.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray] | None = None

    def arrays(self) -> list[np.ndarray]:
        return self.weights + (self.biases or [])

    def copy(self) -> "MdnParams":
        return MdnParams(
            [w.copy() for w in self.weights],
            None if self.biases is None else [b.copy() for b in self.biases],
        )

    def __eq__(self, other):
        if not isinstance(other, MdnParams):
            return NotImplemented
        a, b = self.arrays(), other.arrays()
        return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


@dataclass(eq=False)
class MixtureParams:
    pi: np.ndarray
    mu: np.ndarray
    delta: np.ndarray
    log_pi: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.pi = np.asarray(self.pi, dtype=np.float64)
        self.mu = np.asarray(self.mu, dtype=np.float64)
        self.delta = np.asarray(self.delta, dtype=np.float64)
        if not (self.pi.shape == self.mu.shape == self.delta.shape):
            raise InvalidInputError("pi, mu and delta must share a shape")
        if np.any(self.delta <= 0):
            raise InvalidInputError("component standard deviations must be positive")
        if self.log_pi is None:
            self.log_pi = np.log(self.pi)

    @property
    def n_components(self) -> int:
        return self.pi.shape[-1]

    def pdf(self, y) -> np.ndarray:
        return np.exp(mixture_logpdf(self, y))

    def mean(self) -> float:
        return float(self.pi @ self.mu)

    def variance(self) -> float:
        m = self.mean()
        return float(self.pi @ (self.delta**2 + (self.mu - m) ** 2))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.n_components, size=n, p=self.pi / self.pi.sum())
        return self.mu[comp] + self.delta[comp] * rng.standard_normal(n)


def init_params(config: MdnConfig, rng: np.random.Generator) -> MdnParams:
    """LeakyReLU-scaled uniform init; pi and mu heads are shrunk by 0.01.

    The delta head keeps the full scale: ``softplus(z) tanh(z)^2`` is flat at
    ``z = 0``, so a tiny head would start every component at ``eps0``.
    """
    gain = 2.0 / (1.0 + config.leaky_slope**2)
    shapes = config.layer_shapes
    n_hidden = len(config.hidden_sizes)
    head_gain = [0.01, 0.01, 1.0]
    weights = []
    for i, (fan_in, fan_out) in enumerate(shapes):
        bound = math.sqrt(3.0 * gain / fan_in)
        if i >= n_hidden:
            bound *= head_gain[i - n_hidden]
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
    biases = [np.zeros(s[1]) for s in shapes] if config.train_biases else None
    return MdnParams(weights, biases)


def zero_params(config: MdnConfig) -> MdnParams:
    shapes = config.layer_shapes
    biases = [np.zeros(s[1]) for s in shapes] if config.train_biases else None
    return MdnParams([np.zeros(s) for s in shapes], biases)


def _softplus(z):
    return np.logaddexp(0.0, z)


def _heads(config: MdnConfig, zp, zm, zd):
    log_pi = zp - logsumexp(zp, axis=-1, keepdims=True)
    mu = np.tanh(zm) if config.mu_activation == "tanh" else zm
    t = np.tanh(zd)
    delta = _softplus(zd) * t * t + config.epsilon0
    return log_pi, mu, delta


def _run(params: MdnParams, config: MdnConfig, X: np.ndarray):
    """Forward pass keeping the activations needed for backpropagation."""
    n_hidden = len(config.hidden_sizes)
    biases = params.biases
    acts = [X]
    pre = []
    h = X
    for i in range(n_hidden):
        a = h @ params.weights[i]
        if biases is not None:
            a = a + biases[i]
        pre.append(a)
        h = np.where(a > 0, a, config.leaky_slope * a)
        acts.append(h)
    z = []
    for i in range(3):
        zi = h @ params.weights[n_hidden + i]
        if biases is not None:
            zi = zi + biases[n_hidden + i]
        z.append(zi)
    return acts, pre, z


def forward_batch(params: MdnParams, config: MdnConfig, X) -> MixtureParams:
    """Mixture parameters for a batch; arrays of shape ``(B, d)``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[-1] != config.input_dim:
        raise InvalidInputError(f"expected {config.input_dim} features, got {X.shape[-1]}")
    if not np.all(np.isfinite(X)):
        raise NumericError("non-finite network input")
    _, _, (zp, zm, zd) = _run(params, config, X)
    log_pi, mu, delta = _heads(config, zp, zm, zd)
    # Keep pi strictly positive when a logit gap underflows exp.
    pi = np.maximum(np.exp(log_pi), np.finfo(np.float64).tiny)
    return MixtureParams(pi, mu, delta, log_pi)


def forward(params: MdnParams, config: MdnConfig, x) -> MixtureParams:
    """Mixture parameters for a single feature vector."""
    x = getattr(x, "values", x)
    out = forward_batch(params, config, np.asarray(x, dtype=np.float64)[None, :])
    return MixtureParams(out.pi[0], out.mu[0], out.delta[0], out.log_pi[0])


def _component_logpdf(log_pi, mu, delta, y):
    # log_pi, mu, delta: (..., d); y: (..., K) -> (..., K, d)
    u = (y[..., :, None] - mu[..., None, :]) / delta[..., None, :]
    return log_pi[..., None, :] - np.log(delta)[..., None, :] - LOG_SQRT_2PI - 0.5 * u * u


def mixture_logpdf(mix: MixtureParams, y) -> np.ndarray:
    """Log-density of a single mixture at points ``y`` via LogSumExp."""
    y = np.asarray(y, dtype=np.float64)
    flat = np.atleast_1d(y).ravel()
    lp = _component_logpdf(mix.log_pi, mix.mu, mix.delta, flat)
    out = logsumexp(lp, axis=-1)
    return out.reshape(y.shape) if y.ndim else out[0]


def _as_batch(x, y):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None] if x.shape[0] == y.shape[0] else y[None, :]
    if x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise InvalidInputError("x and y must describe the same nonempty batch")
    return x, y


def nll_batch(params: MdnParams, config: MdnConfig, x, y) -> float:
    """Mean over records of the negative log-likelihood summed over each record's targets."""
    x, y = _as_batch(x, y)
    mix = forward_batch(params, config, x)
    lp = _component_logpdf(mix.log_pi, mix.mu, mix.delta, y)
    return float(-logsumexp(lp, axis=-1).sum() / x.shape[0])


def canonical_order(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lexicographic record order, so reductions do not depend on input order."""
    keys = np.concatenate([x, y], axis=1).T[::-1]
    return np.lexsort(keys)


def gradients(params: MdnParams, config: MdnConfig, x, y) -> tuple[float, MdnParams]:
    """Loss and its exact gradient with respect to every trainable array.

    Records are reduced in canonical order, so permuting the batch gives
    bit-identical results.
    """
    x, y = _as_batch(x, y)
    order = canonical_order(x, y)
    x, y = x[order], y[order]
    B = x.shape[0]
    n_hidden = len(config.hidden_sizes)
    acts, pre, (zp, zm, zd) = _run(params, config, x)
    log_pi, mu, delta = _heads(config, zp, zm, zd)

    lp = _component_logpdf(log_pi, mu, delta, y)  # (B, M, d)
    lse = logsumexp(lp, axis=-1, keepdims=True)
    loss = float(-lse.sum() / B)
    if not math.isfinite(loss):
        raise NumericError("non-finite loss")
    gamma = np.exp(lp - lse)  # responsibilities
    M = y.shape[1]

    g_sum = gamma.sum(axis=1)  # (B, d)
    resid = y[:, :, None] - mu[:, None, :]  # (B, M, d)
    inv_d2 = 1.0 / (delta * delta)
    d_zp = -(g_sum - M * np.exp(log_pi)) / B
    d_mu = -(gamma * resid).sum(axis=1) * inv_d2 / B
    d_delta = -(gamma * (resid * resid * inv_d2[:, None, :] - 1.0)).sum(axis=1) / (delta * B)

    d_zm = d_mu * (1.0 - mu * mu) if config.mu_activation == "tanh" else d_mu
    t = np.tanh(zd)
    d_zd = d_delta * (expit(zd) * t * t + _softplus(zd) * 2.0 * t * (1.0 - t * t))

    h = acts[-1]
    grads_w = [None] * (n_hidden + 3)
    grads_b = [None] * (n_hidden + 3)
    dh = np.zeros_like(h)
    for i, dz in enumerate((d_zp, d_zm, d_zd)):
        W = params.weights[n_hidden + i]
        grads_w[n_hidden + i] = h.T @ dz
        grads_b[n_hidden + i] = dz.sum(axis=0)
        dh += dz @ W.T
    for i in range(n_hidden - 1, -1, -1):
        da = dh * np.where(pre[i] > 0, 1.0, config.leaky_slope)
        grads_w[i] = acts[i].T @ da
        grads_b[i] = da.sum(axis=0)
        if i:
            dh = da @ params.weights[i].T
    biases = grads_b if params.biases is not None else None
    return loss, MdnParams(grads_w, biases)
