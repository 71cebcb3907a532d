"""AdamW with decoupled weight decay and a reduce-on-plateau learning-rate schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import MdnParams


@dataclass(frozen=True)
class AdamWHyper:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 1e-4


@dataclass(eq=False)
class AdamWState:
    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params: MdnParams) -> "AdamWState":
        arrays = params.arrays()
        return cls(0, [np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays])

    def copy(self) -> "AdamWState":
        return AdamWState(self.step, [a.copy() for a in self.m], [a.copy() for a in self.v])


def adamw_step(
    state: AdamWState, params: MdnParams, grads: MdnParams, hyper: AdamWHyper
) -> tuple[AdamWState, MdnParams]:
    """One AdamW update; returns new state and parameters (inputs untouched).

    Weight decay multiplies weight matrices by ``1 - lr * weight_decay`` and is
    never applied to biases.
    """
    p_arrays = params.arrays()
    g_arrays = grads.arrays()
    if len(p_arrays) != len(g_arrays) or len(p_arrays) != len(state.m):
        raise ValueError("optimizer state, params and grads do not line up")
    n_weights = len(params.weights)
    t = state.step + 1
    bc1 = 1.0 - hyper.beta1**t
    bc2 = 1.0 - hyper.beta2**t
    new_p, new_m, new_v = [], [], []
    for i, (p, g, m, v) in enumerate(zip(p_arrays, g_arrays, state.m, state.v)):
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g
        if i < n_weights and hyper.weight_decay:
            p = p * (1.0 - hyper.lr * hyper.weight_decay)
        p = p - hyper.lr * (m / bc1) / (np.sqrt(v / bc2) + hyper.eps)
        new_p.append(p)
        new_m.append(m)
        new_v.append(v)
    biases = new_p[n_weights:] if params.biases is not None else None
    return AdamWState(t, new_m, new_v), MdnParams(new_p[:n_weights], biases)


@dataclass
class PlateauScheduler:
    """Multiply the rate by ``factor`` after ``patience`` epochs without improvement.

    An epoch improves when the monitored loss drops below the best seen so far
    by at least ``min_delta``.
    """

    lr: float
    factor: float = 0.5
    patience: int = 3
    min_delta: float = 1e-4
    min_lr: float = 1e-5
    best: float = math.inf
    lowest: float = math.inf
    bad_epochs: int = 0
    reductions: list[int] = field(default_factory=list)

    def step(self, loss: float, epoch: int) -> bool:
        """Record one epoch's loss; returns True if it is the lowest so far."""
        lowest = loss < self.lowest
        self.lowest = min(self.lowest, loss)
        if loss < self.best - self.min_delta:
            self.best = loss
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
            if self.bad_epochs >= self.patience:
                self.lr *= self.factor
                self.bad_epochs = 0
                self.reductions.append(epoch)
        return lowest

    @property
    def exhausted(self) -> bool:
        return self.lr < self.min_lr
