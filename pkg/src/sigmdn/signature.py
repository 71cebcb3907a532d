"""Truncated path signatures of piecewise-linear trajectories.

A signature truncated at level ``l`` is stored as a list of tensors
``levels[k-1]`` of shape ``(m,) * k`` for ``k = 1..l``; level 0 is the
implicit constant 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_LEVEL = 5


@dataclass(frozen=True, eq=False)
class TruncatedSignature:
    dim: int
    level: int
    levels: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.dim < 1 or self.level < 1:
            raise InvalidInputError("dim and level must be at least 1")
        if len(self.levels) != self.level:
            raise InvalidInputError("one tensor per level is required")
        for k, t in enumerate(self.levels, start=1):
            if t.shape != (self.dim,) * k:
                raise InvalidInputError(f"level {k} has shape {t.shape}")

    @property
    def coefficients(self) -> np.ndarray:
        """Flat vector of all coefficients, level by level, row-major."""
        return np.concatenate([t.ravel() for t in self.levels])

    def __len__(self) -> int:
        return sum(self.dim**k for k in range(1, self.level + 1))

    @classmethod
    def identity(cls, dim: int, level: int) -> "TruncatedSignature":
        return cls(dim, level, tuple(np.zeros((dim,) * k) for k in range(1, level + 1)))


def signature_of_linear_segment(increment, level: int) -> TruncatedSignature:
    """Tensor exponential of a single increment: ``delta^{(x) k} / k!``."""
    d = np.atleast_1d(np.asarray(increment, dtype=np.float64))
    if d.ndim != 1 or d.size < 1 or level < 1:
        raise InvalidInputError("need a 1-D increment and level >= 1")
    levels = [d.copy()]
    for k in range(2, level + 1):
        levels.append(np.multiply.outer(levels[-1], d) / k)
    return TruncatedSignature(d.size, level, tuple(levels))


def chen_concat(s1: TruncatedSignature, s2: TruncatedSignature) -> TruncatedSignature:
    """Truncated tensor product: the signature of ``s1``'s path followed by ``s2``'s."""
    if s1.dim != s2.dim or s1.level != s2.level:
        raise InvalidInputError(
            f"mismatched signatures (dim {s1.dim}/{s2.dim}, level {s1.level}/{s2.level})"
        )
    a, b = s1.levels, s2.levels
    out = []
    for k in range(1, s1.level + 1):
        t = a[k - 1] + b[k - 1]
        for i in range(1, k):
            t = t + np.multiply.outer(a[i - 1], b[k - i - 1])
        out.append(t)
    return TruncatedSignature(s1.dim, s1.level, tuple(out))


def signature_of_path(samples, level: int) -> TruncatedSignature:
    """Signature of the piecewise-linear interpolation of ``samples`` (shape ``(n, m)``)."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 2:
        raise InvalidInputError("a path needs at least 2 sample points")
    incs = np.diff(x, axis=0)
    sig = signature_of_linear_segment(incs[0], level)
    for d in incs[1:]:
        sig = chen_concat(sig, signature_of_linear_segment(d, level))
    return sig


def reverse(samples) -> np.ndarray:
    return np.asarray(samples)[::-1]


def normalize_levels(coefficients: np.ndarray, dim: int, level: int) -> np.ndarray:
    """Scale each level-``k`` block by ``k!``."""
    scale = np.concatenate(
        [np.full(dim**k, math.factorial(k), dtype=np.float64) for k in range(1, level + 1)]
    )
    return coefficients * scale


def scalar_signature_features(values, level: int = DEFAULT_LEVEL) -> np.ndarray:
    """Normalized level-1..l signature terms of scalar paths.

    For a 1-D path the level-``k`` term is ``delta^k / k!`` with ``delta`` the
    endpoint increment, so after ``k!`` normalization the features are
    ``delta, delta^2, ..., delta^l``.  ``values`` may be a single path or a
    stack of paths along the leading axes; the result has a trailing axis of
    length ``level``.
    """
    v = np.asarray(getattr(values, "values", values), dtype=np.float64)
    if v.shape[-1] < 2 or level < 1:
        raise InvalidInputError("need at least 2 samples and level >= 1")
    delta = v[..., -1] - v[..., 0]
    return delta[..., None] ** np.arange(1, level + 1)


def time_augmented_features(values, horizon: float, level: int = DEFAULT_LEVEL) -> np.ndarray:
    """Normalized signature of the 2-D path ``(t, x_t)`` on ``[0, horizon]``."""
    v = np.asarray(getattr(values, "values", values), dtype=np.float64)
    t = np.linspace(0.0, horizon, v.size)
    sig = signature_of_path(np.column_stack([t, v]), level)
    return normalize_levels(sig.coefficients, 2, level)
