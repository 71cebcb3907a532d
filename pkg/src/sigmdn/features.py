"""Conditioning vectors for the mixture density network.

Every entry is scaled by ``T`` or ``sqrt(T)`` so the whole vector vanishes as
the maturity goes to zero.  Volatility means scale with ``sqrt(T)``, all
signature blocks and rate means with ``T``, the Cholesky entries with
``sqrt(T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .signature import DEFAULT_LEVEL, scalar_signature_features, time_augmented_features
from .stochastic import GbmScenarioLV, GbmScenarioTV

TV = "tv"
LV = "lv"
REGIMES = (TV, LV)


def signature_width(level: int, time_augment: bool = False) -> int:
    return sum(2**k for k in range(1, level + 1)) if time_augment else level


@dataclass(frozen=True)
class FeatureLayout:
    """Ordered named groups ``(name, start, stop)`` of a flat feature vector."""

    regime: str
    n_assets: int
    level: int
    time_augment: bool
    groups: tuple[tuple[str, int, int], ...]

    @property
    def dim(self) -> int:
        return self.groups[-1][2]

    def split(self, values: np.ndarray) -> dict[str, np.ndarray]:
        values = np.asarray(values)
        if values.shape[-1] != self.dim:
            raise InvalidInputError(f"expected {self.dim} features, got {values.shape[-1]}")
        return {name: values[..., a:b] for name, a, b in self.groups}

    def join(self, parts: dict[str, np.ndarray]) -> np.ndarray:
        return np.concatenate([np.ravel(parts[name]) for name, _, _ in self.groups])

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "n_assets": self.n_assets,
            "level": self.level,
            "time_augment": self.time_augment,
            "groups": [list(g) for g in self.groups],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureLayout":
        layout = make_layout(d["regime"], d["n_assets"], d["level"], d.get("time_augment", False))
        if [list(g) for g in layout.groups] != [list(g) for g in d["groups"]]:
            raise InvalidInputError("stored layout does not match its regime description")
        return layout


def make_layout(regime: str, n_assets: int, level: int = DEFAULT_LEVEL, time_augment: bool = False) -> FeatureLayout:
    if regime not in REGIMES:
        raise InvalidInputError(f"unknown regime {regime!r}")
    if n_assets < 1 or level < 1:
        raise InvalidInputError("n_assets and level must be at least 1")
    N, s = n_assets, signature_width(level, time_augment)
    n_chol = N * (N + 1) // 2
    if regime == TV:
        sizes = [
            ("r_mean", 1), ("q_mean", N), ("sigma_mean", N),
            ("r_sig", s), ("q_sig", N * s), ("sigma_sig", N * s),
            ("chol", n_chol), ("T", 1),
        ]
    else:
        sizes = [
            ("w", N), ("r_mean", 1), ("q_mean", N),
            ("r_sig", s), ("q_sig", N * s),
            ("a_loc", N), ("b_loc", N), ("c_loc", N),
            ("chol", n_chol), ("T", 1),
        ]
    groups, pos = [], 0
    for name, size in sizes:
        groups.append((name, pos, pos + size))
        pos += size
    return FeatureLayout(regime, N, level, time_augment, tuple(groups))


def feature_dim(regime: str, n_assets: int, level: int = DEFAULT_LEVEL, time_augment: bool = False) -> int:
    return make_layout(regime, n_assets, level, time_augment).dim


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    layout: FeatureLayout

    @property
    def regime(self) -> str:
        return self.layout.regime

    def groups(self) -> dict[str, np.ndarray]:
        return self.layout.split(self.values)

    def __len__(self) -> int:
        return self.values.size


def _sig(path, level: int, time_augment: bool) -> np.ndarray:
    if time_augment:
        return time_augmented_features(path.values, path.horizon, level)
    return scalar_signature_features(path.values, level)


def _restrict(scenario, T: float | None):
    T = scenario.maturity if T is None else T
    if scenario.r.horizon < T - 1e-9:
        raise InvalidInputError(
            f"path horizon {scenario.r.horizon:.6g} is shorter than T={T}"
        )
    if abs(scenario.r.horizon - T) > 1e-9:
        scenario = scenario.truncate(T)
    return scenario, T


def assemble_tv(
    scenario: GbmScenarioTV, level: int = DEFAULT_LEVEL, T: float | None = None, time_augment: bool = False
) -> FeatureVector:
    """Feature vector of a time-varying-volatility scenario at maturity ``T``."""
    scenario, T = _restrict(scenario, T)
    layout = make_layout(TV, scenario.n_assets, level, time_augment)
    rt = math.sqrt(T)
    parts = {
        "r_mean": scenario.r.mean() * T,
        "q_mean": np.array([p.mean() for p in scenario.q]) * T,
        "sigma_mean": np.array([p.mean() for p in scenario.sigma]) * rt,
        "r_sig": _sig(scenario.r, level, time_augment) * T,
        "q_sig": np.concatenate([_sig(p, level, time_augment) for p in scenario.q]) * T,
        "sigma_sig": np.concatenate([_sig(p, level, time_augment) for p in scenario.sigma]) * T,
        "chol": scenario.chol.lower_vector() * rt,
        "T": T,
    }
    return FeatureVector(layout.join(parts), layout)


def assemble_lv(
    scenario: GbmScenarioLV, level: int = DEFAULT_LEVEL, T: float | None = None, time_augment: bool = False
) -> FeatureVector:
    """Feature vector of a local-volatility scenario at maturity ``T``."""
    scenario, T = _restrict(scenario, T)
    layout = make_layout(LV, scenario.n_assets, level, time_augment)
    rt = math.sqrt(T)
    vol = scenario.vol
    parts = {
        "w": scenario.weights * T,
        "r_mean": scenario.r.mean() * T,
        "q_mean": np.array([p.mean() for p in scenario.q]) * T,
        "r_sig": _sig(scenario.r, level, time_augment) * T,
        "q_sig": np.concatenate([_sig(p, level, time_augment) for p in scenario.q]) * T,
        "a_loc": np.array([v.a_loc for v in vol]) * T,
        "b_loc": np.array([v.b_loc for v in vol]) * T,
        "c_loc": np.array([v.c_loc for v in vol]) * T,
        "chol": scenario.chol.lower_vector() * rt,
        "T": T,
    }
    return FeatureVector(layout.join(parts), layout)


def assemble(scenario, level: int = DEFAULT_LEVEL, T: float | None = None, time_augment: bool = False) -> FeatureVector:
    if isinstance(scenario, GbmScenarioTV):
        return assemble_tv(scenario, level, T, time_augment)
    return assemble_lv(scenario, level, T, time_augment)
