"""Density and pricing accuracy metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

KL_FLOOR = 1e-300
DEFAULT_GRID_POINTS = 512
_KDE_CHUNK = 4_000_000


@dataclass(frozen=True, eq=False)
class DensityGrid:
    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dx > 0:
            raise InvalidInputError("grid spacing must be positive")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.values.size)

    def mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.dx))

    def same_grid(self, other: "DensityGrid") -> bool:
        return (
            self.values.size == other.values.size
            and math.isclose(self.x0, other.x0, rel_tol=0, abs_tol=1e-12 * max(1.0, abs(self.x0)))
            and math.isclose(self.dx, other.dx, rel_tol=1e-12)
        )


def silverman_bandwidth(samples) -> float:
    x = np.asarray(samples, dtype=np.float64)
    std = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(std, (q75 - q25) / 1.34) if q75 > q25 else std
    return 0.9 * spread * x.size ** (-0.2)


def kde_support(
    samples,
    n_points: int = DEFAULT_GRID_POINTS,
    bandwidth: float | None = None,
    extra: tuple[float, float] | None = None,
):
    """Grid ``(x0, dx, n)`` spanning ``[min - 4h, max + 4h]``, widened to cover ``extra``."""
    x = np.asarray(samples, dtype=np.float64)
    h = silverman_bandwidth(x) if bandwidth is None else bandwidth
    lo, hi = x.min() - 4 * h, x.max() + 4 * h
    if extra is not None:
        lo, hi = min(lo, extra[0]), max(hi, extra[1])
    return lo, (hi - lo) / (n_points - 1), n_points


def mixture_range(mu, delta, width: float = 10.0) -> tuple[float, float]:
    """Hull of the component intervals ``mu_j +- width * delta_j``."""
    mu, delta = np.asarray(mu, dtype=np.float64), np.asarray(delta, dtype=np.float64)
    return float(np.min(mu - width * delta)), float(np.max(mu + width * delta))


def kde(
    samples,
    grid: tuple[float, float, int] | None = None,
    bandwidth: float | None = None,
) -> DensityGrid:
    """Gaussian kernel density estimate on a uniform grid.

    ``grid`` is ``(x0, dx, n_points)``; by default the KDE's own support
    with 512 points.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 30:
        raise InvalidInputError("KDE needs at least 30 samples")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("KDE samples must be finite")
    if x.std() == 0:
        raise InvalidInputError("KDE samples have zero variance")
    h = silverman_bandwidth(x) if bandwidth is None else bandwidth
    if not h > 0:
        raise InvalidInputError("KDE bandwidth must be positive")
    x0, dx, n = kde_support(x, bandwidth=h) if grid is None else grid
    pts = x0 + dx * np.arange(n)
    # Sorted samples give a permutation-independent summation order.
    xs = np.sort(x)
    dens = np.zeros(n)
    step = max(1, _KDE_CHUNK // n)
    for a in range(0, xs.size, step):
        u = (pts[:, None] - xs[None, a : a + step]) / h
        dens += np.exp(-0.5 * u * u).sum(axis=1)
    dens /= xs.size * h * math.sqrt(2 * math.pi)
    return DensityGrid(x0, dx, dens)


def kl_divergence(p: DensityGrid, q: DensityGrid) -> float:
    """Riemann-sum KL divergence ``sum p log(p / q) dx`` on a shared grid."""
    if not p.same_grid(q):
        raise InvalidInputError("KL divergence needs identical grids")
    pv, qv = p.values, np.maximum(q.values, KL_FLOOR)
    mask = pv > 0
    return float(np.sum(pv[mask] * np.log(pv[mask] / qv[mask])) * p.dx)


def huberized_relative_error(p_model: float, p_mc: float) -> float:
    """``|P_model - P_MC| / (0.125% * P_MC + 0.00125)``."""
    if p_mc < 0:
        raise InvalidInputError("benchmark price must be nonnegative")
    return abs(p_model - p_mc) / (0.00125 * p_mc + 0.00125)


def density_on(grid: DensityGrid, pdf) -> DensityGrid:
    """Evaluate a density callable on the points of ``grid``."""
    return DensityGrid(grid.x0, grid.dx, pdf(grid.points))
