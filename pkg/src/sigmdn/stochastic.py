"""Rate paths, correlation structures and correlated multi-asset GBM simulation.

Two volatility regimes are supported:

* time-varying volatility (``GbmScenarioTV``): each asset carries its own
  deterministic volatility path; the log-price update is exact per step
  because all coefficients are held constant within a step;
* local volatility (``GbmScenarioLV``): volatility is a function of the
  current spot, evolved with Euler-Maruyama in log space.

Rates, dividends and time-varying volatilities are CIR trajectories sampled
on a uniform grid.  Inside a step the drift uses the trapezoid average of the
two endpoint values, so ``E[S_j(T)] = S_j(0) exp(int (r - q_j) dt)`` holds
exactly with the same trapezoid integral used for discounting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidInputError, NumericError

TRADING_DAYS = 252
DEFAULT_DT = 1.0 / TRADING_DAYS
MATURITY_RANGE = (0.001, 1.05)

# Upper bound on normals drawn at once when simulating many paths.
_CHUNK_FLOATS = 2_000_000


def time_grid(T: float, dt: float) -> tuple[int, float]:
    """Number of steps and actual step size for a uniform grid on ``[0, T]``.

    The step count is ``ceil(T / dt)``; the step is shrunk to ``T / n`` so the
    grid ends exactly at ``T``.
    """
    if not (math.isfinite(T) and math.isfinite(dt)) or dt <= 0 or T <= 0:
        raise InvalidInputError(f"need T > 0 and dt > 0, got T={T}, dt={dt}")
    ratio = T / dt
    n = round(ratio) if abs(ratio - round(ratio)) < 1e-9 else math.ceil(ratio)
    n = max(int(n), 1)
    return n, T / n


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CirParams:
    """Mean-reversion speed ``a``, long-run level ``b``, vol-of-level ``c``."""

    a: float
    b: float
    c: float
    x0_range: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.x0_range
        vals = (self.a, self.b, self.c, lo, hi)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError(f"non-finite CIR parameters {vals}")
        if self.a <= 0 or self.b <= 0 or self.c <= 0:
            raise InvalidInputError("CIR parameters a, b, c must be positive")
        if not (0.0 <= lo <= hi < 1.0):
            raise InvalidInputError(f"x0_range must lie in [0, 1), got {self.x0_range}")


# Default CIR parameters for rate, dividend and volatility.
CIR_RATE = CirParams(0.6, 0.05, 0.05, (0.005, 0.1))
CIR_DIVIDEND = CirParams(0.6, 0.03, 0.02, (0.005, 0.1))
CIR_VOLATILITY = CirParams(0.75, 0.1, 0.2, (0.01, 0.2))


@dataclass(frozen=True, eq=False)
class RatePath:
    """Nonnegative levels on the uniform grid ``0, dt, ..., (n-1) dt``."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise InvalidInputError("a rate path needs at least 2 grid points")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidInputError("rate path values must be finite and nonnegative")

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def horizon(self) -> float:
        return self.dt * self.n_steps

    def truncate(self, T: float) -> "RatePath":
        """Restrict the path to ``[0, T]``; ``T`` must be a grid point."""
        steps = T / self.dt
        k = round(steps)
        if abs(steps - k) > 1e-6 or k < 1:
            raise InvalidInputError(f"T={T} is not on the path grid (dt={self.dt})")
        if k > self.n_steps:
            raise InvalidInputError(
                f"path horizon {self.horizon:.6g} is shorter than T={T}"
            )
        return RatePath(self.dt, self.values[: k + 1])

    def mean(self) -> float:
        return float(self.values.mean())

    def integral(self) -> float:
        """Trapezoid integral over the whole path."""
        v = self.values
        return float(self.dt * (0.5 * (v[0] + v[-1]) + v[1:-1].sum()))

    def __eq__(self, other):
        if not isinstance(other, RatePath):
            return NotImplemented
        return self.dt == other.dt and np.array_equal(self.values, other.values)


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular factor with unit-norm rows, so ``L L^T`` is a correlation."""

    entries: np.ndarray

    def __post_init__(self):
        L = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", L)
        if L.ndim != 2 or L.shape[0] != L.shape[1] or L.shape[0] < 1:
            raise InvalidInputError(f"Cholesky factor must be square, got {L.shape}")
        if np.any(np.triu(L, 1) != 0):
            raise InvalidInputError("Cholesky factor must be lower triangular")
        if np.any(np.diag(L) <= 0):
            raise InvalidInputError("Cholesky diagonal must be strictly positive")
        if np.max(np.abs(np.linalg.norm(L, axis=1) - 1.0)) > 1e-9:
            raise InvalidInputError("Cholesky rows must have unit norm")

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def correlation(self) -> np.ndarray:
        return self.entries @ self.entries.T

    def lower_vector(self) -> np.ndarray:
        """Row-major lower triangle including the diagonal."""
        return self.entries[np.tril_indices(self.n)]

    @classmethod
    def from_correlation(cls, R: np.ndarray) -> "CholeskyFactor":
        R = np.asarray(R, dtype=np.float64)
        if not np.allclose(R, R.T) or not np.allclose(np.diag(R), 1.0):
            raise InvalidInputError("correlation matrix must be symmetric with unit diagonal")
        try:
            L = np.linalg.cholesky(R)
        except np.linalg.LinAlgError as exc:
            raise InvalidInputError("correlation matrix is not positive definite") from exc
        L /= np.linalg.norm(L, axis=1, keepdims=True)
        return cls(L)

    def __eq__(self, other):
        if not isinstance(other, CholeskyFactor):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)


@dataclass(frozen=True)
class LocalVolParams:
    """Per-asset parameters of ``sigma_L(x) = c ((x - a)^2 + c)^b``."""

    a_loc: float
    b_loc: float
    c_loc: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.a_loc, self.b_loc, self.c_loc)):
            raise InvalidInputError("local-vol parameters must be finite")
        if self.b_loc <= 0 or self.c_loc <= 0:
            raise InvalidInputError("b_loc and c_loc must be positive")


@dataclass(frozen=True)
class GbmScenarioTV:
    r: RatePath
    q: tuple[RatePath, ...]
    sigma: tuple[RatePath, ...]
    chol: CholeskyFactor
    maturity: float

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        object.__setattr__(self, "sigma", tuple(self.sigma))
        n = self.chol.n
        if len(self.q) != n or len(self.sigma) != n:
            raise InvalidInputError("q and sigma need one path per asset")
        _check_paths(self.r, self.q + self.sigma, self.maturity)

    @property
    def n_assets(self) -> int:
        return self.chol.n

    def truncate(self, T: float) -> "GbmScenarioTV":
        return GbmScenarioTV(
            self.r.truncate(T),
            tuple(p.truncate(T) for p in self.q),
            tuple(p.truncate(T) for p in self.sigma),
            self.chol,
            T,
        )


@dataclass(frozen=True)
class GbmScenarioLV:
    r: RatePath
    q: tuple[RatePath, ...]
    vol: tuple[LocalVolParams, ...]
    chol: CholeskyFactor
    weights: np.ndarray
    maturity: float

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        object.__setattr__(self, "vol", tuple(self.vol))
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        n = self.chol.n
        if len(self.q) != n or len(self.vol) != n or w.shape != (n,):
            raise InvalidInputError("q, vol and weights need one entry per asset")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidInputError(f"weights must be nonnegative and sum to 1, got {w}")
        _check_paths(self.r, self.q, self.maturity)

    @property
    def n_assets(self) -> int:
        return self.chol.n

    def truncate(self, T: float) -> "GbmScenarioLV":
        return GbmScenarioLV(
            self.r.truncate(T),
            tuple(p.truncate(T) for p in self.q),
            self.vol,
            self.chol,
            self.weights,
            T,
        )


def _check_paths(r: RatePath, others: Sequence[RatePath], T: float) -> None:
    if not (0 < T <= MATURITY_RANGE[1] + 1e-12):
        raise InvalidInputError(f"maturity must be in (0, {MATURITY_RANGE[1]}], got {T}")
    for p in others:
        if p.dt != r.dt or p.values.size != r.values.size:
            raise InvalidInputError("all scenario paths must share one grid")
    if abs(r.horizon - T) > 1e-9 * max(1.0, T):
        raise InvalidInputError(f"paths cover [0, {r.horizon:.6g}] but maturity is {T}")


# --------------------------------------------------------------------------
# Sampling laws and configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MaturityLaw:
    """Boundary-heavy maturity law: ``w Beta(a, b) + (1 - w) Uniform`` on ``[low, high]``.

    ``kind="fixed"`` puts all mass on ``value``.
    """

    kind: str = "mixture"
    beta_weight: float = 0.7
    beta_a: float = 0.5
    beta_b: float = 0.5
    low: float = MATURITY_RANGE[0]
    high: float = MATURITY_RANGE[1]
    value: float = 1.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            return np.full(n, float(self.value))
        if self.kind != "mixture":
            raise InvalidInputError(f"unknown maturity law {self.kind!r}")
        use_beta = rng.random(n) < self.beta_weight
        u = np.where(use_beta, rng.beta(self.beta_a, self.beta_b, n), rng.random(n))
        return self.low + (self.high - self.low) * u


@dataclass(frozen=True)
class WeightLaw:
    """Basket-weight law: flat Dirichlet (``alpha=1``) or a fixed vector."""

    kind: str = "dirichlet"
    alpha: float = 1.0
    value: tuple[float, ...] | None = None

    def sample(self, n_assets: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "fixed":
            w = np.asarray(self.value, dtype=np.float64)
            if w.shape != (n_assets,):
                raise InvalidInputError("fixed weights have the wrong length")
            return w
        if self.kind != "dirichlet":
            raise InvalidInputError(f"unknown weight law {self.kind!r}")
        w = rng.dirichlet(np.full(n_assets, self.alpha))
        return w / w.sum()


@dataclass(frozen=True)
class ScenarioConfig:
    n_assets: int = 2
    dt: float = DEFAULT_DT
    cir_rate: CirParams = CIR_RATE
    cir_dividend: CirParams = CIR_DIVIDEND
    cir_volatility: CirParams = CIR_VOLATILITY
    maturity_law: MaturityLaw = field(default_factory=MaturityLaw)
    a_loc_range: tuple[float, float] = (0.5, 1.5)
    b_loc_range: tuple[float, float] = (0.05, 0.5)
    c_loc_range: tuple[float, float] = (0.05, 0.4)
    weight_law: WeightLaw = field(default_factory=WeightLaw)
    # Fixed basket weights for the time-varying regime; None means equal weights.
    basket_weights: tuple[float, ...] | None = None

    def tv_weights(self) -> np.ndarray:
        if self.basket_weights is None:
            return np.full(self.n_assets, 1.0 / self.n_assets)
        w = np.asarray(self.basket_weights, dtype=np.float64)
        if w.shape != (self.n_assets,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise InvalidInputError(f"invalid basket weights {self.basket_weights}")
        return w


# --------------------------------------------------------------------------
# CIR paths and correlation
# --------------------------------------------------------------------------


def simulate_cir_paths(
    params: CirParams,
    x0: np.ndarray,
    n_steps: int,
    h: float,
    rng: np.random.Generator | None = None,
    normals: np.ndarray | None = None,
) -> np.ndarray:
    """Full-truncation Euler CIR paths, one row per initial value.

    Returns an array of shape ``(len(x0), n_steps + 1)``.  Negative excursions
    of the auxiliary process are floored at zero in both drift and diffusion.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if not np.all(np.isfinite(x0)) or np.any(x0 < 0):
        raise InvalidInputError("CIR initial values must be finite and nonnegative")
    if normals is None:
        normals = rng.standard_normal((n_steps, x0.size))
    out = np.empty((x0.size, n_steps + 1))
    out[:, 0] = x0
    x = x0.copy()
    sq_h = math.sqrt(h)
    a, b, c = params.a, params.b, params.c
    for k in range(n_steps):
        xp = np.maximum(x, 0.0)
        x = x + a * (b - xp) * h + c * np.sqrt(xp) * sq_h * normals[k]
        out[:, k + 1] = np.maximum(x, 0.0)
    return out


def simulate_cir(
    params: CirParams, x0: float, T: float, dt: float, rng: np.random.Generator
) -> RatePath:
    """Simulate one CIR path on ``[0, T]`` with ``ceil(T/dt)`` steps."""
    if not math.isfinite(x0) or x0 < 0:
        raise InvalidInputError(f"x0 must be finite and nonnegative, got {x0}")
    n, h = time_grid(T, dt)
    return RatePath(h, simulate_cir_paths(params, np.array([x0]), n, h, rng)[0])


def cholesky_from_angles(angles: Sequence[float]) -> CholeskyFactor:
    """Build ``L`` from ``N(N-1)/2`` angles in ``(0, pi)``.

    Row ``i`` consumes the next ``i`` angles: its entries are
    ``cos t1, sin t1 cos t2, ..., sin t1 ... sin t(i-1) cos ti`` followed by the
    product of all ``i`` sines on the diagonal.
    """
    angles = np.asarray(angles, dtype=np.float64).ravel()
    k = angles.size
    n = int(round((1 + math.sqrt(1 + 8 * k)) / 2))
    if n * (n - 1) // 2 != k:
        raise InvalidInputError(f"{k} angles is not N(N-1)/2 for any N")
    if np.any(~np.isfinite(angles)) or np.any(angles <= 0) or np.any(angles >= math.pi):
        raise InvalidInputError("angles must lie strictly inside (0, pi)")
    L = np.zeros((n, n))
    L[0, 0] = 1.0
    pos = 0
    for i in range(1, n):
        theta = angles[pos : pos + i]
        pos += i
        running = 1.0
        for j in range(i):
            L[i, j] = running * math.cos(theta[j])
            running *= math.sin(theta[j])
        L[i, i] = running
    return CholeskyFactor(L)


def _draw_rates(config: ScenarioConfig, n_steps: int, rng: np.random.Generator, with_sigma: bool):
    """Initial values and CIR normals for one scenario, in a fixed draw order."""
    N = config.n_assets
    groups = [(config.cir_rate, 1), (config.cir_dividend, N)]
    if with_sigma:
        groups.append((config.cir_volatility, N))
    x0 = [rng.uniform(p.x0_range[0], p.x0_range[1], size=cnt) for p, cnt in groups]
    normals = [rng.standard_normal((n_steps, cnt)) for _, cnt in groups]
    return x0, normals


def _sample_angles(n_assets: int, rng: np.random.Generator) -> np.ndarray:
    # Uniform(0, pi) excluding the endpoints.
    k = n_assets * (n_assets - 1) // 2
    u = rng.random(k)
    return np.pi * np.clip(u, 1e-12, 1 - 1e-12)


def sample_local_vol(config: ScenarioConfig, rng: np.random.Generator) -> tuple[LocalVolParams, ...]:
    N = config.n_assets
    a = rng.uniform(*config.a_loc_range, size=N)
    b = rng.uniform(*config.b_loc_range, size=N)
    c = rng.uniform(*config.c_loc_range, size=N)
    return tuple(LocalVolParams(float(a[j]), float(b[j]), float(c[j])) for j in range(N))


def sample_scenarios(
    config: ScenarioConfig, rngs: Sequence[np.random.Generator], maturity: float, regime: str
) -> list:
    """One scenario per generator, all with the same maturity.

    Each generator is consumed in the same order as by
    ``sample_scenario_tv``/``sample_scenario_lv``; the CIR recursions of all
    scenarios run together.
    """
    if regime not in ("tv", "lv"):
        raise InvalidInputError(f"unknown regime {regime!r}")
    tv = regime == "tv"
    N = config.n_assets
    n, h = time_grid(maturity, config.dt)
    draws = []
    for g in rngs:
        x0, normals = _draw_rates(config, n, g, with_sigma=tv)
        angles = _sample_angles(N, g)
        extra = None if tv else (sample_local_vol(config, g), config.weight_law.sample(N, g))
        draws.append((x0, normals, angles, extra))
    params = [config.cir_rate, config.cir_dividend] + ([config.cir_volatility] if tv else [])
    paths = []
    for k, prm in enumerate(params):
        x0 = np.concatenate([d[0][k] for d in draws])
        z = np.concatenate([d[1][k] for d in draws], axis=1)
        paths.append(simulate_cir_paths(prm, x0, n, h, normals=z))
    out = []
    for s, (_, _, angles, extra) in enumerate(draws):
        r = RatePath(h, paths[0][s])
        q = tuple(RatePath(h, row) for row in paths[1][s * N : (s + 1) * N])
        chol = cholesky_from_angles(angles)
        if tv:
            sigma = tuple(RatePath(h, row) for row in paths[2][s * N : (s + 1) * N])
            out.append(GbmScenarioTV(r, q, sigma, chol, maturity))
        else:
            vol, w = extra
            out.append(GbmScenarioLV(r, q, vol, chol, w, maturity))
    return out


def sample_scenario_tv(
    config: ScenarioConfig, rng: np.random.Generator, maturity: float | None = None
) -> GbmScenarioTV:
    T = float(config.maturity_law.sample(1, rng)[0]) if maturity is None else maturity
    return sample_scenarios(config, [rng], T, "tv")[0]


def sample_scenario_lv(
    config: ScenarioConfig, rng: np.random.Generator, maturity: float | None = None
) -> GbmScenarioLV:
    T = float(config.maturity_law.sample(1, rng)[0]) if maturity is None else maturity
    return sample_scenarios(config, [rng], T, "lv")[0]


# --------------------------------------------------------------------------
# Asset simulation
# --------------------------------------------------------------------------


def local_vol(x, p: LocalVolParams | None = None, *, a=None, b=None, c=None):
    """Evaluate ``c ((x - a)^2 + c)^b``; parameters broadcast against ``x``."""
    if p is not None:
        a, b, c = p.a_loc, p.b_loc, p.c_loc
    return c * ((x - a) ** 2 + c) ** b


def _step_averages(values: np.ndarray) -> np.ndarray:
    return 0.5 * (values[..., :-1] + values[..., 1:])


def _stack_rates(scenarios):
    r = np.stack([s.r.values for s in scenarios])
    q = np.stack([[p.values for p in s.q] for s in scenarios])
    chol = np.stack([s.chol.entries for s in scenarios])
    return r, q, chol


def _check_stack(scenarios):
    first = scenarios[0]
    for s in scenarios:
        if s.r.values.size != first.r.values.size or s.r.dt != first.r.dt:
            raise InvalidInputError("stacked scenarios must share a time grid")
        if s.n_assets != first.n_assets:
            raise InvalidInputError("stacked scenarios must share the basket size")
    return first.r.n_steps, first.r.dt


def log_terminal_tv(
    scenarios: Sequence[GbmScenarioTV], normal_chunks: Iterator[np.ndarray]
) -> np.ndarray:
    """Exact log-Euler terminal log-prices (relative to ``S(0)``) for stacked scenarios.

    ``normal_chunks`` yields independent standard normals of shape
    ``(S, c, P, N)`` covering the steps in order.  Returns ``(S, P, N)``.
    """
    n_steps, h = _check_stack(scenarios)
    r, q, L = _stack_rates(scenarios)
    sig2 = np.stack([[p.values for p in s.sigma] for s in scenarios]) ** 2
    r_bar = _step_averages(r)[:, None, :]  # (S, 1, n)
    s2_bar = _step_averages(sig2)  # (S, N, n)
    drift = ((r_bar - _step_averages(q) - 0.5 * s2_bar) * h).sum(axis=-1)  # (S, N)
    vol = np.sqrt(s2_bar * h).transpose(0, 2, 1)  # (S, n, N)
    acc = None
    k = 0
    for z in normal_chunks:
        c = z.shape[1]
        corr = np.einsum("sij,scpj->scpi", L, z)
        part = (vol[:, k : k + c, None, :] * corr).sum(axis=1)
        acc = part if acc is None else acc + part
        k += c
    if k != n_steps:
        raise InvalidInputError(f"expected normals for {n_steps} steps, got {k}")
    return drift[:, None, :] + acc


def log_terminal_lv(
    scenarios: Sequence[GbmScenarioLV], normal_chunks: Iterator[np.ndarray]
) -> np.ndarray:
    """Euler-Maruyama in log space with spot-dependent volatility; unit initial spot."""
    n_steps, h = _check_stack(scenarios)
    r, q, L = _stack_rates(scenarios)
    carry = (_step_averages(r)[:, None, :] - _step_averages(q)) * h  # (S, N, n)
    prm = np.array([[(v.a_loc, v.b_loc, v.c_loc) for v in s.vol] for s in scenarios])
    a, b, c = (prm[:, None, :, i] for i in range(3))  # (S, 1, N)
    sq_h = math.sqrt(h)
    x = None
    k = 0
    for z in normal_chunks:
        corr = np.einsum("sij,scpj->scpi", L, z)
        if x is None:
            x = np.zeros(corr.shape[:1] + corr.shape[2:])
        for t in range(corr.shape[1]):
            sig = local_vol(np.exp(x), a=a, b=b, c=c)
            x = x + carry[:, None, :, k] - 0.5 * sig * sig * h + sig * sq_h * corr[:, t]
            k += 1
    if k != n_steps:
        raise InvalidInputError(f"expected normals for {n_steps} steps, got {k}")
    return x


def _normal_chunks(rng: np.random.Generator, n_steps: int, n_paths: int, n_assets: int):
    per_step = n_paths * n_assets
    c = max(1, min(n_steps, _CHUNK_FLOATS // max(per_step, 1)))
    done = 0
    while done < n_steps:
        take = min(c, n_steps - done)
        yield rng.standard_normal((take, n_paths, n_assets))[None]
        done += take


def simulate_terminal_prices(
    scenario: GbmScenarioTV | GbmScenarioLV,
    n_paths: int,
    rng: np.random.Generator,
    s0: np.ndarray | None = None,
) -> np.ndarray:
    """Terminal prices, shape ``(n_paths, N)``, starting from ``s0`` (default ones)."""
    if n_paths < 1:
        raise InvalidInputError("n_paths must be at least 1")
    N = scenario.n_assets
    s0 = np.ones(N) if s0 is None else np.asarray(s0, dtype=np.float64)
    chunks = _normal_chunks(rng, scenario.r.n_steps, n_paths, N)
    if isinstance(scenario, GbmScenarioTV):
        logs = log_terminal_tv([scenario], chunks)[0]
    else:
        if not np.all(s0 == 1.0):
            raise InvalidInputError("local-vol simulation assumes unit initial prices")
        logs = log_terminal_lv([scenario], chunks)[0]
    prices = s0 * np.exp(logs)
    if not np.all(np.isfinite(prices)):
        raise NumericError("non-finite terminal price")
    return prices


def log_basket_return(terminal_prices, weights, s0=None) -> np.ndarray:
    """``log(sum_j w_j S_j(T) / S_j(0))`` per path."""
    S = np.atleast_2d(np.asarray(terminal_prices, dtype=np.float64))
    w = np.asarray(weights, dtype=np.float64)
    s0 = np.ones(S.shape[-1]) if s0 is None else np.asarray(s0, dtype=np.float64)
    if np.any(s0 <= 0):
        raise InvalidInputError("initial prices must be positive")
    basket = (S / s0) @ w
    if np.any(basket <= 0) or not np.all(np.isfinite(basket)):
        raise NumericError("nonpositive or non-finite basket value")
    return np.log(basket)
