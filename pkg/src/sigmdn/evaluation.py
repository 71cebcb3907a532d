"""Compare a trained model against fresh Monte Carlo on given scenarios."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as streams
from .features import TV, assemble
from .mdn.model import MdnModel
from .metrics import DensityGrid, huberized_relative_error, kde, kde_support, kl_divergence, mixture_range
from .pricing import (
    CALL,
    CLOSED_FORM,
    DEFAULT_MATURITIES,
    DEFAULT_STRIKES,
    MONTE_CARLO,
    PUT,
    OptionSpec,
    discount_factor,
    mc_price,
    mixture_european_price,
)
from .stochastic import (
    GbmScenarioLV,
    GbmScenarioTV,
    ScenarioConfig,
    log_basket_return,
    sample_scenarios,
    simulate_terminal_prices,
)

MIN_RECOMMENDED_PATHS = 1000
PRICE_COLUMNS = ("scenario_id", "maturity", "strike", "kind", "method", "price", "stderr", "relative_error")


@dataclass(frozen=True)
class PriceRow:
    scenario_id: str
    maturity: float
    strike: float
    kind: str
    method: str
    price: float
    stderr: float | None = None
    relative_error: float | None = None


@dataclass
class MaturityResult:
    maturity: float
    kl: float
    discount: float
    mc_mean: float
    mdn_mean: float


@dataclass
class EvaluationReport:
    maturities: list[MaturityResult] = field(default_factory=list)
    prices: list[PriceRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def kl_values(self) -> np.ndarray:
        return np.array([m.kl for m in self.maturities])

    def relative_errors(self) -> np.ndarray:
        return np.array([p.relative_error for p in self.prices if p.method == CLOSED_FORM])

    def summary(self) -> dict:
        rel = self.relative_errors()
        return {
            "kl_by_maturity": [
                {"maturity": m.maturity, "kl": m.kl, "discount": m.discount,
                 "mc_mean": m.mc_mean, "mdn_mean": m.mdn_mean}
                for m in self.maturities
            ],
            "median_kl": float(np.median(self.kl_values())) if self.maturities else None,
            "median_relative_error": float(np.median(rel)) if rel.size else None,
            "max_relative_error": float(np.max(rel)) if rel.size else None,
            "warnings": list(self.warnings),
        }

    def extend(self, other: "EvaluationReport") -> None:
        self.maturities += other.maturities
        self.prices += other.prices
        self.warnings += [w for w in other.warnings if w not in self.warnings]


def price_table_csv(rows: Sequence[PriceRow]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(PRICE_COLUMNS)
    fmt = lambda v: "" if v is None else repr(float(v))
    for r in rows:
        out.writerow([r.scenario_id, repr(r.maturity), repr(r.strike), r.kind, r.method,
                      repr(r.price), fmt(r.stderr), fmt(r.relative_error)])
    return buf.getvalue()


def model_price_rows(
    model: MdnModel,
    scenario: GbmScenarioTV | GbmScenarioLV,
    maturity: float,
    strikes: Sequence[float],
    kinds: Sequence[str] = (CALL, PUT),
    scenario_id: str = "0",
) -> list[PriceRow]:
    """Closed-form prices from the model's mixture at one maturity."""
    sub = scenario.truncate(maturity) if abs(scenario.maturity - maturity) > 1e-12 else scenario
    lay = model.layout
    level = lay.level if lay is not None else 5
    aug = lay.time_augment if lay is not None else False
    mix = model.mixture(assemble(sub, level, time_augment=aug))
    D = discount_factor(sub.r)
    rows = []
    for kind in kinds:
        for K in strikes:
            q = mixture_european_price(mix, OptionSpec(kind, float(K), maturity), D)
            rows.append(PriceRow(scenario_id, maturity, float(K), kind, q.method, q.price))
    return rows


def evaluate_scenario(
    model: MdnModel,
    scenario: GbmScenarioTV | GbmScenarioLV,
    n_paths: int,
    seed: int,
    maturities: Sequence[float] = DEFAULT_MATURITIES,
    strikes: Sequence[float] = DEFAULT_STRIKES,
    weights: Sequence[float] | None = None,
    scenario_id: str = "0",
    scenario_index: int = 0,
) -> EvaluationReport:
    """KL divergence and price errors of the model against Monte Carlo.

    The scenario's paths must cover the largest maturity.  For each maturity
    both densities live on one 512-point grid spanning the KDE support and
    every component's ``mu +- 10 delta``.
    """
    report = EvaluationReport()
    if n_paths < MIN_RECOMMENDED_PATHS:
        report.warnings.append(
            f"mc-paths={n_paths} is below {MIN_RECOMMENDED_PATHS}; metrics are noisy"
        )
    lay = model.layout
    level = lay.level if lay is not None else 5
    aug = lay.time_augment if lay is not None else False
    if isinstance(scenario, GbmScenarioTV):
        w = np.full(scenario.n_assets, 1.0 / scenario.n_assets) if weights is None else np.asarray(weights, float)
    else:
        w = scenario.weights
    for k, T in enumerate(maturities):
        sub = scenario.truncate(T) if abs(scenario.maturity - T) > 1e-12 else scenario
        mix = model.mixture(assemble(sub, level, time_augment=aug))
        D = discount_factor(sub.r)
        rng = streams.stream(seed, streams.EVAL_PATHS, scenario_index, k)
        y = log_basket_return(simulate_terminal_prices(sub, n_paths, rng), w)
        grid = kde_support(y, extra=mixture_range(mix.mu, mix.delta))
        p_mc = kde(y, grid)
        p_mdn = DensityGrid(p_mc.x0, p_mc.dx, mix.pdf(p_mc.points))
        kl = kl_divergence(p_mc, p_mdn)
        report.maturities.append(MaturityResult(T, kl, D, float(y.mean()), mix.mean()))
        for kind in (CALL, PUT):
            for K in strikes:
                spec = OptionSpec(kind, float(K), T)
                mc = mc_price(y, spec, D)
                md = mixture_european_price(mix, spec, D)
                err = huberized_relative_error(md.price, mc.price)
                report.prices.append(PriceRow(scenario_id, T, float(K), kind, MONTE_CARLO, mc.price, mc.stderr))
                report.prices.append(PriceRow(scenario_id, T, float(K), kind, CLOSED_FORM, md.price, None, err))
    return report


def held_out_scenarios(
    config: ScenarioConfig, regime: str, n: int, seed: int, horizon: float = 1.0
) -> list[GbmScenarioTV | GbmScenarioLV]:
    """Fresh scenarios over ``[0, horizon]`` from a stream domain unused by training."""
    rngs = [streams.stream(seed, streams.EVAL_SCENARIO, k) for k in range(n)]
    return sample_scenarios(config, rngs, horizon, regime)


def with_weights(scenario: GbmScenarioLV, weights) -> GbmScenarioLV:
    return GbmScenarioLV(scenario.r, scenario.q, scenario.vol, scenario.chol, np.asarray(weights, float), scenario.maturity)


def regime_of(scenario) -> str:
    return TV if isinstance(scenario, GbmScenarioTV) else "lv"


def finite(values) -> bool:
    return all(math.isfinite(v) for v in values)
