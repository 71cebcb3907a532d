"""Run configuration: a JSON document with every default spelled out.

Schema (all keys optional except ``regime``)::

    regime            "tv" | "lv"                     required
    n_assets          int, 2
    level             int, 5        signature truncation level
    time_augment      bool, false   use (t, x) path signatures
    dt                float, 1/252
    cir.rate          {a, b, c, x0_range}  0.6, 0.05, 0.05, [0.005, 0.1]
    cir.dividend      {a, b, c, x0_range}  0.6, 0.03, 0.02, [0.005, 0.1]
    cir.volatility    {a, b, c, x0_range}  0.75, 0.1, 0.2, [0.01, 0.2]
    maturity_law      {kind "mixture"|"fixed", beta_weight 0.7, beta_a 0.5,
                       beta_b 0.5, low 0.001, high 1.05, value 1.0}
    local_vol         {a_loc_range [0.5, 1.5], b_loc_range [0.05, 0.5],
                       c_loc_range [0.05, 0.4]}
    weight_law        {kind "dirichlet"|"fixed", alpha 1.0, value null}
    basket_weights    null (equal weights) or list, tv regime only
    dataset           {n1 200, n2 100, M 30, validation_n1 50, threads 1}
    mdn               {hidden_sizes [320, 256, 256, 192, 128, 80],
                       n_components 10, mu_activation "tanh" (tv) / "identity" (lv),
                       epsilon0 1e-4, leaky_slope 0.01, train_biases false}
    train             {learning_rate 0.01, batch_size 100000, weight_decay 1e-4,
                       beta1 0.9, beta2 0.999, eps 1e-8, patience 3,
                       decay_factor 0.5, min_delta 1e-4, min_lr 1e-5,
                       epochs 100, validation_fraction 0.2, standardize "scale"}
    evaluation        {strikes: 21 points on [0.8, 1.2],
                       maturities [0.25, 0.5, 0.75, 1.0], mc_paths 100000}
    seeds             {data 0, train 0, eval 0}

Unknown keys are rejected.  Environment variables ``SMDN_SEED`` (all seeds)
and ``SMDN_THREADS`` (generation threads) override the file.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, SigMdnError
from .features import LV, TV, feature_dim
from .mdn.network import MdnConfig
from .mdn.train import TrainConfig
from .pricing import DEFAULT_MATURITIES, DEFAULT_STRIKES
from .stochastic import (
    CIR_DIVIDEND,
    CIR_RATE,
    CIR_VOLATILITY,
    DEFAULT_DT,
    CirParams,
    MaturityLaw,
    ScenarioConfig,
    WeightLaw,
)

SEED_ENV = "SMDN_SEED"
THREADS_ENV = "SMDN_THREADS"


@dataclass(frozen=True)
class DatasetSizes:
    n1: int = 200
    n2: int = 100
    M: int = 30
    validation_n1: int = 50
    threads: int = 1


@dataclass(frozen=True)
class EvaluationGrid:
    strikes: tuple[float, ...] = DEFAULT_STRIKES
    maturities: tuple[float, ...] = DEFAULT_MATURITIES
    mc_paths: int = 100_000


@dataclass(frozen=True)
class Seeds:
    data: int = 0
    train: int = 0
    eval: int = 0


@dataclass(frozen=True)
class RunConfig:
    regime: str
    scenario: ScenarioConfig
    level: int = 5
    time_augment: bool = False
    dataset: DatasetSizes = DatasetSizes()
    mdn: dict = field(default_factory=dict)  # MdnConfig fields other than input_dim
    train: TrainConfig = TrainConfig()
    evaluation: EvaluationGrid = EvaluationGrid()
    seeds: Seeds = Seeds()

    @property
    def feature_dim(self) -> int:
        return feature_dim(self.regime, self.scenario.n_assets, self.level, self.time_augment)

    def mdn_config(self) -> MdnConfig:
        kw = {"mu_activation": "tanh" if self.regime == TV else "identity"}
        kw.update(self.mdn)
        return MdnConfig(self.feature_dim, **kw)

    def train_config(self) -> TrainConfig:
        return dataclasses.replace(self.train, seed=self.seeds.train)

    def to_dict(self) -> dict:
        s = self.scenario
        return {
            "regime": self.regime,
            "n_assets": s.n_assets,
            "level": self.level,
            "time_augment": self.time_augment,
            "dt": s.dt,
            "cir": {
                "rate": dataclasses.asdict(s.cir_rate),
                "dividend": dataclasses.asdict(s.cir_dividend),
                "volatility": dataclasses.asdict(s.cir_volatility),
            },
            "maturity_law": dataclasses.asdict(s.maturity_law),
            "local_vol": {
                "a_loc_range": list(s.a_loc_range),
                "b_loc_range": list(s.b_loc_range),
                "c_loc_range": list(s.c_loc_range),
            },
            "weight_law": dataclasses.asdict(s.weight_law),
            "basket_weights": None if s.basket_weights is None else list(s.basket_weights),
            "dataset": dataclasses.asdict(self.dataset),
            "mdn": {k: v for k, v in dataclasses.asdict(self.mdn_config()).items() if k != "input_dim"},
            "train": {k: v for k, v in dataclasses.asdict(self.train).items() if k != "seed"},
            "evaluation": dataclasses.asdict(self.evaluation),
            "seeds": dataclasses.asdict(self.seeds),
        }


# --------------------------------------------------------------------------
# parsing
# --------------------------------------------------------------------------


def _section(doc: Any, path: str) -> dict:
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    return doc


def _check_keys(doc: dict, allowed, path: str) -> None:
    for k in doc:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else k, "unknown key")


def _coerce(value, default, path: str):
    """Convert a JSON value to the type of ``default``."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple) or default is None:
        if value is None:
            return None
        if not isinstance(value, (list, tuple)) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(path, f"expected a list of numbers, got {value!r}")
        return tuple(value)
    raise ConfigError(path, "unsupported value")


def _build(cls, doc: Any, path: str, defaults=None, skip=()):
    """Instantiate dataclass ``cls`` from ``doc`` over ``defaults``."""
    doc = _section(doc, path)
    base = defaults if defaults is not None else cls()
    names = [f.name for f in dataclasses.fields(cls) if f.name not in skip]
    _check_keys(doc, names, path)
    kw = {}
    for name in names:
        d = getattr(base, name)
        kw[name] = _coerce(doc[name], d, f"{path}.{name}") if name in doc else d
    try:
        return dataclasses.replace(base, **kw)
    except SigMdnError as exc:
        raise ConfigError(path, str(exc)) from exc


def _cir(doc: Any, path: str, default: CirParams) -> CirParams:
    doc = _section(doc, path)
    _check_keys(doc, ("a", "b", "c", "x0_range"), path)
    kw = {}
    for k in ("a", "b", "c"):
        kw[k] = _coerce(doc[k], 0.0, f"{path}.{k}") if k in doc else getattr(default, k)
    kw["x0_range"] = _pair(doc.get("x0_range"), default.x0_range, f"{path}.x0_range")
    try:
        return CirParams(**kw)
    except SigMdnError as exc:
        raise ConfigError(path, str(exc)) from exc


def _pair(value, default, path: str) -> tuple[float, float]:
    if value is None:
        return default
    v = _coerce(value, (), path)
    if len(v) != 2 or not v[0] <= v[1]:
        raise ConfigError(path, f"expected [low, high] with low <= high, got {value!r}")
    return (float(v[0]), float(v[1]))


_TOP = (
    "regime", "n_assets", "level", "time_augment", "dt", "cir", "maturity_law", "local_vol",
    "weight_law", "basket_weights", "dataset", "mdn", "train", "evaluation", "seeds",
)


def parse(doc: Any, env: dict | None = None) -> RunConfig:
    """Validate a decoded JSON document; errors name the offending field."""
    env = os.environ if env is None else env
    doc = _section(doc, "$")
    _check_keys(doc, _TOP, "")
    if "regime" not in doc:
        raise ConfigError("regime", "required field is missing")
    regime = doc["regime"]
    if regime not in (TV, LV):
        raise ConfigError("regime", f"must be 'tv' or 'lv', got {regime!r}")
    n_assets = _coerce(doc.get("n_assets", 2), 0, "n_assets")
    if n_assets < 1:
        raise ConfigError("n_assets", "must be at least 1")
    level = _coerce(doc.get("level", 5), 0, "level")
    if level < 1:
        raise ConfigError("level", "must be at least 1")
    time_augment = _coerce(doc.get("time_augment", False), False, "time_augment")
    dt = _coerce(doc.get("dt", DEFAULT_DT), 0.0, "dt")
    if not 0 < dt <= 0.1:
        raise ConfigError("dt", f"must be in (0, 0.1], got {dt}")

    cir = _section(doc.get("cir"), "cir")
    _check_keys(cir, ("rate", "dividend", "volatility"), "cir")
    lv = _section(doc.get("local_vol"), "local_vol")
    _check_keys(lv, ("a_loc_range", "b_loc_range", "c_loc_range"), "local_vol")
    base = ScenarioConfig()
    wl = _build(WeightLaw, doc.get("weight_law"), "weight_law")
    if wl.kind == "fixed" and (wl.value is None or len(wl.value) != n_assets):
        raise ConfigError("weight_law.value", f"needs {n_assets} weights")
    bw = _coerce(doc.get("basket_weights"), None, "basket_weights")
    if bw is not None and len(bw) != n_assets:
        raise ConfigError("basket_weights", f"needs {n_assets} weights")
    try:
        scenario = ScenarioConfig(
            n_assets=n_assets,
            dt=dt,
            cir_rate=_cir(cir.get("rate"), "cir.rate", CIR_RATE),
            cir_dividend=_cir(cir.get("dividend"), "cir.dividend", CIR_DIVIDEND),
            cir_volatility=_cir(cir.get("volatility"), "cir.volatility", CIR_VOLATILITY),
            maturity_law=_build(MaturityLaw, doc.get("maturity_law"), "maturity_law"),
            a_loc_range=_pair(lv.get("a_loc_range"), base.a_loc_range, "local_vol.a_loc_range"),
            b_loc_range=_pair(lv.get("b_loc_range"), base.b_loc_range, "local_vol.b_loc_range"),
            c_loc_range=_pair(lv.get("c_loc_range"), base.c_loc_range, "local_vol.c_loc_range"),
            weight_law=wl,
            basket_weights=bw,
        )
        scenario.tv_weights()
    except ConfigError:
        raise
    except SigMdnError as exc:
        raise ConfigError("scenario", str(exc)) from exc
    ml = scenario.maturity_law
    if ml.kind not in ("mixture", "fixed"):
        raise ConfigError("maturity_law.kind", f"unknown law {ml.kind!r}")
    if wl.kind not in ("dirichlet", "fixed"):
        raise ConfigError("weight_law.kind", f"unknown law {wl.kind!r}")

    sizes = _build(DatasetSizes, doc.get("dataset"), "dataset")
    for k in ("n1", "n2", "M", "threads"):
        if getattr(sizes, k) < 1:
            raise ConfigError(f"dataset.{k}", "must be at least 1")
    if sizes.validation_n1 < 0:
        raise ConfigError("dataset.validation_n1", "must be nonnegative")

    mdn_doc = _section(doc.get("mdn"), "mdn")
    mdn_defaults = MdnConfig(1, mu_activation="tanh" if regime == TV else "identity")
    mdn = _build(MdnConfig, mdn_doc, "mdn", defaults=mdn_defaults, skip=("input_dim",))
    mdn_kw = {k: getattr(mdn, k) for k in mdn_doc}

    train = _build(TrainConfig, doc.get("train"), "train", skip=("seed",))
    if train.standardize not in ("scale", "affine", "none"):
        raise ConfigError("train.standardize", f"unknown mode {train.standardize!r}")

    ev = _build(EvaluationGrid, doc.get("evaluation"), "evaluation")
    if not ev.strikes or min(ev.strikes) <= 0:
        raise ConfigError("evaluation.strikes", "strikes must be positive")
    if not ev.maturities or min(ev.maturities) <= 0 or max(ev.maturities) > ml.high + 1e-12:
        raise ConfigError("evaluation.maturities", "maturities must lie in (0, 1.05]")
    if ev.mc_paths < 2:
        raise ConfigError("evaluation.mc_paths", "must be at least 2")

    seeds = _build(Seeds, doc.get("seeds"), "seeds")
    if min(seeds.data, seeds.train, seeds.eval) < 0:
        raise ConfigError("seeds", "seeds must be nonnegative")
    if env.get(SEED_ENV):
        s = _env_int(env, SEED_ENV, 0)
        seeds = Seeds(s, s, s)
    if env.get(THREADS_ENV):
        sizes = dataclasses.replace(sizes, threads=_env_int(env, THREADS_ENV, 1))

    return RunConfig(regime, scenario, level, time_augment, sizes, mdn_kw, train, ev, seeds)


def _env_int(env, name: str, minimum: int) -> int:
    try:
        v = int(env[name])
    except ValueError:
        raise ConfigError(name, f"expected an integer, got {env[name]!r}") from None
    if v < minimum:
        raise ConfigError(name, f"must be at least {minimum}")
    return v


def load(path, env: dict | None = None) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    return parse(doc, env)


def default_document(regime: str) -> dict:
    """The full config with every default, as written by ``sigmdn init-config``."""
    return parse({"regime": regime}, env={}).to_dict()
