"""Scenario files for pricing and evaluation.

A scenario is a JSON scalar block plus a CSV of daily paths::

    {
      "id": "demo",                       optional, default "0"
      "regime": "tv" | "lv",
      "n_assets": 2,
      "dt": 0.003968...,                  optional, default 1/252
      "maturities": [0.25, 0.5],          or "maturity": 1.0; default: path horizon
      "correlation": [[1, -0.7], [-0.7, 1]],   exactly one of correlation,
      "cholesky": [[1, 0], [..., ...]],         cholesky or angles
      "angles": [2.35],
      "local_vol": [{"a_loc": 1.1, "b_loc": 0.26, "c_loc": 0.08}, ...],   lv only
      "weights": [0.5, 0.5],              lv: required; tv: optional basket weights
      "paths_csv": "paths.csv"            relative to the JSON file
    }

The CSV has a header ``day,r,q_1..q_N`` followed, in the tv regime, by
``sigma_1..sigma_N``.  Day indices run ``0, 1, ..., n`` and the paths cover
``[0, n dt]``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, SigMdnError
from .features import LV, TV
from .stochastic import (
    DEFAULT_DT,
    CholeskyFactor,
    GbmScenarioLV,
    GbmScenarioTV,
    LocalVolParams,
    RatePath,
    cholesky_from_angles,
)

_KEYS = (
    "id", "regime", "n_assets", "dt", "maturity", "maturities", "correlation", "cholesky",
    "angles", "local_vol", "weights", "paths_csv",
)


@dataclass(frozen=True)
class ScenarioFile:
    scenario_id: str
    scenario: GbmScenarioTV | GbmScenarioLV  # over the full path horizon
    maturities: tuple[float, ...]
    weights: np.ndarray | None  # basket weights; None means equal (tv)

    @property
    def regime(self) -> str:
        return TV if isinstance(self.scenario, GbmScenarioTV) else LV


def _numbers(value, path: str, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(path, f"expected numbers, got {value!r}") from None
    if shape is not None and arr.shape != shape:
        raise ConfigError(path, f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(path, "values must be finite")
    return arr


def read_paths_csv(path, n_assets: int, with_sigma: bool, dt: float):
    """Return ``(r, q, sigma)`` rate paths from a daily CSV."""
    cols = ["day", "r"] + [f"q_{j + 1}" for j in range(n_assets)]
    if with_sigma:
        cols += [f"sigma_{j + 1}" for j in range(n_assets)]
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except FileNotFoundError:
        raise ConfigError("paths_csv", f"file not found: {path}") from None
    if not rows or [c.strip() for c in rows[0]] != cols:
        raise ConfigError("paths_csv", f"header must be {','.join(cols)}")
    body = [r for r in rows[1:] if r]
    try:
        data = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise ConfigError("paths_csv", f"non-numeric cell: {exc}") from None
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(cols):
        raise ConfigError("paths_csv", f"need at least 2 rows of {len(cols)} columns")
    if not np.array_equal(data[:, 0], np.arange(data.shape[0])):
        raise ConfigError("paths_csv.day", "day indices must run 0, 1, ..., n")
    try:
        r = RatePath(dt, data[:, 1])
        q = tuple(RatePath(dt, data[:, 2 + j]) for j in range(n_assets))
        sig = tuple(RatePath(dt, data[:, 2 + n_assets + j]) for j in range(n_assets)) if with_sigma else ()
    except SigMdnError as exc:
        raise ConfigError("paths_csv", str(exc)) from exc
    return r, q, sig


def _chol(doc: dict, n: int) -> CholeskyFactor:
    given = [k for k in ("correlation", "cholesky", "angles") if k in doc]
    if len(given) != 1:
        raise ConfigError("correlation", "give exactly one of correlation, cholesky, angles")
    key = given[0]
    try:
        if key == "correlation":
            return CholeskyFactor.from_correlation(_numbers(doc[key], key, (n, n)))
        if key == "cholesky":
            return CholeskyFactor(_numbers(doc[key], key, (n, n)))
        return cholesky_from_angles(_numbers(doc[key], key, (n * (n - 1) // 2,)))
    except SigMdnError as exc:
        raise ConfigError(key, str(exc)) from exc


def load_scenario(path, regime: str | None = None) -> ScenarioFile:
    """Parse a scenario JSON file and its path CSV.

    ``regime`` (from the model) must agree with the file if given.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(str(path), "file not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("$", "expected an object")
    for k in doc:
        if k not in _KEYS:
            raise ConfigError(k, "unknown key")
    for k in ("regime", "n_assets", "paths_csv"):
        if k not in doc:
            raise ConfigError(k, "required field is missing")
    reg = doc["regime"]
    if reg not in (TV, LV):
        raise ConfigError("regime", f"must be 'tv' or 'lv', got {reg!r}")
    if regime is not None and reg != regime:
        raise ConfigError("regime", f"scenario is {reg} but the model expects {regime}")
    n = doc["n_assets"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("n_assets", "must be a positive integer")
    dt = float(_numbers(doc.get("dt", DEFAULT_DT), "dt", ()))
    if not dt > 0:
        raise ConfigError("dt", "must be positive")
    chol = _chol(doc, n)
    r, q, sig = read_paths_csv(path.parent / doc["paths_csv"], n, reg == TV, dt)
    horizon = r.horizon

    if "maturity" in doc and "maturities" in doc:
        raise ConfigError("maturity", "give maturity or maturities, not both")
    if "maturities" in doc:
        mats = _numbers(doc["maturities"], "maturities")
        if mats.ndim != 1 or mats.size == 0:
            raise ConfigError("maturities", "expected a nonempty list")
    elif "maturity" in doc:
        mats = _numbers([doc["maturity"]], "maturity")
    else:
        mats = np.array([horizon])
    if np.any(mats <= 0) or np.any(mats > horizon + 1e-9):
        raise ConfigError("maturities", f"must lie in (0, {horizon:.6g}] (path horizon)")
    for T in mats:
        k = T / dt
        if abs(k - round(k)) > 1e-6:
            raise ConfigError("maturities", f"T={T} is not a multiple of dt")

    weights = None
    if "weights" in doc:
        weights = _numbers(doc["weights"], "weights", (n,))
        if np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
            raise ConfigError("weights", "must be nonnegative and sum to 1")
        weights = weights / weights.sum()

    try:
        if reg == TV:
            if "local_vol" in doc:
                raise ConfigError("local_vol", "only valid in the lv regime")
            scen = GbmScenarioTV(r, q, sig, chol, horizon)
        else:
            if weights is None:
                raise ConfigError("weights", "required in the lv regime")
            lv = doc.get("local_vol")
            if not isinstance(lv, list) or len(lv) != n:
                raise ConfigError("local_vol", f"expected a list of {n} objects")
            vols = []
            for j, v in enumerate(lv):
                if not isinstance(v, dict) or set(v) != {"a_loc", "b_loc", "c_loc"}:
                    raise ConfigError(f"local_vol[{j}]", "needs exactly a_loc, b_loc, c_loc")
                try:
                    vols.append(LocalVolParams(*(float(v[k]) for k in ("a_loc", "b_loc", "c_loc"))))
                except (TypeError, ValueError, SigMdnError) as exc:
                    raise ConfigError(f"local_vol[{j}]", str(exc)) from None
            scen = GbmScenarioLV(r, q, vols, chol, weights, horizon)
    except ConfigError:
        raise
    except SigMdnError as exc:
        raise ConfigError("scenario", str(exc)) from exc
    sid = str(doc.get("id", "0"))
    return ScenarioFile(sid, scen, tuple(float(T) for T in mats), weights)


def write_scenario(
    path,
    scenario: GbmScenarioTV | GbmScenarioLV,
    maturities=None,
    scenario_id: str = "0",
    weights=None,
) -> None:
    """Write ``scenario`` as ``path`` (JSON) plus ``<stem>.csv`` next to it."""
    path = Path(path)
    csv_path = path.with_suffix(".csv")
    n = scenario.n_assets
    tv = isinstance(scenario, GbmScenarioTV)
    cols = [scenario.r.values] + [p.values for p in scenario.q]
    header = ["day", "r"] + [f"q_{j + 1}" for j in range(n)]
    if tv:
        cols += [p.values for p in scenario.sigma]
        header += [f"sigma_{j + 1}" for j in range(n)]
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for i, row in enumerate(zip(*cols)):
            out.writerow([i] + [repr(float(v)) for v in row])
    doc = {
        "id": scenario_id,
        "regime": TV if tv else LV,
        "n_assets": n,
        "dt": scenario.r.dt,
        "maturities": [float(T) for T in (maturities or [scenario.maturity])],
        "cholesky": scenario.chol.entries.tolist(),
        "paths_csv": csv_path.name,
    }
    if tv:
        if weights is not None:
            doc["weights"] = [float(w) for w in weights]
    else:
        doc["local_vol"] = [{"a_loc": v.a_loc, "b_loc": v.b_loc, "c_loc": v.c_loc} for v in scenario.vol]
        doc["weights"] = scenario.weights.tolist()
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
