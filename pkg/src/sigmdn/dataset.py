"""Training-set generation and the ``MDNSET1`` binary format.

Binary layout (little-endian)::

    b"MDNSET1\\0"                 8-byte magic
    uint32 version, regime (0 = tv, 1 = lv), n_assets, level, M,
           feature_dim, flags (bit 0: time-augmented signatures), reserved
    uint64 record count
    32 bytes SHA-256 digest of the generation config
    float32 records, each feature_dim features followed by M targets

A JSON manifest with the full generation config is written next to the file.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import rng as streams
from .errors import FormatError, InvalidInputError, NumericError, SigMdnError
from .features import LV, TV, FeatureLayout, FeatureVector, assemble_lv, assemble_tv, make_layout
from .signature import DEFAULT_LEVEL
from .stochastic import (
    ScenarioConfig,
    log_basket_return,
    log_terminal_lv,
    log_terminal_tv,
    sample_scenarios,
)

MAGIC = b"MDNSET1\x00"
VERSION = 1
_HEADER = struct.Struct("<8IQ32s")
_REGIME_CODE = {TV: 0, LV: 1}
_STACK = 256  # scenarios simulated together


@dataclass(frozen=True, eq=False)
class TrainingRecord:
    x: FeatureVector
    y: np.ndarray


@dataclass(eq=False)
class Dataset:
    layout: FeatureLayout
    x: np.ndarray  # (n, feature_dim) float32
    y: np.ndarray  # (n, M) float32
    digest: bytes = b"\x00" * 32

    def __post_init__(self):
        if self.x.ndim != 2 or self.y.ndim != 2 or self.x.shape[0] != self.y.shape[0]:
            raise InvalidInputError("x and y must be 2-D with matching record counts")
        if self.x.shape[1] != self.layout.dim:
            raise InvalidInputError("feature width does not match the layout")

    @property
    def regime(self) -> str:
        return self.layout.regime

    @property
    def n_targets(self) -> int:
        return self.y.shape[1]

    def __len__(self) -> int:
        return self.x.shape[0]

    def records(self) -> Iterator[TrainingRecord]:
        for i in range(len(self)):
            yield TrainingRecord(FeatureVector(self.x[i].astype(np.float64), self.layout), self.y[i])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.layout == other.layout
            and self.digest == other.digest
            and self.x.tobytes() == other.x.tobytes()
            and self.y.tobytes() == other.y.tobytes()
        )


def config_digest(payload: dict) -> bytes:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=list).encode()).digest()


def generation_payload(regime, n1, n2, M, config: ScenarioConfig, seed, level, time_augment, domain) -> dict:
    return {
        "regime": regime, "n1": n1, "n2": n2, "M": M, "seed": seed, "level": level,
        "time_augment": time_augment, "domain": domain,
        "scenario": dataclasses.asdict(config),
    }


def _group(regime, i, T, n2, M, config, seed, level, time_augment, offset):
    assemble = assemble_tv if regime == TV else assemble_lv
    evolve = log_terminal_tv if regime == TV else log_terminal_lv
    N = config.n_assets
    xs, ys = [], []
    for a in range(0, n2, _STACK):
        ms = range(a, min(n2, a + _STACK))
        rngs = [streams.stream(seed, streams.SCENARIO + offset, i, m) for m in ms]
        try:
            scens = sample_scenarios(config, rngs, T, regime)
        except SigMdnError as exc:
            raise type(exc)(f"maturity group i={i}, records m={a}..{ms[-1]}: {exc}") from exc
        normals = [
            streams.stream(seed, streams.PATHS + offset, i, m).standard_normal((s.r.n_steps, M, N))
            for s, m in zip(scens, ms)
        ]
        logs = evolve(scens, iter([np.stack(normals)]))  # (S, M, N)
        for s, m, lg in zip(scens, ms, logs):
            w = config.tv_weights() if regime == TV else s.weights
            try:
                y = log_basket_return(np.exp(lg), w)
            except SigMdnError as exc:
                raise NumericError(f"record (i={i}, m={m}): {exc}") from exc
            if not np.all(np.isfinite(y)):
                raise NumericError(f"record (i={i}, m={m}): non-finite target")
            xs.append(assemble(s, level, time_augment=time_augment).values)
            ys.append(y)
    return np.asarray(xs, dtype=np.float32), np.asarray(ys, dtype=np.float32)


def generate(
    regime: str,
    n1: int,
    n2: int,
    M: int,
    config: ScenarioConfig,
    seed: int,
    level: int = DEFAULT_LEVEL,
    time_augment: bool = False,
    threads: int = 1,
    validation: bool = False,
) -> Dataset:
    """Sample ``n1`` maturities, ``n2`` scenarios per maturity and ``M`` targets per scenario.

    Every scenario draws from its own keyed stream, so the result is identical
    for any thread count.  ``validation=True`` switches to a disjoint stream
    domain.
    """
    if min(n1, n2, M) < 1:
        raise InvalidInputError("n1, n2 and M must all be at least 1")
    if regime not in (TV, LV):
        raise InvalidInputError(f"unknown regime {regime!r}")
    offset = streams.VALIDATION_OFFSET if validation else 0
    layout = make_layout(regime, config.n_assets, level, time_augment)
    mats = config.maturity_law.sample(n1, streams.stream(seed, streams.MATURITY + offset))
    args = [(regime, i, float(T), n2, M, config, seed, level, time_augment, offset) for i, T in enumerate(mats)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda a: _group(*a), args))
    else:
        parts = [_group(*a) for a in args]
    x = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    payload = generation_payload(regime, n1, n2, M, config, seed, level, time_augment, "validation" if validation else "train")
    return Dataset(layout, x, y, config_digest(payload))


def generate_tv(n1, n2, M, config: ScenarioConfig, seed: int, **kw) -> Dataset:
    return generate(TV, n1, n2, M, config, seed, **kw)


def generate_lv(n1, n2, M, config: ScenarioConfig, seed: int, **kw) -> Dataset:
    return generate(LV, n1, n2, M, config, seed, **kw)


# --------------------------------------------------------------------------
# binary I/O
# --------------------------------------------------------------------------


def write(dataset: Dataset, path, manifest: dict | None = None) -> None:
    lay = dataset.layout
    header = _HEADER.pack(
        VERSION, _REGIME_CODE[lay.regime], lay.n_assets, lay.level, dataset.n_targets,
        lay.dim, int(lay.time_augment), 0, len(dataset), dataset.digest,
    )
    body = np.concatenate([dataset.x, dataset.y], axis=1).astype("<f4", copy=False)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(np.ascontiguousarray(body).tobytes())
    if manifest is not None:
        doc = dict(manifest)
        doc["digest"] = dataset.digest.hex()
        doc["records"] = len(dataset)
        doc["layout"] = lay.to_dict()
        Path(manifest_path(path)).write_text(json.dumps(doc, indent=2, sort_keys=True, default=list) + "\n")


def manifest_path(path) -> str:
    return str(path) + ".json"


def read(path) -> Dataset:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        raise FormatError("magic", f"{path} is not an MDNSET1 file")
    if len(data) < len(MAGIC) + _HEADER.size:
        raise FormatError("header", "file truncated inside the header")
    (version, regime_code, n_assets, level, M, dim, flags, _, count, digest) = _HEADER.unpack_from(
        data, len(MAGIC)
    )
    if version != VERSION:
        raise FormatError("version", f"unsupported dataset version {version}")
    regimes = {v: k for k, v in _REGIME_CODE.items()}
    if regime_code not in regimes:
        raise FormatError("regime", f"unknown regime code {regime_code}")
    if n_assets < 1 or level < 1 or M < 1:
        raise FormatError("header", "n_assets, level and M must be positive")
    if count == 0:
        raise FormatError("count", "dataset has no records")
    layout = make_layout(regimes[regime_code], n_assets, level, bool(flags & 1))
    if dim != layout.dim:
        raise FormatError(
            "feature_dim",
            f"header claims {dim} but regime {layout.regime}/N={n_assets}/l={level} implies {layout.dim}",
        )
    start = len(MAGIC) + _HEADER.size
    width = dim + M
    expected = start + 4 * width * count
    if len(data) < expected:
        raise FormatError("records", f"file truncated: {len(data)} bytes, expected {expected}")
    if len(data) > expected:
        raise FormatError("records", "trailing bytes after the last record")
    body = np.frombuffer(data, dtype="<f4", offset=start).reshape(count, width)
    x = np.ascontiguousarray(body[:, :dim], dtype=np.float32)
    y = np.ascontiguousarray(body[:, dim:], dtype=np.float32)
    return Dataset(layout, x, y, digest)
