"""Trained-model bundle and its binary file format.

File layout (all little-endian)::

    b"SMDN"                 magic
    uint32                  format version
    uint32                  header length in bytes
    header                  UTF-8 JSON: config, layout, scaler mode, array table
    float64[...]            arrays in the order of the header's table

The same container stores training checkpoints, which carry extra arrays
(optimizer moments, best parameters) and scalar training state.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import FormatError, InvalidInputError
from ..features import FeatureLayout, FeatureVector
from .network import MdnConfig, MdnParams, MixtureParams, forward, forward_batch

MAGIC = b"SMDN"
VERSION = 1
SCALER_MODES = ("scale", "affine", "none")


@dataclass(eq=False)
class FeatureScaler:
    """Per-feature transform ``(x - offset) / scale`` fitted on training inputs.

    ``mode="scale"`` divides by the root mean square and keeps the origin
    fixed, so an all-zero (zero-maturity) input stays zero.  This matters
    because the network has no biases: its pre-activations are positively
    homogeneous in the input, and a shifted origin would pin typical
    records to the degenerate output ``(uniform pi, mu = 0, delta = eps0)``.
    """

    mode: str
    offset: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, x: np.ndarray, mode: str = "scale") -> "FeatureScaler":
        if mode not in SCALER_MODES:
            raise InvalidInputError(f"scaler mode must be one of {SCALER_MODES}")
        x = np.asarray(x, dtype=np.float64)
        dim = x.shape[1]
        if mode == "none":
            return cls(mode, np.zeros(dim), np.ones(dim))
        if mode == "affine":
            offset = x.mean(axis=0)
            scale = x.std(axis=0)
        else:
            offset = np.zeros(dim)
            scale = np.sqrt(np.mean(x * x, axis=0))
        scale = np.where(scale > 1e-300, scale, 1.0)
        return cls(mode, offset, scale)

    @classmethod
    def identity(cls, dim: int) -> "FeatureScaler":
        return cls("none", np.zeros(dim), np.ones(dim))

    def transform(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.offset) / self.scale


@dataclass(eq=False)
class MdnModel:
    config: MdnConfig
    params: MdnParams
    scaler: FeatureScaler
    layout: FeatureLayout | None = None

    def mixture(self, x) -> MixtureParams:
        """Mixture for one raw (unscaled) feature vector."""
        if isinstance(x, FeatureVector) and self.layout is not None and x.layout != self.layout:
            raise InvalidInputError("feature layout does not match the model")
        values = getattr(x, "values", x)
        return forward(self.params, self.config, self.scaler.transform(values))

    def mixtures(self, X) -> MixtureParams:
        return forward_batch(self.params, self.config, self.scaler.transform(X))


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def _config_dict(config: MdnConfig) -> dict:
    d = asdict(config)
    d["hidden_sizes"] = list(config.hidden_sizes)
    return d


def write_container(path, header: dict, arrays: list[tuple[str, np.ndarray]]) -> None:
    header = dict(header)
    header["arrays"] = [[name, list(a.shape)] for name, a in arrays]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for _, a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise FormatError("magic", f"{path} is not an SMDN model file")
    version, hlen = struct.unpack_from("<II", data, 4)
    if version != VERSION:
        raise FormatError("version", f"unsupported model format version {version}")
    if 12 + hlen > len(data):
        raise FormatError("header", "file truncated inside the header")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError("header", f"unreadable header: {exc}") from exc
    arrays = {}
    pos = 12 + hlen
    for name, shape in header["arrays"]:
        n = int(np.prod(shape)) if shape else 1
        end = pos + 8 * n
        if end > len(data):
            raise FormatError(name, "file truncated inside array data")
        arrays[name] = np.frombuffer(data, dtype="<f8", count=n, offset=pos).reshape(shape).astype(np.float64)
        pos = end
    if pos != len(data):
        raise FormatError("arrays", "trailing bytes after the last array")
    return header, arrays


def param_arrays(prefix: str, params: MdnParams) -> list[tuple[str, np.ndarray]]:
    out = [(f"{prefix}W{i}", w) for i, w in enumerate(params.weights)]
    if params.biases is not None:
        out += [(f"{prefix}b{i}", b) for i, b in enumerate(params.biases)]
    return out


def params_from(prefix: str, arrays: dict, config: MdnConfig) -> MdnParams:
    n = len(config.layer_shapes)
    try:
        weights = [arrays[f"{prefix}W{i}"] for i in range(n)]
        biases = [arrays[f"{prefix}b{i}"] for i in range(n)] if config.train_biases else None
    except KeyError as exc:
        raise FormatError(str(exc.args[0]), "missing parameter array") from exc
    for w, shape in zip(weights, config.layer_shapes):
        if w.shape != shape:
            raise FormatError("weights", f"shape {w.shape} does not match config {shape}")
    return MdnParams(weights, biases)


def model_header(model: MdnModel, kind: str = "model") -> dict:
    return {
        "kind": kind,
        "config": _config_dict(model.config),
        "layout": None if model.layout is None else model.layout.to_dict(),
        "scaler_mode": model.scaler.mode,
    }


def model_arrays(model: MdnModel) -> list[tuple[str, np.ndarray]]:
    return [("scaler_offset", model.scaler.offset), ("scaler_scale", model.scaler.scale)] + param_arrays(
        "", model.params
    )


def model_from(header: dict, arrays: dict) -> MdnModel:
    try:
        config = MdnConfig(**header["config"])
        layout = None if header.get("layout") is None else FeatureLayout.from_dict(header["layout"])
        scaler = FeatureScaler(header["scaler_mode"], arrays["scaler_offset"], arrays["scaler_scale"])
    except (KeyError, TypeError, InvalidInputError) as exc:
        raise FormatError("header", f"invalid model description: {exc}") from exc
    if layout is not None and layout.dim != config.input_dim:
        raise FormatError("layout", "feature layout dimension differs from input_dim")
    return MdnModel(config, params_from("", arrays, config), scaler, layout)


def save_model(model: MdnModel, path) -> None:
    write_container(path, model_header(model), model_arrays(model))


def load_model(path) -> MdnModel:
    header, arrays = read_container(path)
    return model_from(header, arrays)
