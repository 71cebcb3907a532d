"""Mini-batch maximum-likelihood training loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .. import rng as streams
from ..errors import InvalidInputError, NumericError, TrainingError
from ..features import FeatureLayout
from .model import (
    FeatureScaler,
    MdnModel,
    model_arrays,
    model_from,
    model_header,
    param_arrays,
    params_from,
    read_container,
    write_container,
)
from .network import MdnConfig, MdnParams, gradients, init_params, nll_batch
from .optim import AdamWHyper, AdamWState, PlateauScheduler, adamw_step

log = logging.getLogger(__name__)

_EVAL_CHUNK = 8192


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    batch_size: int = 100_000
    weight_decay: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    patience: int = 3
    decay_factor: float = 0.5
    min_delta: float = 1e-4
    min_lr: float = 1e-5
    epochs: int = 100
    validation_fraction: float = 0.2
    seed: int = 0
    standardize: str = "scale"

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be at least 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be nonnegative")
        if not 0 <= self.validation_fraction < 1:
            raise InvalidInputError("validation_fraction must be in [0, 1)")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float


@dataclass(eq=False)
class Checkpoint:
    """Everything needed to continue training exactly where it stopped."""

    model: MdnModel
    best_params: MdnParams
    state: AdamWState
    scheduler: PlateauScheduler
    epochs_done: int
    history: list[EpochRecord] = field(default_factory=list)


@dataclass(eq=False)
class TrainResult:
    model: MdnModel  # best-validation parameters
    history: list[EpochRecord]
    checkpoint: Checkpoint


def mean_nll(params: MdnParams, config: MdnConfig, x: np.ndarray, y: np.ndarray) -> float:
    """Dataset-level NLL evaluated in fixed-size chunks."""
    total = 0.0
    n = x.shape[0]
    for a in range(0, n, _EVAL_CHUNK):
        b = min(n, a + _EVAL_CHUNK)
        total += nll_batch(params, config, x[a:b], y[a:b]) * (b - a)
    return total / n


def _split(x, y, cfg: TrainConfig):
    n = x.shape[0]
    if n == 1:
        return x, y, x, y
    n_val = int(round(n * cfg.validation_fraction))
    if n_val == 0:
        return x, y, x, y
    perm = streams.stream(cfg.seed, streams.SHUFFLE, 0, 1).permutation(n)
    val, tr = np.sort(perm[:n_val]), np.sort(perm[n_val:])
    return x[tr], y[tr], x[val], y[val]


def train(
    x,
    y,
    mdn_config: MdnConfig,
    train_config: TrainConfig,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
    layout: FeatureLayout | None = None,
    resume: Checkpoint | None = None,
    verbose: bool = False,
) -> TrainResult:
    """Fit the network by AdamW on the mean record NLL.

    Without an explicit ``validation`` set a ``validation_fraction`` share of
    the records is held out.  After every epoch the validation loss drives the
    plateau schedule; training stops at the epoch budget or once the learning
    rate falls below ``min_lr``.  The returned model holds the parameters with
    the lowest validation loss.
    """
    cfg = train_config
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise InvalidInputError("training data must be nonempty (n, D) and (n, M) arrays")
    if validation is None:
        x, y, xv, yv = _split(x, y, cfg)
    else:
        xv = np.asarray(validation[0], dtype=np.float64)
        yv = np.asarray(validation[1], dtype=np.float64)

    if resume is None:
        scaler = FeatureScaler.fit(x, cfg.standardize)
        params = init_params(mdn_config, streams.stream(cfg.seed, streams.INIT))
        state = AdamWState.zeros_like(params)
        sched = PlateauScheduler(
            cfg.learning_rate, cfg.decay_factor, cfg.patience, cfg.min_delta, cfg.min_lr
        )
        best = params.copy()
        history: list[EpochRecord] = []
        start = 0
    else:
        scaler = resume.model.scaler
        params = resume.model.params.copy()
        state = resume.state.copy()
        sched = PlateauScheduler(**vars(resume.scheduler))
        sched.reductions = list(resume.scheduler.reductions)
        best = resume.best_params.copy()
        history = list(resume.history)
        start = resume.epochs_done

    xs = scaler.transform(x)
    xvs = scaler.transform(xv)
    n = xs.shape[0]
    bs = min(cfg.batch_size, n)
    for epoch in range(start, cfg.epochs):
        if sched.exhausted:
            break
        hyper = AdamWHyper(sched.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay)
        perm = streams.stream(cfg.seed, streams.SHUFFLE, epoch + 1).permutation(n)
        total = 0.0
        try:
            for a in range(0, n, bs):
                idx = perm[a : a + bs]
                loss, grads = gradients(params, mdn_config, xs[idx], y[idx])
                state, params = adamw_step(state, params, grads, hyper)
                total += loss * idx.size
            val = mean_nll(params, mdn_config, xvs, yv)
        except NumericError as exc:
            raise TrainingError(f"training diverged: {exc}", epoch + 1) from exc
        train_loss = total / n
        if not (math.isfinite(train_loss) and math.isfinite(val)):
            raise TrainingError("non-finite loss", epoch + 1)
        history.append(EpochRecord(epoch + 1, train_loss, val, hyper.lr))
        if sched.step(val, epoch + 1):
            best = params.copy()
        if verbose:
            log.info("epoch %d train %.6f val %.6f lr %.3g", epoch + 1, train_loss, val, hyper.lr)
    last = MdnModel(mdn_config, params, scaler, layout)
    ckpt = Checkpoint(last, best, state, sched, len(history), history)
    return TrainResult(MdnModel(mdn_config, best, scaler, layout), history, ckpt)


# --------------------------------------------------------------------------
# checkpoint files
# --------------------------------------------------------------------------


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    header = model_header(ckpt.model, kind="checkpoint")
    s = ckpt.scheduler
    header["train_state"] = {
        "step": ckpt.state.step,
        "epochs_done": ckpt.epochs_done,
        "scheduler": {
            "lr": s.lr, "factor": s.factor, "patience": s.patience, "min_delta": s.min_delta,
            "min_lr": s.min_lr, "best": s.best, "lowest": s.lowest, "bad_epochs": s.bad_epochs,
            "reductions": s.reductions,
        },
        "history": [[h.epoch, h.train_loss, h.val_loss, h.lr] for h in ckpt.history],
    }
    arrays = model_arrays(ckpt.model) + param_arrays("best_", ckpt.best_params)
    arrays += [(f"adam_m{i}", a) for i, a in enumerate(ckpt.state.m)]
    arrays += [(f"adam_v{i}", a) for i, a in enumerate(ckpt.state.v)]
    write_container(path, header, arrays)


def load_checkpoint(path) -> Checkpoint:
    header, arrays = read_container(path)
    model = model_from(header, arrays)
    ts = header["train_state"]
    n = len(model.params.arrays())
    state = AdamWState(
        ts["step"], [arrays[f"adam_m{i}"] for i in range(n)], [arrays[f"adam_v{i}"] for i in range(n)]
    )
    sched = PlateauScheduler(**ts["scheduler"])
    history = [EpochRecord(int(e), t, v, lr) for e, t, v, lr in ts["history"]]
    best = params_from("best_", arrays, model.config)
    return Checkpoint(model, best, state, sched, ts["epochs_done"], history)
