"""Mixture density network: model, optimizer, training and serialization."""

from .model import FeatureScaler, MdnModel, load_model, save_model
from .network import (
    MdnConfig,
    MdnParams,
    MixtureParams,
    forward,
    forward_batch,
    gradients,
    init_params,
    mixture_logpdf,
    nll_batch,
    zero_params,
)
from .optim import AdamWHyper, AdamWState, PlateauScheduler, adamw_step
from .train import Checkpoint, EpochRecord, TrainConfig, TrainResult, load_checkpoint, save_checkpoint, train

__all__ = [
    "AdamWHyper", "AdamWState", "Checkpoint", "EpochRecord", "FeatureScaler", "MdnConfig",
    "MdnModel", "MdnParams", "MixtureParams", "PlateauScheduler", "TrainConfig", "TrainResult",
    "adamw_step", "forward", "forward_batch", "gradients", "init_params", "load_checkpoint",
    "load_model", "mixture_logpdf", "nll_batch", "save_checkpoint", "save_model", "train",
    "zero_params",
]
