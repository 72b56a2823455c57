"""Neural numerics: pure-ndarray forward passes and losses with gradients."""

from .layers import (
    AttentionParams,
    DurationInputParams,
    FeInputParams,
    PredictorBlockParams,
    PredictorParams,
    assemble_duration_input,
    assemble_fe_input,
    conv1d_same,
    cross_attention,
    embed_units,
    grl_backward,
    grl_forward,
    layer_norm,
    load_params,
    predictor_forward,
    projection_block,
    random_predictor_params,
    save_params,
    softmax,
    softplus,
)
from .losses import (
    DEFAULT_LOSS_WEIGHTS,
    TRIPLET_MARGIN,
    LossValue,
    assemble_total_losses,
    cosine_similarity,
    cross_entropy,
    loss_prosody,
    loss_triplet,
    mel_reconstruction_loss,
)

__all__ = [
    "AttentionParams",
    "DurationInputParams",
    "FeInputParams",
    "PredictorBlockParams",
    "PredictorParams",
    "assemble_duration_input",
    "assemble_fe_input",
    "conv1d_same",
    "cross_attention",
    "embed_units",
    "grl_backward",
    "grl_forward",
    "layer_norm",
    "load_params",
    "predictor_forward",
    "projection_block",
    "random_predictor_params",
    "save_params",
    "softmax",
    "softplus",
    "DEFAULT_LOSS_WEIGHTS",
    "TRIPLET_MARGIN",
    "LossValue",
    "assemble_total_losses",
    "cosine_similarity",
    "cross_entropy",
    "loss_prosody",
    "loss_triplet",
    "mel_reconstruction_loss",
]
