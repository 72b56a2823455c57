"""Forward-pass building blocks: embeddings, cross-attention, gradient
reversal, predictor input assembly, and the stacked attention/conv predictor.

Everything here is a pure function of ndarrays and immutable parameter
containers; there is no training loop, only verifiable numerics.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ParameterError, SchemaError
from ..interp import resample_linear

DEFAULT_DIM = 256


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - np.max(x, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=axis, keepdims=True)


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * gain + bias


def _as_matrix(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError(f"{name} must be a 2-D matrix, got {x.ndim} dims")
    return x


def embed_units(units, table) -> np.ndarray:
    """Look up one embedding row per unit index."""
    units = np.asarray(units, dtype=np.int64)
    table = _as_matrix(table, "embedding table")
    if units.ndim != 1:
        raise ParameterError("units must be a 1-D integer sequence")
    if units.size and (units.min() < 0 or units.max() >= table.shape[0]):
        raise IndexError(
            f"unit index out of range for table with {table.shape[0]} rows"
        )
    if units.size == 0:
        return np.empty((0, table.shape[1]))
    return table[units]


@dataclass(frozen=True)
class AttentionParams:
    """Single-head attention projections, all D x D."""

    w_query: np.ndarray
    w_key: np.ndarray
    w_value: np.ndarray
    w_out: np.ndarray

    def __post_init__(self):
        mats = {}
        dim = None
        for name in ("w_query", "w_key", "w_value", "w_out"):
            m = _as_matrix(getattr(self, name), name)
            if m.shape[0] != m.shape[1]:
                raise ParameterError(f"{name} must be square, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ParameterError(f"{name} must be finite")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise ParameterError("all attention projections must share one dimension")
            mats[name] = m
        for name, m in mats.items():
            object.__setattr__(self, name, m)

    @property
    def dim(self) -> int:
        return self.w_query.shape[0]

    @classmethod
    def identity(cls, dim: int = DEFAULT_DIM) -> "AttentionParams":
        eye = np.eye(dim)
        return cls(eye, eye.copy(), eye.copy(), eye.copy())

    @classmethod
    def random(cls, dim: int, rng) -> "AttentionParams":
        scale = 1.0 / np.sqrt(dim)
        return cls(*(rng.normal(0.0, scale, size=(dim, dim)) for _ in range(4)))

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist()
                for name in ("w_query", "w_key", "w_value", "w_out")}

    @classmethod
    def from_dict(cls, payload: dict) -> "AttentionParams":
        return cls(*(np.asarray(payload[name], dtype=np.float64)
                     for name in ("w_query", "w_key", "w_value", "w_out")))


def cross_attention(q_in, kv_in, params: AttentionParams, return_weights: bool = False):
    """Scaled dot-product attention with q_in as queries, kv_in as keys and values.

    Output has q_in's row count; each attention row is a probability simplex.
    """
    q_in = _as_matrix(q_in, "query input")
    kv_in = _as_matrix(kv_in, "key/value input")
    if q_in.shape[1] != params.dim or kv_in.shape[1] != params.dim:
        raise ParameterError(
            f"inputs must have dim {params.dim}, got {q_in.shape[1]} and {kv_in.shape[1]}"
        )
    if kv_in.shape[0] == 0:
        raise ParameterError("key/value sequence must be non-empty")
    q = q_in @ params.w_query
    k = kv_in @ params.w_key
    v = kv_in @ params.w_value
    weights = softmax(q @ k.T / np.sqrt(params.dim), axis=1)
    out = (weights @ v) @ params.w_out
    if return_weights:
        return out, weights
    return out


def grl_forward(x) -> np.ndarray:
    """Gradient reversal forward pass: identity on values."""
    return np.asarray(x, dtype=np.float64)


def grl_backward(upstream, lam: float = 1.0, forward_shape=None) -> np.ndarray:
    """Gradient reversal backward pass: negate and scale the upstream gradient."""
    upstream = np.asarray(upstream, dtype=np.float64)
    if forward_shape is not None and tuple(forward_shape) != upstream.shape:
        raise ParameterError(
            f"upstream gradient shape {upstream.shape} does not match forward shape {tuple(forward_shape)}"
        )
    return -lam * upstream


def projection_block(x, weight, bias, activation: str = "tanh") -> np.ndarray:
    """Linear map plus pointwise nonlinearity (applied after cross-attention)."""
    x = _as_matrix(x, "projection input")
    h = x @ np.asarray(weight, dtype=np.float64) + np.asarray(bias, dtype=np.float64)
    if activation == "tanh":
        return np.tanh(h)
    if activation == "relu":
        return np.maximum(h, 0.0)
    if activation == "identity":
        return h
    raise ParameterError(f"unknown activation {activation!r}")


@dataclass(frozen=True)
class FeInputParams:
    """Scalar-to-embedding projections for F0/energy plus the 2-row VUV table."""

    f0_weight: np.ndarray
    f0_bias: np.ndarray
    energy_weight: np.ndarray
    energy_bias: np.ndarray
    vuv_table: np.ndarray

    def __post_init__(self):
        vecs = {name: np.asarray(getattr(self, name), dtype=np.float64)
                for name in ("f0_weight", "f0_bias", "energy_weight", "energy_bias")}
        table = np.asarray(self.vuv_table, dtype=np.float64)
        dim = vecs["f0_weight"].shape[-1] if vecs["f0_weight"].ndim else 0
        for name, v in vecs.items():
            if v.ndim != 1 or v.shape[0] != dim:
                raise ParameterError(f"{name} must be a length-{dim} vector")
            object.__setattr__(self, name, v)
        if table.shape != (2, dim):
            raise ParameterError(f"vuv_table must be 2 x {dim}, got {table.shape}")
        object.__setattr__(self, "vuv_table", table)

    @property
    def dim(self) -> int:
        return self.f0_weight.shape[0]

    @classmethod
    def random(cls, dim: int, rng) -> "FeInputParams":
        scale = 1.0 / np.sqrt(dim)
        return cls(
            rng.normal(0.0, scale, dim),
            np.zeros(dim),
            rng.normal(0.0, scale, dim),
            np.zeros(dim),
            rng.normal(0.0, scale, (2, dim)),
        )

    def to_dict(self) -> dict:
        return {name: getattr(self, name).tolist()
                for name in ("f0_weight", "f0_bias", "energy_weight", "energy_bias", "vuv_table")}

    @classmethod
    def from_dict(cls, payload: dict) -> "FeInputParams":
        return cls(*(np.asarray(payload[name], dtype=np.float64)
                     for name in ("f0_weight", "f0_bias", "energy_weight", "energy_bias", "vuv_table")))


def assemble_fe_input(f0, energy, content, vuv, params: FeInputParams) -> np.ndarray:
    """Sum of projected F0, projected energy, content embeddings, and VUV embeddings.

    F0 and energy may come from a reference of a different length; they are
    linearly resampled to the content length before projection.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    energy = np.asarray(energy, dtype=np.float64)
    content = _as_matrix(content, "content")
    vuv = np.asarray(vuv)
    if f0.ndim != 1 or f0.size == 0 or f0.shape != energy.shape:
        raise ParameterError("f0 and energy must be non-empty 1-D contours of equal length")
    if content.shape[0] == 0:
        raise ParameterError("content must be non-empty")
    if content.shape[1] != params.dim:
        raise ParameterError(f"content dim {content.shape[1]} does not match params dim {params.dim}")
    if vuv.shape != (content.shape[0],):
        raise ParameterError("vuv mask length must match the content length")
    vuv = vuv.astype(np.int64)
    if vuv.size and (vuv.min() < 0 or vuv.max() > 1):
        raise ParameterError("vuv entries must be 0 or 1")
    target_len = content.shape[0]
    if f0.size != target_len:
        f0 = resample_linear(f0, target_len)
        energy = resample_linear(energy, target_len)
    f0_emb = f0[:, None] * params.f0_weight + params.f0_bias
    energy_emb = energy[:, None] * params.energy_weight + params.energy_bias
    return f0_emb + energy_emb + content + params.vuv_table[vuv]


@dataclass(frozen=True)
class DurationInputParams:
    """Scalar-to-embedding projection for the smoothed duration contour."""

    dur_weight: np.ndarray
    dur_bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.dur_weight, dtype=np.float64)
        b = np.asarray(self.dur_bias, dtype=np.float64)
        if w.ndim != 1 or b.shape != w.shape:
            raise ParameterError("dur_weight and dur_bias must be equal-length vectors")
        object.__setattr__(self, "dur_weight", w)
        object.__setattr__(self, "dur_bias", b)

    @property
    def dim(self) -> int:
        return self.dur_weight.shape[0]

    @classmethod
    def random(cls, dim: int, rng) -> "DurationInputParams":
        return cls(rng.normal(0.0, 1.0 / np.sqrt(dim), dim), np.zeros(dim))

    def to_dict(self) -> dict:
        return {"dur_weight": self.dur_weight.tolist(), "dur_bias": self.dur_bias.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "DurationInputParams":
        return cls(np.asarray(payload["dur_weight"], dtype=np.float64),
                   np.asarray(payload["dur_bias"], dtype=np.float64))


def assemble_duration_input(unit_embeddings, dur_smooth, emotion, params: DurationInputParams) -> np.ndarray:
    """Additive duration-predictor input: unique-unit embeddings + projected
    smoothed durations (resampled to the unit count) + mean-pooled emotion
    embedding broadcast across positions."""
    unit_embeddings = _as_matrix(unit_embeddings, "unit embeddings")
    emotion = _as_matrix(emotion, "emotion embeddings")
    dur_smooth = np.asarray(dur_smooth, dtype=np.float64)
    if unit_embeddings.shape[0] == 0 or emotion.shape[0] == 0 or dur_smooth.size == 0:
        raise ParameterError("inputs must be non-empty")
    if unit_embeddings.shape[1] != params.dim or emotion.shape[1] != params.dim:
        raise ParameterError("embedding dims must match params dim")
    durations = resample_linear(dur_smooth, unit_embeddings.shape[0])
    dur_emb = durations[:, None] * params.dur_weight + params.dur_bias
    return unit_embeddings + dur_emb + emotion.mean(axis=0)


def conv1d_same(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Length-preserving 1-D convolution over the time axis.

    x is T x C_in, weight is C_out x C_in x K (K odd), bias is C_out.
    """
    k = weight.shape[2]
    if k % 2 == 0:
        raise ParameterError("convolution kernel width must be odd")
    pad = k // 2
    padded = np.pad(x, ((pad, pad), (0, 0)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, k, axis=0)
    return np.einsum("tck,ock->to", windows, weight) + bias


@dataclass(frozen=True)
class PredictorBlockParams:
    """One block: self-attention sublayer + two-conv sublayer, each with
    residual connection and layer normalization."""

    attn: AttentionParams
    conv1_weight: np.ndarray  # channels x dim x kernel
    conv1_bias: np.ndarray
    conv2_weight: np.ndarray  # dim x channels x kernel
    conv2_bias: np.ndarray
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray

    def __post_init__(self):
        dim = self.attn.dim
        c1 = np.asarray(self.conv1_weight, dtype=np.float64)
        c2 = np.asarray(self.conv2_weight, dtype=np.float64)
        if c1.ndim != 3 or c1.shape[1] != dim:
            raise ParameterError("conv1_weight must be channels x dim x kernel")
        channels = c1.shape[0]
        if c2.shape != (dim, channels, c1.shape[2]):
            raise ParameterError("conv2_weight must be dim x channels x kernel")
        object.__setattr__(self, "conv1_weight", c1)
        object.__setattr__(self, "conv2_weight", c2)
        for name, length in (("conv1_bias", channels), ("conv2_bias", dim),
                             ("ln1_gain", dim), ("ln1_bias", dim),
                             ("ln2_gain", dim), ("ln2_bias", dim)):
            v = np.asarray(getattr(self, name), dtype=np.float64)
            if v.shape != (length,):
                raise ParameterError(f"{name} must have length {length}")
            object.__setattr__(self, name, v)

    def to_dict(self) -> dict:
        payload = {"attn": self.attn.to_dict()}
        for name in ("conv1_weight", "conv1_bias", "conv2_weight", "conv2_bias",
                     "ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias"):
            payload[name] = getattr(self, name).tolist()
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "PredictorBlockParams":
        return cls(AttentionParams.from_dict(payload["attn"]),
                   *(np.asarray(payload[name], dtype=np.float64)
                     for name in ("conv1_weight", "conv1_bias", "conv2_weight", "conv2_bias",
                                  "ln1_gain", "ln1_bias", "ln2_gain", "ln2_bias")))


@dataclass(frozen=True)
class PredictorParams:
    """Stacked predictor blocks plus a scalar output head.

    head "fe" emits (log-F0, energy) contours; head "duration" emits one
    positive contour through softplus.
    """

    blocks: tuple
    head_weight: np.ndarray
    head_bias: np.ndarray
    head: str = "fe"

    def __post_init__(self):
        if self.head not in ("fe", "duration"):
            raise ParameterError(f"head must be 'fe' or 'duration', got {self.head!r}")
        blocks = tuple(self.blocks)
        if not blocks:
            raise ParameterError("need at least one predictor block")
        dim = blocks[0].attn.dim
        n_out = 2 if self.head == "fe" else 1
        w = np.asarray(self.head_weight, dtype=np.float64)
        b = np.asarray(self.head_bias, dtype=np.float64)
        if w.shape != (dim, n_out) or b.shape != (n_out,):
            raise ParameterError(f"head expects weight {dim}x{n_out} and bias {n_out}")
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "head_weight", w)
        object.__setattr__(self, "head_bias", b)

    @property
    def dim(self) -> int:
        return self.blocks[0].attn.dim

    def to_dict(self) -> dict:
        return {
            "blocks": [block.to_dict() for block in self.blocks],
            "head_weight": self.head_weight.tolist(),
            "head_bias": self.head_bias.tolist(),
            "head": self.head,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "PredictorParams":
        return cls(
            tuple(PredictorBlockParams.from_dict(b) for b in payload["blocks"]),
            np.asarray(payload["head_weight"], dtype=np.float64),
            np.asarray(payload["head_bias"], dtype=np.float64),
            payload["head"],
        )


def random_predictor_params(dim: int, head: str, rng, n_blocks: int = 2,
                            kernel: int = 3, channels: int | None = None) -> PredictorParams:
    """Gaussian-initialized predictor parameters (scale 1/sqrt(fan-in))."""
    channels = dim if channels is None else channels
    blocks = []
    for _ in range(n_blocks):
        blocks.append(PredictorBlockParams(
            attn=AttentionParams.random(dim, rng),
            conv1_weight=rng.normal(0.0, 1.0 / np.sqrt(dim * kernel), (channels, dim, kernel)),
            conv1_bias=np.zeros(channels),
            conv2_weight=rng.normal(0.0, 1.0 / np.sqrt(channels * kernel), (dim, channels, kernel)),
            conv2_bias=np.zeros(dim),
            ln1_gain=np.ones(dim), ln1_bias=np.zeros(dim),
            ln2_gain=np.ones(dim), ln2_bias=np.zeros(dim),
        ))
    n_out = 2 if head == "fe" else 1
    return PredictorParams(
        blocks=tuple(blocks),
        head_weight=rng.normal(0.0, 1.0 / np.sqrt(dim), (dim, n_out)),
        head_bias=np.zeros(n_out),
        head=head,
    )


def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def predictor_forward(x, params: PredictorParams):
    """Length-preserving forward pass through the stacked blocks and head.

    Returns (log_f0, energy) contours for the "fe" head, or one positive
    duration contour for the "duration" head.
    """
    x = _as_matrix(x, "predictor input")
    if x.shape[0] == 0:
        raise ParameterError("predictor input must be non-empty")
    if x.shape[1] != params.dim:
        raise ParameterError(f"input dim {x.shape[1]} does not match params dim {params.dim}")
    for block in params.blocks:
        attended = cross_attention(x, x, block.attn)
        x = layer_norm(x + attended, block.ln1_gain, block.ln1_bias)
        hidden = np.maximum(conv1d_same(x, block.conv1_weight, block.conv1_bias), 0.0)
        x = layer_norm(x + conv1d_same(hidden, block.conv2_weight, block.conv2_bias),
                       block.ln2_gain, block.ln2_bias)
    out = x @ params.head_weight + params.head_bias
    if params.head == "fe":
        return out[:, 0].copy(), out[:, 1].copy()
    return softplus(out[:, 0])


def save_params(path, params) -> None:
    """Serialize a parameter container to JSON."""
    kinds = {AttentionParams: "attention", FeInputParams: "fe_input",
             DurationInputParams: "duration_input", PredictorParams: "predictor"}
    kind = kinds.get(type(params))
    if kind is None:
        raise ParameterError(f"cannot serialize {type(params).__name__}")
    Path(path).write_text(json.dumps({"kind": kind, **params.to_dict()}, sort_keys=True) + "\n")


def load_params(path):
    """Load a parameter container previously written by save_params."""
    payload = json.loads(Path(path).read_text())
    loaders = {"attention": AttentionParams, "fe_input": FeInputParams,
               "duration_input": DurationInputParams, "predictor": PredictorParams}
    kind = payload.get("kind")
    if kind not in loaders:
        raise SchemaError(f"{path}: unknown parameter kind {kind!r}")
    return loaders[kind].from_dict(payload)
