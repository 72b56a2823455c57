"""Loss functions with analytic gradients: prosody L2/L1, cosine triplet,
softmax cross-entropy, mel reconstruction, and weighted total assembly."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateInputError, ParameterError

# the only non-unit default weight; every other loss term defaults to 1
DEFAULT_LOSS_WEIGHTS = {"recon": 45.0}

TRIPLET_MARGIN = 0.3


@dataclass
class LossValue:
    """Scalar loss with analytic gradients keyed by input name."""

    value: float
    gradients: dict = field(default_factory=dict)
    parts: dict | None = None

    def as_report(self) -> dict:
        """JSON-serializable map of named scalars."""
        report = {"value": self.value}
        if self.parts is not None:
            report.update(self.parts)
        return report


def cosine_similarity(u, v) -> float:
    """Cosine of the angle between two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape or u.size == 0:
        raise ParameterError("vectors must be non-empty and of equal length")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        raise DegenerateInputError("cosine similarity undefined for zero vectors")
    return float(np.clip(np.dot(u, v) / (norm_u * norm_v), -1.0, 1.0))


def _cosine_with_grads(a: np.ndarray, b: np.ndarray):
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateInputError("triplet rows must have non-zero norm")
    sim = float(np.dot(a, b) / (norm_a * norm_b))
    grad_a = (b / norm_b - sim * a / norm_a) / norm_a
    grad_b = (a / norm_a - sim * b / norm_b) / norm_b
    return sim, grad_a, grad_b


def _as_contour(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ParameterError(f"{name} must be 1-D")
    return x


def loss_prosody(f0_hat, f0, energy_hat, energy, dur_hat, dur, vuv) -> LossValue:
    """Sum of F0 MSE (voiced frames only), energy MSE, and duration MAE.

    F0 values are compared in whatever domain the caller uses (the FE head
    emits log-F0). When no frame is voiced the F0 term is zero and a warning
    is issued. Gradients are returned for the three predictions.
    """
    f0_hat = _as_contour(f0_hat, "f0_hat")
    f0 = _as_contour(f0, "f0")
    energy_hat = _as_contour(energy_hat, "energy_hat")
    energy = _as_contour(energy, "energy")
    dur_hat = _as_contour(dur_hat, "dur_hat")
    dur = _as_contour(dur, "dur")
    vuv = np.asarray(vuv)
    if f0_hat.shape != f0.shape or vuv.shape != f0.shape:
        raise ParameterError("f0 prediction, target, and vuv mask must share one length")
    if energy_hat.shape != energy.shape or dur_hat.shape != dur.shape:
        raise ParameterError("prediction/target lengths must match")
    if f0.size == 0 or energy.size == 0 or dur.size == 0:
        raise ParameterError("loss inputs must be non-empty")

    mask = vuv.astype(bool)
    n_voiced = int(mask.sum())
    f0_diff = f0_hat - f0
    if n_voiced == 0:
        warnings.warn("no voiced frames: F0 loss term set to 0", stacklevel=2)
        f0_term = 0.0
        grad_f0 = np.zeros_like(f0_hat)
    else:
        f0_term = float(np.mean(f0_diff[mask] ** 2))
        grad_f0 = 2.0 * f0_diff * mask / n_voiced

    energy_diff = energy_hat - energy
    energy_term = float(np.mean(energy_diff**2))
    grad_energy = 2.0 * energy_diff / energy.size

    dur_diff = dur_hat - dur
    dur_term = float(np.mean(np.abs(dur_diff)))
    grad_dur = np.sign(dur_diff) / dur.size

    parts = {"f0": f0_term, "energy": energy_term, "duration": dur_term}
    return LossValue(
        value=f0_term + energy_term + dur_term,
        gradients={"f0": grad_f0, "energy": grad_energy, "duration": grad_dur},
        parts=parts,
    )


def loss_triplet(anchors, positives, negatives, margin: float = TRIPLET_MARGIN) -> LossValue:
    """Cosine triplet hinge: sum_i [sim(a_i, n_i) - sim(a_i, p_i) + margin]_+."""
    anchors = np.asarray(anchors, dtype=np.float64)
    positives = np.asarray(positives, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64)
    if anchors.ndim != 2 or anchors.shape != positives.shape or anchors.shape != negatives.shape:
        raise ParameterError("anchors, positives, negatives must be N x D matrices of equal shape")
    if anchors.shape[0] == 0:
        raise ParameterError("need at least one triplet")
    total = 0.0
    grad_a = np.zeros_like(anchors)
    grad_p = np.zeros_like(positives)
    grad_n = np.zeros_like(negatives)
    for i in range(anchors.shape[0]):
        sim_ap, d_ap_da, d_ap_dp = _cosine_with_grads(anchors[i], positives[i])
        sim_an, d_an_da, d_an_dn = _cosine_with_grads(anchors[i], negatives[i])
        hinge = sim_an - sim_ap + margin
        if hinge > 0:
            total += hinge
            grad_a[i] = d_an_da - d_ap_da
            grad_p[i] = -d_ap_dp
            grad_n[i] = d_an_dn
    return LossValue(
        value=total,
        gradients={"anchors": grad_a, "positives": grad_p, "negatives": grad_n},
    )


def cross_entropy(logits, labels) -> LossValue:
    """Mean softmax cross-entropy over rows; gradient is (softmax - onehot)/N."""
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.ndim != 1 or labels.shape[0] != logits.shape[0]:
        raise ParameterError("logits must be N x C with one label per row")
    n, c = logits.shape
    if n == 0:
        raise ParameterError("need at least one row")
    if labels.min() < 0 or labels.max() >= c:
        raise ParameterError(f"labels must lie in [0, {c})")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_z
    value = float(-log_probs[np.arange(n), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return LossValue(value=value, gradients={"logits": grad})


def mel_reconstruction_loss(pred, target) -> LossValue:
    """Mean absolute error between two mel matrices."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise ParameterError("mel matrices must be non-empty and of equal shape")
    diff = pred - target
    return LossValue(
        value=float(np.mean(np.abs(diff))),
        gradients={"pred": np.sign(diff) / diff.size},
    )


def assemble_total_losses(parts, weights=None) -> LossValue:
    """Weighted sum of named scalar loss terms.

    Parts without an explicit weight default to 1. A weight naming a missing
    part is an error. DEFAULT_LOSS_WEIGHTS holds the configured non-unit
    weights (recon: 45) for callers that want them.
    """
    parts = {name: float(v) for name, v in parts.items()}
    weights = {} if weights is None else dict(weights)
    for name in weights:
        if name not in parts:
            raise ParameterError(f"weight given for missing part {name!r}")
    applied = {name: float(weights.get(name, 1.0)) for name in parts}
    total = float(sum(applied[name] * value for name, value in parts.items()))
    return LossValue(
        value=total,
        gradients={name: np.float64(w) for name, w in applied.items()},
        parts={name: applied[name] * value for name, value in parts.items()},
    )
