"""Prosody augmentation: random shifting and piecewise time warping.

Both operators preserve sequence length exactly and never leave the value
envelope of the input (shift replicates boundary values, warping is linear
interpolation). The combined draw applies one operator, with identical
parameters, to the F0 and energy contours so their alignment is preserved.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .interp import resample_linear


@dataclass(frozen=True)
class AugmentParams:
    """Ranges for the two augmentation operators plus the RNG seed.

    Randomness comes from numpy's PCG64 generator, so outputs are
    reproducible for a fixed seed.
    """

    shift_range: tuple = (-15, 15)
    n_segments_range: tuple = (2, 5)
    scale_range: tuple = (0.4, 1.6)
    seed: int | None = None

    def __post_init__(self):
        lo, hi = self.shift_range
        if lo != -hi or hi < 0 or int(lo) != lo or int(hi) != hi:
            raise ParameterError("shift_range must be a symmetric integer interval")
        seg_lo, seg_hi = self.n_segments_range
        if not 2 <= seg_lo <= seg_hi:
            raise ParameterError("n_segments_range must satisfy 2 <= lo <= hi")
        s_lo, s_hi = self.scale_range
        if not 0 < s_lo <= s_hi:
            raise ParameterError("scale_range must be positive with lo <= hi")


def random_shift(values, shift: int) -> np.ndarray:
    """Shift a contour along the time axis, replicating boundary values."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ParameterError("contour must be a non-empty 1-D sequence")
    n = values.size
    if abs(shift) >= n:
        raise ParameterError(f"|shift| must be < contour length {n}, got {shift}")
    idx = np.clip(np.arange(n) - shift, 0, n - 1)
    return values[idx]


def piecewise_time_warp(values, boundaries, scales) -> np.ndarray:
    """Stretch/compress segments independently, then resample to the input length.

    `boundaries` are strictly increasing interior split indices; segment i is
    resampled to round(len_i * scales[i]) frames (at least 1), the pieces are
    concatenated, and the result is linearly resampled back to len(values).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ParameterError("contour must be a non-empty 1-D sequence")
    n = values.size
    bounds = [0] + [int(b) for b in boundaries] + [n]
    for a, b in zip(bounds, bounds[1:]):
        if not a < b:
            raise ParameterError(f"boundaries must be strictly increasing interior indices, got {list(boundaries)}")
    scales = np.asarray(scales, dtype=np.float64)
    if scales.size != len(bounds) - 1:
        raise ParameterError("need exactly one scale per segment")
    if not np.all(np.isfinite(scales)) or np.any(scales <= 0):
        raise ParameterError("scales must be positive and finite")
    pieces = []
    for (a, b), scale in zip(zip(bounds, bounds[1:]), scales):
        target = max(1, int(np.floor((b - a) * scale + 0.5)))  # round half up
        pieces.append(resample_linear(values[a:b], target))
    return resample_linear(np.concatenate(pieces), n)


def pro_aug(f0, energy, params: AugmentParams = AugmentParams(), rng=None):
    """Randomly shift or piecewise-warp a smoothed F0/energy pair.

    One of the two operators is chosen with probability 1/2 from the seeded
    generator, and the same operator with the same drawn parameters is applied
    to both contours. Drawn parameters are clamped to what the contour length
    admits, so any non-empty contour is valid input.
    """
    f0 = np.asarray(f0, dtype=np.float64)
    energy = np.asarray(energy, dtype=np.float64)
    if f0.shape != energy.shape or f0.ndim != 1:
        raise ParameterError("f0 and energy must be 1-D contours of equal length")
    if f0.size == 0:
        raise ParameterError("contours must be non-empty")
    n = f0.size
    if rng is None:
        rng = np.random.default_rng(params.seed)

    if rng.integers(2) == 0:
        lo, hi = params.shift_range
        lo, hi = max(int(lo), -(n - 1)), min(int(hi), n - 1)
        shift = int(rng.integers(lo, hi + 1))
        return random_shift(f0, shift), random_shift(energy, shift)

    seg_lo, seg_hi = params.n_segments_range
    n_segments = min(int(rng.integers(seg_lo, seg_hi + 1)), n)
    if n_segments < 2:
        boundaries = np.empty(0, dtype=np.int64)
    else:
        boundaries = np.sort(rng.choice(np.arange(1, n), size=n_segments - 1, replace=False))
    scales = rng.uniform(params.scale_range[0], params.scale_range[1], size=max(n_segments, 1))
    return (
        piecewise_time_warp(f0, boundaries, scales),
        piecewise_time_warp(energy, boundaries, scales),
    )
