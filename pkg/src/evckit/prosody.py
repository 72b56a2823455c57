"""F0 estimation with voiced/unvoiced decision, and contour smoothing."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import savgol_filter

from .errors import ParameterError, TooShortError
from .signal_io import Waveform, frame_count

# a frame must carry at least this RMS to be considered voiced
RMS_FLOOR = 1e-4

# candidate peaks within this fraction of the strongest peak compete;
# the shortest lag wins, which suppresses period-multiple (octave) errors
PEAK_TOLERANCE = 0.9


@dataclass(frozen=True)
class F0Params:
    """Pitch tracking configuration.

    frame_window fixes the frame grid to match the spectral framing, so the
    F0/VUV contours line up one-to-one with mel and energy frames computed
    at the same hop. The pitch analysis segment itself is sized from f0_min
    and centered on each frame.
    """

    f0_min: float = 50.0
    f0_max: float = 600.0
    periodicity_threshold: float = 0.45
    hop_size: int = 256
    frame_window: int = 1024

    def __post_init__(self):
        if not 0 < self.f0_min < self.f0_max:
            raise ParameterError("require 0 < f0_min < f0_max")
        if not 0 < self.periodicity_threshold < 1:
            raise ParameterError("periodicity_threshold must lie in (0, 1)")
        if self.hop_size < 1 or self.frame_window < 1:
            raise ParameterError("hop_size and frame_window must be positive")


def _nccf(segment: np.ndarray, lag_max: int) -> np.ndarray:
    """Normalized cross-correlation of a segment with itself for lags 0..lag_max.

    Every lag correlates the same number of samples (len(segment) - lag_max),
    so values stay in [-1, 1] and are directly comparable across lags.
    """
    base = segment.size - lag_max
    ref = segment[:base]
    num = np.correlate(segment, ref, mode="valid")  # num[tau] = sum ref[t] * segment[t+tau]
    csum = np.concatenate(([0.0], np.cumsum(segment * segment)))
    energy_lag = csum[base:] - csum[: lag_max + 1]
    denom = np.sqrt(np.dot(ref, ref) * energy_lag)
    out = np.zeros(lag_max + 1)
    np.divide(num, denom, out=out, where=denom > 0)
    return out


def estimate_f0(waveform: Waveform, params: F0Params = F0Params()):
    """Per-frame F0 contour and voiced/unvoiced mask.

    Each frame gets a normalized-autocorrelation pitch estimate with parabolic
    refinement of the peak lag. A frame is voiced iff the peak periodicity
    exceeds the threshold and the frame RMS exceeds RMS_FLOOR; unvoiced frames
    carry F0 = 0. Returns (f0, vuv) of equal length, matching the frame count
    of a mel spectrogram computed with the same window/hop.
    """
    sr = waveform.sample_rate
    if params.f0_max > sr / 2:
        raise ParameterError(f"f0_max {params.f0_max} exceeds Nyquist for {sr} Hz")
    acf_window = math.ceil(2 * sr / params.f0_min)
    n = len(waveform)
    if n < max(acf_window, params.frame_window):
        raise TooShortError(
            f"signal of {n} samples is too short for pitch analysis "
            f"(needs {max(acf_window, params.frame_window)})"
        )
    n_frames = frame_count(n, params.frame_window, params.hop_size)
    lag_min = max(2, int(sr // params.f0_max))
    lag_max = int(math.ceil(sr / params.f0_min))

    f0 = np.zeros(n_frames)
    vuv = np.zeros(n_frames, dtype=np.uint8)
    half = acf_window // 2
    for t in range(n_frames):
        center = t * params.hop_size + params.frame_window // 2
        start = min(max(center - half, 0), n - acf_window)
        segment = waveform.samples[start : start + acf_window]
        rms = math.sqrt(float(np.mean(segment * segment)))
        if rms <= RMS_FLOOR:
            continue
        x = segment - segment.mean()
        r = _nccf(x, lag_max)
        search = r[lag_min : lag_max + 1]
        best_val = float(search.max())
        lag = lag_min + int(search.argmax())
        if best_val > 0:
            # earliest local maximum competitive with the global one
            lags = np.arange(lag_min, lag_max)
            peaks = (r[lags] > r[lags - 1]) & (r[lags] >= r[lags + 1])
            strong = peaks & (r[lags] >= PEAK_TOLERANCE * best_val)
            if strong.any():
                lag = int(lags[int(np.argmax(strong))])
        delta = 0.0
        peak_val = r[lag]
        if lag_min <= lag - 1 and lag + 1 <= lag_max:
            r_prev, r_mid, r_next = r[lag - 1], r[lag], r[lag + 1]
            curvature = r_prev - 2 * r_mid + r_next
            if abs(curvature) > 1e-12:
                delta = float(np.clip(0.5 * (r_prev - r_next) / curvature, -0.5, 0.5))
                peak_val = r_mid - 0.25 * (r_prev - r_next) * delta
        periodicity = min(float(peak_val), 1.0)
        if periodicity > params.periodicity_threshold:
            vuv[t] = 1
            f0[t] = float(np.clip(sr / (lag + delta), params.f0_min, params.f0_max))
    return f0, vuv


def _fill_unvoiced(values: np.ndarray, vuv: np.ndarray) -> np.ndarray:
    """Linearly interpolate unvoiced gaps from flanking voiced values."""
    voiced = np.flatnonzero(vuv)
    if voiced.size == 0 or voiced.size == values.size:
        return values.copy()
    return np.interp(np.arange(values.size), voiced, values[voiced])


def savgol_smooth(values, window: int = 9, order: int = 2, vuv=None) -> np.ndarray:
    """Savitzky-Golay smoothing: per-position least-squares polynomial fit.

    Each output is the center evaluation of the degree-`order` least-squares
    polynomial over a `window`-frame neighborhood. Edge positions are filled
    from a polynomial fit over the first/last full window, which reproduces
    polynomial contours of degree <= order exactly everywhere. Contours
    shorter than the window fall back to a single global fit.

    When a vuv mask is given (F0 contours), unvoiced gaps are linearly
    interpolated from flanking voiced values before filtering and zeros are
    restored on unvoiced frames afterward.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ParameterError("contour must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(values)):
        raise ParameterError("contour values must be finite")
    if window % 2 == 0:
        raise ParameterError(f"window must be odd, got {window}")
    if order < 0 or window <= order:
        raise ParameterError(f"require window > order >= 0, got {window} <= {order}")

    x = values
    if vuv is not None:
        vuv = np.asarray(vuv)
        if vuv.shape != values.shape:
            raise ParameterError("vuv mask length must match the contour")
        x = _fill_unvoiced(values, vuv)

    n = x.size
    if n >= window:
        smoothed = savgol_filter(x, window, order, mode="interp")
    else:
        # too few frames for a sliding window: one global fit
        deg = min(order, n - 1)
        t = np.arange(n, dtype=np.float64)
        smoothed = np.polyval(np.polyfit(t, x, deg), t)

    if vuv is not None:
        smoothed = np.where(vuv.astype(bool), smoothed, 0.0)
    return smoothed
