"""WAV ingestion, STFT framing, mel spectrogram, and frame-level energy."""

import wave
from dataclasses import dataclass

import numpy as np

from .errors import (
    AudioFormatError,
    ParameterError,
    TooShortError,
    UnsupportedChannelError,
    UnsupportedDepthError,
)

# floor applied to the per-frame mel norm before the log
ENERGY_FLOOR = 1e-5


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ParameterError("waveform samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ParameterError("waveform samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ParameterError("sample_rate must be a positive integer")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class FrameParams:
    """Spectral analysis configuration (defaults: 1024/256, 80 mel bins)."""

    window_size: int = 1024
    hop_size: int = 256
    n_mels: int = 80
    fmin: float = 0.0
    fmax: float = 8000.0

    def __post_init__(self):
        if not 0 < self.hop_size <= self.window_size:
            raise ParameterError("require 0 < hop_size <= window_size")
        if self.n_mels < 1:
            raise ParameterError("n_mels must be >= 1")
        if not 0 <= self.fmin < self.fmax:
            raise ParameterError("require 0 <= fmin < fmax")


@dataclass(frozen=True)
class MelSpectrogram:
    """Non-negative magnitude mel frames (T x n_mels) plus the params that made them."""

    frames: np.ndarray
    params: FrameParams

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[1] != self.params.n_mels:
            raise ParameterError("mel frames must be a T x n_mels matrix")
        if frames.size and (not np.all(np.isfinite(frames)) or frames.min() < 0):
            raise ParameterError("mel entries must be finite and non-negative")
        object.__setattr__(self, "frames", frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


def load_wav(path) -> Waveform:
    """Read a PCM 16-bit mono WAV file, normalizing samples by 32768.

    Raises AudioFormatError for malformed files, UnsupportedChannelError for
    multi-channel audio, UnsupportedDepthError for non-16-bit sample widths.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            samp_width = wf.getsampwidth()
            sample_rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise AudioFormatError(f"{path}: truncated WAV header") from exc
    if n_channels != 1:
        raise UnsupportedChannelError(
            f"{path}: expected mono audio, got {n_channels} channels"
        )
    if samp_width != 2:
        raise UnsupportedDepthError(
            f"{path}: expected 16-bit PCM, got {8 * samp_width}-bit"
        )
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(samples=samples, sample_rate=sample_rate)


def save_wav(path, waveform: Waveform) -> None:
    """Write a Waveform as PCM 16-bit mono WAV (values clipped to [-1, 1))."""
    data = np.clip(np.round(waveform.samples * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(waveform.sample_rate)
        wf.writeframes(data.tobytes())


def frame_count(n_samples: int, window_size: int, hop_size: int) -> int:
    """Number of analysis frames under no-padding framing (requires n >= window)."""
    return 1 + (n_samples - window_size) // hop_size


def frame_signal(samples: np.ndarray, window_size: int, hop_size: int) -> np.ndarray:
    """Slice a signal into overlapping frames of `window_size` every `hop_size` samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < window_size:
        raise TooShortError(
            f"signal of {samples.size} samples is shorter than one window ({window_size})"
        )
    return np.lib.stride_tricks.sliding_window_view(samples, window_size)[::hop_size]


def _hz_to_mel(freq):
    # linear below 1 kHz, logarithmic above (Slaney-style scale)
    freq = np.asarray(freq, dtype=np.float64)
    mel = freq * 3.0 / 200.0
    log_region = freq >= 1000.0
    if np.any(log_region):
        mel = np.where(
            log_region,
            15.0 + 27.0 * np.log(np.maximum(freq, 1000.0) / 1000.0) / np.log(6.4),
            mel,
        )
    return mel


def _mel_to_hz(mel):
    mel = np.asarray(mel, dtype=np.float64)
    freq = mel * 200.0 / 3.0
    log_region = mel >= 15.0
    if np.any(log_region):
        freq = np.where(log_region, 1000.0 * 6.4 ** ((mel - 15.0) / 27.0), freq)
    return freq


def mel_filterbank(params: FrameParams, sample_rate: int):
    """Triangular mel filterbank (peak height 1) over the rFFT bins.

    Band edges are spaced uniformly on the Slaney mel scale between fmin and
    fmax. Returns (weights, centers) where weights is n_mels x n_bins and
    centers holds each filter's peak frequency in Hz.
    """
    if params.fmax > sample_rate / 2:
        raise ParameterError(
            f"fmax {params.fmax} exceeds Nyquist for sample rate {sample_rate}"
        )
    n_bins = params.window_size // 2 + 1
    fft_freqs = np.arange(n_bins) * sample_rate / params.window_size
    mel_pts = np.linspace(
        _hz_to_mel(params.fmin), _hz_to_mel(params.fmax), params.n_mels + 2
    )
    edges = _mel_to_hz(mel_pts)
    weights = np.zeros((params.n_mels, n_bins))
    for m in range(params.n_mels):
        left, center, right = edges[m], edges[m + 1], edges[m + 2]
        rise = (fft_freqs - left) / max(center - left, 1e-12)
        fall = (right - fft_freqs) / max(right - center, 1e-12)
        weights[m] = np.clip(np.minimum(rise, fall), 0.0, None)
    return weights, edges[1:-1].copy()


def mel_spectrogram(waveform: Waveform, params: FrameParams = FrameParams()) -> MelSpectrogram:
    """Magnitude STFT (Hann window, no padding) projected through the mel filterbank."""
    filterbank, _ = mel_filterbank(params, waveform.sample_rate)
    frames = frame_signal(waveform.samples, params.window_size, params.hop_size)
    windowed = frames * np.hanning(params.window_size)
    magnitude = np.abs(np.fft.rfft(windowed, axis=1))
    return MelSpectrogram(frames=magnitude @ filterbank.T, params=params)


def frame_energy(mel: MelSpectrogram) -> np.ndarray:
    """Per-frame log L2 norm of the mel frame, floored at ENERGY_FLOOR."""
    norms = np.linalg.norm(mel.frames, axis=1)
    return np.log(np.maximum(norms, ENERGY_FLOOR))
