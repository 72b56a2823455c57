"""Prosody extraction, augmentation, discrete-unit tools, and objective
metrics for emotional voice conversion experiments."""

from . import nn
from .augment import AugmentParams, piecewise_time_warp, pro_aug, random_shift
from .bundle import (
    ProsodyBundle,
    load_bundle,
    load_contour_csv,
    save_bundle,
    save_contour_csv,
)
from .errors import (
    AudioFormatError,
    DegenerateInputError,
    EvcError,
    InsufficientDataError,
    ParameterError,
    SchemaError,
    TooShortError,
    UnsupportedChannelError,
    UnsupportedDepthError,
)
from .interp import resample_linear
from .metrics import (
    AlignmentPath,
    MetricReport,
    aligned_pcc,
    character_error_rate,
    dtw_align,
    edit_distance,
    eecs,
    word_error_rate,
)
from .prosody import F0Params, estimate_f0, savgol_smooth
from .signal_io import (
    FrameParams,
    MelSpectrogram,
    Waveform,
    frame_count,
    frame_energy,
    frame_signal,
    load_wav,
    mel_filterbank,
    mel_spectrogram,
    save_wav,
)
from .units import (
    Codebook,
    DedupResult,
    dedup,
    expand,
    kmeans_assign,
    kmeans_fit,
    load_codebook,
    load_features,
    load_units,
    save_codebook,
    save_features,
    save_units,
)

__version__ = "0.1.0"
