import numpy as np
import pytest

from evckit.signal_io import Waveform, save_wav

SR = 16000


def make_tone(freq, duration=1.0, sr=SR, amplitude=0.5):
    t = np.arange(int(duration * sr)) / sr
    return Waveform(amplitude * np.sin(2 * np.pi * freq * t), sr)


def write_tone_wav(path, freq, duration=1.0, sr=SR, amplitude=0.5):
    save_wav(path, make_tone(freq, duration, sr, amplitude))
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
