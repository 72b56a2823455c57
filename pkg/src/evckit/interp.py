"""Linear resampling shared by the augmentation and input-assembly code."""

import numpy as np

from .errors import ParameterError


def resample_linear(values, length: int) -> np.ndarray:
    """Resample a 1-D sequence to `length` points by linear interpolation.

    Endpoints map to endpoints; interior points are placed on a uniform
    grid over the original index range.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ParameterError("resample_linear expects a non-empty 1-D sequence")
    if length < 1:
        raise ParameterError(f"target length must be >= 1, got {length}")
    n = values.size
    if length == n:
        return values.copy()
    if n == 1:
        return np.full(length, values[0])
    if length == 1:
        # single output sample taken at the center of the input span
        return np.array([np.interp((n - 1) / 2.0, np.arange(n), values)])
    positions = np.linspace(0.0, n - 1, length)
    return np.interp(positions, np.arange(n), values)
