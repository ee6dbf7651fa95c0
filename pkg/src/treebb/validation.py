"""Input validation helpers used at public API boundaries."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DimensionMismatchError


def as_point(point, dimension=None) -> tuple:
    """Normalize a decision vector to a tuple of python ints.

    Accepts any sequence (or numpy array) of integral values.  Raises
    DimensionMismatchError if ``dimension`` is given and does not match.
    """
    arr = np.asarray(point)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"point must be 1-D, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.allclose(arr, rounded, rtol=0, atol=0):
            raise DimensionMismatchError("point coordinates must be integers")
        arr = rounded.astype(np.int64)
    if dimension is not None and arr.size != dimension:
        raise DimensionMismatchError(
            f"point has length {arr.size}, expected {dimension}"
        )
    return tuple(int(v) for v in arr)


def as_int_array(point, dimension=None) -> np.ndarray:
    return np.asarray(as_point(point, dimension), dtype=np.int64)


def check_X_y(X, y):
    """Validate a (features, labels) pair for tree fitting."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if y.ndim != 1:
        raise ValueError(f"y must be 1-D, got shape {y.shape}")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X and y disagree on sample count: {X.shape[0]} vs {y.shape[0]}")
    if X.shape[0] == 0:
        raise ValueError("need at least one sample")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ValueError("X and y must be finite")
    return X, y


def check_positive_int(name, value, minimum=1) -> int:
    if not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value
