"""Small argument checks shared by the public functions and estimators."""

from __future__ import annotations

import numbers

import numpy as np


def check_probability(value, name, *, open_low=False, open_high=False):
    value = float(value)
    low_ok = value > 0 if open_low else value >= 0
    high_ok = value < 1 if open_high else value <= 1
    if not (low_ok and high_ok and np.isfinite(value)):
        lo = "(" if open_low else "["
        hi = ")" if open_high else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value!r}")
    return value


def check_positive(value, name, *, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def check_count(value, name, *, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_rng(random_state=None) -> np.random.Generator:
    """Turn ``None``, an int, a SeedSequence or a Generator into a Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def check_items(values, d=None) -> tuple[np.ndarray, int]:
    """Validate a 1-D array of item indices in ``1..d``.

    Returns the values as an int64 array together with ``d`` (inferred as the
    largest value when not given).
    """
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"item values must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        as_int = arr.astype(np.int64)
        if not np.array_equal(as_int, arr):
            raise ValueError("item values must be integers")
        arr = as_int
    arr = arr.astype(np.int64, copy=False)
    if d is None:
        if arr.size == 0:
            raise ValueError("cannot infer d from an empty value array")
        d = int(arr.max())
    d = check_count(d, "d", minimum=1)
    if arr.size and (arr.min() < 1 or arr.max() > d):
        raise ValueError(f"item values must lie in [1, {d}]")
    return arr, d
