"""Input validation helpers shared by the estimators and the functional API."""

import os

import numpy as np

DEFAULT_SEARCH_BOUND = 12


def search_bound(default=DEFAULT_SEARCH_BOUND):
    """Instance-size guard, overridable through ``EQGH_SEARCH_BOUND``."""
    value = os.environ.get("EQGH_SEARCH_BOUND")
    if value is None:
        return default
    return int(value)


def check_square_matrix(matrix, name="matrix"):
    arr = np.asarray(matrix, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def check_index(index, n, name="index"):
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
        raise TypeError(f"{name} must be an integer")
    index = int(index)
    if not 0 <= index < n:
        raise ValueError(f"{name}={index} out of range [0, {n})")
    return index


def check_positive(value, name="value", allow_zero=False):
    value = float(value)
    if allow_zero and value < 0 or not allow_zero and value <= 0 or not np.isfinite(value):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value}")
    return value


def check_rotation(matrix, tol=1e-10):
    """Return ``matrix`` as a float array after checking it lies in SO(n)."""
    m = check_square_matrix(matrix, "rotation")
    n = m.shape[0]
    if np.linalg.norm(m.T @ m - np.eye(n)) > tol:
        raise ValueError("rotation is not orthogonal within tolerance")
    if np.linalg.det(m) <= 0:
        raise ValueError("rotation has non-positive determinant")
    return m


def check_rotations(matrices, tol=1e-10):
    """Validate a stack of rotations, returning an array of shape (k, n, n)."""
    arr = np.asarray(matrices, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValueError(f"expected a stack of square matrices, got shape {arr.shape}")
    for m in arr:
        check_rotation(m, tol)
    return arr


def check_weights(weights, size, tol=1e-12):
    w = np.asarray(weights, dtype=float).ravel()
    if w.shape[0] != size:
        raise ValueError(f"expected {size} weights, got {w.shape[0]}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > tol:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w
