"""Input validation helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np

HALF_TOLERANCE = 1e-6
"""Hurst values within this distance of 1/2 route to the degenerate
(identity) kernels to avoid catastrophic cancellation in the exponents."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (factorization, embedding, non-finite values)."""


class DegeneratePathError(ValueError):
    """An estimator is undefined on the given path (e.g. constant path)."""


def check_hurst(value) -> float:
    """Validate a Hurst index and return it as a plain float.

    Accepts floats or anything with ``__float__`` (including :class:`HurstIndex`).
    """
    h = float(value)
    if not np.isfinite(h) or not 0.0 < h < 1.0:
        raise ValueError(f"hurst must lie in the open interval (0, 1), got {value!r}")
    return h


def is_near_half(h: float) -> bool:
    return abs(h - 0.5) <= HALF_TOLERANCE


def check_seed(seed) -> int:
    if not isinstance(seed, numbers.Integral):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must satisfy 0 <= seed < 2**64, got {seed}")
    return seed


def check_positive_int(value, name: str) -> int:
    if not isinstance(value, numbers.Integral) or int(value) < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_paths_matrix(X, *, min_columns: int = 1) -> np.ndarray:
    """Validate a stacked-path array of shape (n_paths, n_points + 1).

    Every row is one path sampled on the shared uniform grid; column 0 must be
    identically zero (all processes start at zero).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d array of stacked paths, got ndim={X.ndim}")
    if X.shape[1] < min_columns:
        raise ValueError(
            f"paths need at least {min_columns} grid points per row, got {X.shape[1]}"
        )
    if not np.isfinite(X).all():
        raise ValueError("paths contain non-finite values")
    if X.shape[1] > 0 and np.any(X[:, 0] != 0.0):
        raise ValueError("paths must start at 0 (column 0 must be identically zero)")
    return X
