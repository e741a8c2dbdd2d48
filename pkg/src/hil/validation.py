"""Input validation helpers shared by the estimators and the functional core."""

import numpy as np

from .exceptions import DimensionMismatch, NonFinite

UNIT_ATOL = 1e-6


def check_matrix(X, name="X", d=None):
    """Coerce to a finite 2-D float64 array, optionally enforcing a column count."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NonFinite(f"{name} contains non-finite values")
    if d is not None and X.shape[1] != d:
        raise DimensionMismatch(f"{name} has {X.shape[1]} columns, expected {d}")
    return X


def check_vector(v, name="v", d=None):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise NonFinite(f"{name} contains non-finite values")
    if d is not None and v.shape[0] != d:
        raise DimensionMismatch(f"{name} has length {v.shape[0]}, expected {d}")
    return v


def check_unit_rows(X, name="X"):
    """Assert every row of X has L2 norm 1 within UNIT_ATOL."""
    norms = np.linalg.norm(X, axis=-1)
    if not np.allclose(norms, 1.0, atol=UNIT_ATOL):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(f"{name} rows are not unit-norm (max deviation {worst:.3g})")
    return X
