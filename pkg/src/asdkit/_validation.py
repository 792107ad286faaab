"""Input validation helpers shared by the estimators."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionMismatch, InvalidConfig


def check_alpha(alpha) -> float:
    if not isinstance(alpha, numbers.Real) or isinstance(alpha, bool):
        raise InvalidConfig(f"alpha must be a real number, got {alpha!r}")
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InvalidConfig(f"alpha={alpha} outside [0, 1]")
    return alpha


def check_probability_pair(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 2:
        raise DimensionMismatch(f"expected 2 columns (sync, assoc), got {X.shape[1]}")
    if np.any(X < 0) or np.any(X > 1):
        raise ValueError("probabilities must lie in [0, 1]")
    return X


def check_matrix(X, n_cols: int | None = None, name: str = "X") -> np.ndarray:
    """Finite 2-D float64 matrix with an optional required column count."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if n_cols is not None and X.shape[1] != n_cols:
        raise DimensionMismatch(f"{name} has {X.shape[1]} columns, expected {n_cols}")
    return X


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, numbers.Integral) or isinstance(value, bool) or value < minimum:
        raise InvalidConfig(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
