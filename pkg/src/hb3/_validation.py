from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .gaussian import Level, as_gaussian
from .h3geom import H3Point


def check_points(X) -> np.ndarray:
    """Rows (x, y, r) with r > 0, as a float array of shape (n, 3)."""
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != 3:
        raise ValueError(f"expected 3 columns (x, y, r), got {X.shape[1]}")
    if np.any(X[:, 2] <= 0):
        raise ValueError("heights r must be positive")
    return X


def as_points(X) -> list[H3Point]:
    return [H3Point(*row) for row in check_points(X)]


def check_level(level) -> Level:
    N = Level.of(as_gaussian(level))
    if not N.squarefree:
        raise ValueError(f"level {N} is not squarefree")
    return N
