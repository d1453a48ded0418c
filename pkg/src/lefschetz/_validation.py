"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import numpy as np
from sklearn.utils import check_array

from .mcg import MonodromyWord
from .mesh import MeshValidationError, TriSurface, validate


def check_surface(surface) -> TriSurface:
    if not isinstance(surface, TriSurface):
        raise TypeError(f"expected a TriSurface, got {type(surface).__name__}")
    report = validate(surface)
    if not report.passed:
        raise MeshValidationError(report)
    return surface


def check_conformal_factors(X, surface: TriSurface) -> np.ndarray:
    """2-D float array with one column per vertex; a single row may be 1-D."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    X = check_array(X, dtype=float)
    if X.shape[1] != surface.n_vertices:
        raise ValueError(f"X has {X.shape[1]} columns, surface has {surface.n_vertices} vertices")
    return X


def check_words(words) -> list[MonodromyWord]:
    if isinstance(words, MonodromyWord):
        words = [words]
    words = list(words)
    for k, w in enumerate(words):
        if not isinstance(w, MonodromyWord):
            raise TypeError(f"item {k} is not a MonodromyWord")
    return words
