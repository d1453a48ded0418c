"""Floating-point reference implementations used to cross-check exact code."""
from __future__ import annotations

import numpy as np
from scipy.linalg import null_space


def float_signature(S, tol=1e-9):
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return 0
    ev = np.linalg.eigvalsh((S + S.T) / 2)
    scale = max(1.0, np.abs(ev).max())
    return int(np.sum(ev > tol * scale) - np.sum(ev < -tol * scale))


def float_tau(A, B):
    """Signature of the cocycle form computed with SVD nullspaces and eigenvalues."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    g = n // 2
    J = np.zeros((n, n))
    J[:g, g:] = np.eye(g)
    J[g:, :g] = -np.eye(g)
    I = np.eye(n)
    V = null_space(np.hstack([np.linalg.inv(A) - I, B - I]))
    if V.shape[1] == 0:
        return 0
    X, Y = V[:n], V[n:]
    G = (X + Y).T @ J @ (I - B) @ Y
    return float_signature(G + G.T)
