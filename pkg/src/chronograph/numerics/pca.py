"""Deterministic 2-D projection by power iteration.

The layout served to the UI must be reproducible byte-for-byte and computed
globally over all time steps at once, so coordinates are comparable when the
analyst scrubs through time. Plain PCA with seeded power iteration satisfies
both: no stochastic embedding, no dependency beyond numpy.

Iteration runs on the column-Gram matrix (one tall-skinny product up front),
so the per-iteration cost is independent of the node count.
"""

from __future__ import annotations

import numpy as np

from .rng import RngStream

_ZERO_TOL = 1e-12


def pca_project(
    x: np.ndarray,
    dims: int = 2,
    seed: int = 0,
    max_iter: int = 5000,
    tol: float = 1e-13,
) -> np.ndarray:
    """Project rows of ``x`` onto the top principal axes.

    Columns are centered first; each axis is found by power iteration on the
    covariance with deflation, started from a seeded vector. Sign convention:
    the largest-magnitude loading of each axis is positive. Zero-variance
    input maps to all-zero coordinates.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("input must be a matrix")
    n, f = x.shape
    if n < dims:
        raise ValueError(f"need at least {dims} rows, got {n}")
    rng = RngStream(seed, ("pca",))
    xc = x - x.mean(axis=0)
    out = np.zeros((n, dims), dtype=np.float64)
    gram = xc.T @ xc
    total = float(np.trace(gram))
    if total < _ZERO_TOL:
        return out
    for k in range(dims):
        v = rng.normal(0.0, 1.0, f)
        v /= np.linalg.norm(v)
        exhausted = False
        for _ in range(max_iter):
            w = gram @ v
            norm = np.linalg.norm(w)
            if norm < _ZERO_TOL * total:
                exhausted = True
                break
            w /= norm
            if np.linalg.norm(w - v) < tol:
                v = w
                break
            v = w
        if exhausted:
            break  # residual variance used up; remaining coordinates stay 0
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        out[:, k] = xc @ v
        lam = float(v @ (gram @ v))
        gram = gram - lam * np.outer(v, v)
    return out
