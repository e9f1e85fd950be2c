"""Dense activations and the weighted cross-entropy loss.

Class convention throughout the toolkit: column 0 = licit, column 1 = illicit.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-15


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by per-row max subtraction."""
    x = np.asarray(x, dtype=np.float64)
    shifted = x - x.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def weighted_cross_entropy(
    probs: np.ndarray,
    labels: np.ndarray,
    class_weights: tuple[float, float],
    mask: np.ndarray,
    stats: dict | None = None,
) -> float:
    """Mean of per-sample ``w_y * (-log p_y)`` over the masked rows.

    ``class_weights`` is (w_licit, w_illicit). Probabilities of exactly zero
    at the true label are clamped to 1e-15; the number of clamps is counted
    in ``stats['clamped']`` and logged.
    """
    mask = np.asarray(mask)
    if mask.size == 0:
        raise ValueError("mask must be non-empty")
    y = np.asarray(labels)[mask]
    p = probs[mask, y]
    clamped = int(np.count_nonzero(p <= 0.0))
    if clamped:
        logger.warning("clamped %d zero probabilities in cross entropy", clamped)
        p = np.maximum(p, PROB_FLOOR)
    if stats is not None:
        stats["clamped"] = stats.get("clamped", 0) + clamped
    w = np.where(y == 1, class_weights[1], class_weights[0])
    return float(np.mean(w * -np.log(p)))


def weighted_cross_entropy_grad_logits(
    probs: np.ndarray,
    labels: np.ndarray,
    class_weights: tuple[float, float],
    mask: np.ndarray,
) -> np.ndarray:
    """Gradient of the loss above w.r.t. pre-softmax logits, zero off-mask."""
    mask = np.asarray(mask)
    if mask.size == 0:
        raise ValueError("mask must be non-empty")
    y = np.asarray(labels)[mask]
    w = np.where(y == 1, class_weights[1], class_weights[0])
    grad = np.zeros_like(probs)
    rows = probs[mask].copy()
    rows[np.arange(mask.size), y] -= 1.0
    grad[mask] = rows * w[:, None] / mask.size
    return grad
