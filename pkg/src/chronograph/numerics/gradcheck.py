"""Finite-difference verification of hand-written gradients.

Every analytic backward pass in the model zoo is validated against central
differences on small fixtures; this is the guard that lets the models skip a
general autodiff engine.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .rng import RngStream

LossAndGrads = Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]]


def grad_check(
    loss_fn: LossAndGrads,
    params: dict[str, np.ndarray],
    h: float = 1e-5,
    max_coords_per_tensor: int = 64,
    rng: RngStream | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error uses denominator ``max(|analytic|, |numeric|, 1e-8)``.
    Tensors larger than ``max_coords_per_tensor`` are checked on a random
    coordinate subsample.
    """
    rng = rng or RngStream(0, ("gradcheck",))
    _, grads = loss_fn(params)
    worst = 0.0
    for name, p in params.items():
        flat = p.reshape(-1)
        size = flat.size
        if size > max_coords_per_tensor:
            coords = np.sort(rng.choice(size, max_coords_per_tensor, replace=False))
        else:
            coords = np.arange(size)
        analytic = grads[name].reshape(-1)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + h
            plus, _ = loss_fn(params)
            flat[idx] = orig - h
            minus, _ = loss_fn(params)
            flat[idx] = orig
            numeric = (plus - minus) / (2.0 * h)
            a = float(analytic[idx])
            denom = max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, abs(a - numeric) / denom)
    return worst
