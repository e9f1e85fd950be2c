"""Logistic regression and the one-hidden-layer MLP.

Both are trained full-batch with Adam on the (optionally class-weighted)
cross entropy; logistic regression is literally a single softmax layer, which
keeps one numerics core under every gradient model in the zoo.
"""

from __future__ import annotations

import numpy as np

from ..features import FeatureMatrix
from ..numerics import (
    RngStream,
    adam_step,
    glorot_uniform,
    init_adam,
    relu,
    softmax_rows,
    weighted_cross_entropy,
    weighted_cross_entropy_grad_logits,
)
from .artifact import ModelArtifact

DEFAULT_CLASS_WEIGHTS = (0.3, 0.7)


def _check_mask(labels: np.ndarray, mask: np.ndarray) -> np.ndarray:
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("training mask is empty")
    present = np.unique(np.asarray(labels)[mask])
    if not (0 in present and 1 in present):
        raise ValueError("training mask must contain both classes")
    return mask


def logreg_forward(params: dict, x: np.ndarray) -> np.ndarray:
    return softmax_rows(x @ params["W"] + params["b"])


def logreg_loss_and_grads(
    params: dict,
    x: np.ndarray,
    y: np.ndarray,
    class_weights: tuple[float, float],
    l2: float,
) -> tuple[float, dict]:
    all_rows = np.arange(len(y))
    probs = logreg_forward(params, x)
    loss = weighted_cross_entropy(probs, y, class_weights, all_rows)
    loss += 0.5 * l2 * float(np.sum(params["W"] ** 2))
    dz = weighted_cross_entropy_grad_logits(probs, y, class_weights, all_rows)
    return loss, {"W": x.T @ dz + l2 * params["W"], "b": dz.sum(axis=0)}


def train_logreg(
    features: FeatureMatrix,
    labels: np.ndarray,
    mask: np.ndarray,
    epochs: int = 1000,
    lr: float = 0.01,
    l2: float = 1e-4,
    class_weights: tuple[float, float] = DEFAULT_CLASS_WEIGHTS,
    seed: int = 0,
) -> ModelArtifact:
    mask = _check_mask(labels, mask)
    x = features.take(mask)
    y = np.asarray(labels)[mask]
    f = x.shape[1]
    rng = RngStream(seed, ("logreg",))
    params = {"W": glorot_uniform(rng.child("W"), f, 2), "b": np.zeros(2)}
    state = init_adam(params, lr=lr)
    trace = []
    for _ in range(epochs):
        loss, grads = logreg_loss_and_grads(params, x, y, class_weights, l2)
        adam_step(params, grads, state)
        trace.append(loss)
    return ModelArtifact(
        family="logreg",
        params=params,
        hyperparams={
            "epochs": epochs,
            "lr": lr,
            "l2": l2,
            "class_weights": list(class_weights),
        },
        seed=seed,
        feature_count=f,
        loss_trace=trace,
    )


def mlp_forward(params: dict, x: np.ndarray) -> np.ndarray:
    h = relu(x @ params["W1"] + params["b1"])
    return softmax_rows(h @ params["W2"] + params["b2"])


def mlp_loss_and_grads(
    params: dict,
    x: np.ndarray,
    y: np.ndarray,
    class_weights: tuple[float, float],
    l2: float,
) -> tuple[float, dict]:
    all_rows = np.arange(len(y))
    z1 = x @ params["W1"] + params["b1"]
    h = relu(z1)
    probs = softmax_rows(h @ params["W2"] + params["b2"])
    loss = weighted_cross_entropy(probs, y, class_weights, all_rows)
    if l2:
        loss += 0.5 * l2 * float(np.sum(params["W1"] ** 2) + np.sum(params["W2"] ** 2))
    dz2 = weighted_cross_entropy_grad_logits(probs, y, class_weights, all_rows)
    dh = dz2 @ params["W2"].T
    dz1 = dh * (z1 > 0)
    grads = {
        "W1": x.T @ dz1 + l2 * params["W1"],
        "b1": dz1.sum(axis=0),
        "W2": h.T @ dz2 + l2 * params["W2"],
        "b2": dz2.sum(axis=0),
    }
    return loss, grads


def train_mlp(
    features: FeatureMatrix,
    labels: np.ndarray,
    mask: np.ndarray,
    hidden: int = 50,
    epochs: int = 200,
    lr: float = 0.001,
    l2: float = 0.0,
    class_weights: tuple[float, float] = DEFAULT_CLASS_WEIGHTS,
    seed: int = 0,
) -> ModelArtifact:
    mask = _check_mask(labels, mask)
    x = features.take(mask)
    y = np.asarray(labels)[mask]
    f = x.shape[1]
    rng = RngStream(seed, ("mlp",))
    params = {
        "W1": glorot_uniform(rng.child("W1"), f, hidden),
        "b1": np.zeros(hidden),
        "W2": glorot_uniform(rng.child("W2"), hidden, 2),
        "b2": np.zeros(2),
    }
    state = init_adam(params, lr=lr)
    trace = []
    for _ in range(epochs):
        loss, grads = mlp_loss_and_grads(params, x, y, class_weights, l2)
        adam_step(params, grads, state)
        trace.append(loss)
    return ModelArtifact(
        family="mlp",
        params=params,
        hyperparams={
            "hidden": hidden,
            "epochs": epochs,
            "lr": lr,
            "l2": l2,
            "class_weights": list(class_weights),
        },
        seed=seed,
        feature_count=f,
        loss_trace=trace,
    )
