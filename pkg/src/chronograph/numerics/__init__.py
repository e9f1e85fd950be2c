"""Deterministic numerical core shared by all models."""

from .adam import AdamState, adam_step, init_adam
from .gradcheck import grad_check
from .ops import (
    relu,
    softmax_rows,
    weighted_cross_entropy,
    weighted_cross_entropy_grad_logits,
)
from .pca import pca_project
from .rng import RngStream, glorot_uniform
from .sparse import ShapeError, SparseMatrix, normalize_adjacency, spmm

__all__ = [
    "AdamState",
    "RngStream",
    "ShapeError",
    "SparseMatrix",
    "adam_step",
    "glorot_uniform",
    "grad_check",
    "init_adam",
    "normalize_adjacency",
    "pca_project",
    "relu",
    "softmax_rows",
    "spmm",
    "weighted_cross_entropy",
    "weighted_cross_entropy_grad_logits",
]
