"""Two-layer graph convolutional network and its skip-connection variant.

Forward pass over one propagation block (nodes of the chosen time steps):

    H1 = relu(A_hat X W0)
    Z  = A_hat H1 W1           (+ X W_skip for the skip variant)
    P  = softmax_rows(Z)

The propagation operator is the symmetric degree-normalized adjacency with
self-loops, assembled block-diagonally over time-step slices (steps never
interconnect, so whole-split propagation is a single sparse product).
Training is inductive: only the training steps' slices are ever touched;
inference rebuilds the operator for whatever steps it is asked about.
Backward passes are hand-derived and guarded by finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureMatrix
from ..graph import TemporalGraph, UNKNOWN
from ..numerics import (
    RngStream,
    SparseMatrix,
    adam_step,
    glorot_uniform,
    init_adam,
    normalize_adjacency,
    relu,
    softmax_rows,
    spmm,
    weighted_cross_entropy,
    weighted_cross_entropy_grad_logits,
)
from .artifact import ModelArtifact
from .linear import DEFAULT_CLASS_WEIGHTS

DEFAULT_EMBED_DIM = 100


@dataclass(frozen=True)
class PropagationBlock:
    """Normalized adjacency over the concatenated slices of chosen steps."""

    steps: tuple[int, ...]
    node_index: np.ndarray          # graph indices in block row order
    adj: SparseMatrix               # block-diagonal symmetric A_hat
    step_ranges: tuple[tuple[int, int, int], ...]  # (t, row_start, row_end)


def slice_adjacency(node_indices: np.ndarray, edges: np.ndarray) -> SparseMatrix:
    """Directed adjacency of one slice in local (within-slice) indexing."""
    k = len(node_indices)
    if edges.size == 0:
        rows = np.empty(0, np.int64)
        cols = np.empty(0, np.int64)
    else:
        rows = np.searchsorted(node_indices, edges[:, 0])
        cols = np.searchsorted(node_indices, edges[:, 1])
    return SparseMatrix.from_coo(rows, cols, np.ones(len(rows)), (k, k))


def build_propagation(graph: TemporalGraph, steps) -> PropagationBlock:
    steps = tuple(int(t) for t in steps)
    blocks = []
    index_parts = []
    ranges = []
    offset = 0
    for t in steps:
        sl = graph.slice(t)
        if sl.node_indices.size == 0:
            continue
        a = slice_adjacency(sl.node_indices, sl.edges)
        blocks.append(normalize_adjacency(a, symmetrize=True))
        index_parts.append(sl.node_indices)
        ranges.append((t, offset, offset + sl.node_indices.size))
        offset += sl.node_indices.size
    if not blocks:
        raise ValueError("no nodes in the requested time steps")
    adj = blocks[0] if len(blocks) == 1 else SparseMatrix.block_diag(blocks)
    return PropagationBlock(
        steps=steps,
        node_index=np.concatenate(index_parts),
        adj=adj,
        step_ranges=tuple(ranges),
    )


def _local_positions(node_index: np.ndarray, node_ids: np.ndarray) -> np.ndarray:
    """Map graph indices to their row positions inside a propagation block."""
    order = np.argsort(node_index, kind="stable")
    sorted_index = node_index[order]
    ins = np.searchsorted(sorted_index, node_ids)
    ins_safe = np.minimum(ins, len(sorted_index) - 1)
    if np.any(sorted_index[ins_safe] != node_ids):
        raise ValueError("some requested nodes are outside the propagation block")
    return order[ins_safe]


def gcn_loss_and_grads(
    params: dict,
    adj: SparseMatrix,
    ax: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    mask: np.ndarray,
    class_weights: tuple[float, float],
) -> tuple[float, dict]:
    """Weighted cross entropy of the (skip-)GCN and its analytic gradients.

    ``ax`` is the precomputed ``A_hat @ x``; ``adj`` must be symmetric (it is
    by construction here), which lets the backward pass reuse it in place of
    its transpose.
    """
    skip = "W_skip" in params
    h1 = ax @ params["W0"]
    np.maximum(h1, 0.0, out=h1)  # relu in place; the kink mask is h1 > 0
    z = spmm(adj, h1 @ params["W1"])
    if skip:
        z = z + x @ params["W_skip"]
    probs = softmax_rows(z)
    loss = weighted_cross_entropy(probs, y, class_weights, mask)
    dz = weighted_cross_entropy_grad_logits(probs, y, class_weights, mask)
    at_dz = spmm(adj, dz)
    dh1 = at_dz @ params["W1"].T
    dh1 *= h1 > 0
    grads = {
        "W0": ax.T @ dh1,
        "W1": h1.T @ at_dz,
    }
    if skip:
        grads["W_skip"] = x.T @ dz
    return loss, grads


def gcn_forward(
    params: dict, adj: SparseMatrix, x: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (probs, logits, hidden) for one propagation block."""
    h1 = relu(spmm(adj, x @ params["W0"]))
    z = spmm(adj, h1 @ params["W1"])
    if "W_skip" in params:
        z = z + x @ params["W_skip"]
    return softmax_rows(z), z, h1


def train_gcn(
    graph: TemporalGraph,
    features: FeatureMatrix,
    labels: np.ndarray,
    train_mask: np.ndarray,
    d: int = DEFAULT_EMBED_DIM,
    epochs: int = 1000,
    lr: float = 0.001,
    class_weights: tuple[float, float] = DEFAULT_CLASS_WEIGHTS,
    skip: bool = False,
    seed: int = 0,
    steps=None,
) -> ModelArtifact:
    if d <= 0:
        raise ValueError("embedding dimension must be positive")
    train_mask = np.asarray(train_mask, dtype=np.int64)
    if train_mask.size == 0:
        raise ValueError("training mask is empty")
    labels = np.asarray(labels)
    if np.any(labels[train_mask] == UNKNOWN):
        raise ValueError("training mask contains unknown-labeled nodes")
    if steps is None:
        steps = sorted(int(t) for t in np.unique(graph.nodes.time_steps[train_mask]))
    block = build_propagation(graph, steps)
    x = features.take(block.node_index)
    y = labels[block.node_index]
    mask = _local_positions(block.node_index, train_mask)
    ax = spmm(block.adj, x)

    f = x.shape[1]
    rng = RngStream(seed, ("skip_gcn" if skip else "gcn",))
    params = {
        "W0": glorot_uniform(rng.child("W0"), f, d),
        "W1": glorot_uniform(rng.child("W1"), d, 2),
    }
    if skip:
        params["W_skip"] = glorot_uniform(rng.child("W_skip"), f, 2)
    state = init_adam(params, lr=lr)
    trace = []
    for _ in range(epochs):
        loss, grads = gcn_loss_and_grads(
            params, block.adj, ax, x, y, mask, class_weights
        )
        adam_step(params, grads, state)
        trace.append(loss)
    return ModelArtifact(
        family="skip_gcn" if skip else "gcn",
        params=params,
        hyperparams={
            "d": d,
            "epochs": epochs,
            "lr": lr,
            "class_weights": list(class_weights),
            "steps": list(block.steps),
        },
        seed=seed,
        feature_count=f,
        loss_trace=trace,
    )


def predict_gcn(
    artifact: ModelArtifact,
    graph: TemporalGraph,
    features: FeatureMatrix,
    steps=None,
) -> np.ndarray:
    """Per-node class probabilities, graph index order, over ``steps``.

    Rows for nodes outside the requested steps are uniform 0.5/0.5 (they
    carry no prediction); with the default all-steps call every row is real.
    """
    if steps is None:
        steps = range(1, graph.num_steps + 1)
    block = build_propagation(graph, steps)
    x = features.take(block.node_index)
    probs, _, _ = gcn_forward(artifact.params, block.adj, x)
    out = np.full((graph.num_nodes, 2), 0.5, dtype=np.float64)
    out[block.node_index] = probs
    return out


def extract_embeddings(
    artifact: ModelArtifact,
    graph: TemporalGraph,
    features: FeatureMatrix,
) -> np.ndarray:
    """Hidden-layer activations for every node, graph index order (N x d)."""
    if artifact.family not in ("gcn", "skip_gcn"):
        raise ValueError(f"embeddings require a (skip-)GCN artifact, got {artifact.family}")
    block = build_propagation(graph, range(1, graph.num_steps + 1))
    x = features.take(block.node_index)
    _, _, h1 = gcn_forward(artifact.params, block.adj, x)
    out = np.zeros((graph.num_nodes, h1.shape[1]), dtype=np.float64)
    out[block.node_index] = h1
    return out


def gcn_activations(
    artifact: ModelArtifact,
    graph: TemporalGraph,
    features: FeatureMatrix,
) -> np.ndarray:
    """Pre-softmax output-layer activations for every node (N x 2)."""
    if artifact.family not in ("gcn", "skip_gcn"):
        raise ValueError(f"activations require a (skip-)GCN artifact, got {artifact.family}")
    block = build_propagation(graph, range(1, graph.num_steps + 1))
    x = features.take(block.node_index)
    _, logits, _ = gcn_forward(artifact.params, block.adj, x)
    out = np.zeros((graph.num_nodes, 2), dtype=np.float64)
    out[block.node_index] = logits
    return out
