"""The six classifier families and a common predict dispatch."""

from __future__ import annotations

import numpy as np

from ..features import FeatureMatrix
from ..graph import TemporalGraph
from ..numerics import ShapeError
from .artifact import (
    FAMILIES,
    GRAPH_FAMILIES,
    ModelArtifact,
    load_artifact,
    save_artifact,
)
from .evolve import (
    evolve_loss_and_grads,
    init_evolve_params,
    predict_evolvegcn,
    prepare_sequence,
    train_evolvegcn,
)
from .forest import forest_forward, gini_impurity, train_random_forest
from .gcn import (
    build_propagation,
    extract_embeddings,
    gcn_activations,
    gcn_forward,
    gcn_loss_and_grads,
    predict_gcn,
    train_gcn,
)
from .linear import (
    DEFAULT_CLASS_WEIGHTS,
    logreg_forward,
    logreg_loss_and_grads,
    mlp_forward,
    mlp_loss_and_grads,
    train_logreg,
    train_mlp,
)

__all__ = [
    "DEFAULT_CLASS_WEIGHTS",
    "FAMILIES",
    "GRAPH_FAMILIES",
    "ModelArtifact",
    "build_propagation",
    "classify",
    "evolve_loss_and_grads",
    "extract_embeddings",
    "forest_forward",
    "gcn_activations",
    "gcn_forward",
    "gcn_loss_and_grads",
    "gini_impurity",
    "init_evolve_params",
    "load_artifact",
    "logreg_forward",
    "logreg_loss_and_grads",
    "mlp_forward",
    "mlp_loss_and_grads",
    "predict",
    "predict_evolvegcn",
    "predict_gcn",
    "prepare_sequence",
    "save_artifact",
    "train_evolvegcn",
    "train_gcn",
    "train_logreg",
    "train_mlp",
    "train_random_forest",
]


def predict(
    artifact: ModelArtifact,
    features: FeatureMatrix,
    graph: TemporalGraph | None = None,
    steps=None,
) -> np.ndarray:
    """Class probabilities for every node, rows summing to 1.

    Graph models additionally need the graph; they rebuild the propagation
    operator for the requested steps and reuse the trained weights.
    """
    if features.shape[1] != artifact.feature_count:
        raise ShapeError(
            f"artifact expects {artifact.feature_count} features, got {features.shape[1]}"
        )
    if artifact.family in GRAPH_FAMILIES:
        if graph is None:
            raise ValueError(f"{artifact.family} prediction requires the graph")
        if artifact.family == "evolve_gcn":
            return predict_evolvegcn(artifact, graph, features, steps)
        return predict_gcn(artifact, graph, features, steps)
    x = features.take(np.arange(features.shape[0]))
    if artifact.family == "logreg":
        return logreg_forward(artifact.params, x)
    if artifact.family == "mlp":
        return mlp_forward(artifact.params, x)
    return forest_forward(artifact.params, x)


def classify(probs: np.ndarray) -> np.ndarray:
    """Argmax with ties broken toward licit (the conservative call)."""
    return (probs[:, 1] > probs[:, 0]).astype(np.int8)
