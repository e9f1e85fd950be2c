"""Global 2-D node layouts for the UI.

Coordinates are computed over ALL nodes at once (never per time step), so
the frame stays fixed while the analyst scrubs the time slider and layouts
remain comparable across steps. Two input modes: the raw feature rows, or the
pre-softmax output activations of a trained graph model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import FeatureMatrix, assemble
from ..graph import TemporalGraph
from ..models import ModelArtifact, gcn_activations
from ..numerics import pca_project

LAYOUT_MODES = ("raw", "gcn")


@dataclass(frozen=True)
class ProjectionLayout:
    mode: str                 # "raw" | "gcn"
    coords: np.ndarray        # N x 2
    model_ref: str | None = None

    def __post_init__(self):
        if self.mode not in LAYOUT_MODES:
            raise ValueError(f"unknown layout mode {self.mode!r}")
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError("layout coordinates must be N x 2")


def build_layout(
    graph: TemporalGraph,
    mode: str,
    features: FeatureMatrix | None = None,
    artifact: ModelArtifact | None = None,
) -> ProjectionLayout:
    """Project all nodes to 2-D; deterministic, so safe to cache and reuse."""
    if mode == "raw":
        if features is None:
            features = assemble(graph.nodes, "AF")
        coords = pca_project(features.values)
        return ProjectionLayout(mode="raw", coords=coords)
    if mode == "gcn":
        if artifact is None:
            raise ValueError("activation layout requires a trained graph model artifact")
        if features is None:
            features = assemble(graph.nodes, "AF")
        activations = gcn_activations(artifact, graph, features)
        coords = pca_project(activations)
        return ProjectionLayout(
            mode="gcn", coords=coords, model_ref=f"{artifact.family}:seed{artifact.seed}"
        )
    raise ValueError(f"unknown layout mode {mode!r}")
