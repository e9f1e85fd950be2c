import os
from pathlib import Path

import numpy as np
import pytest

from chronograph.graph import TemporalGraph, build_graph, ingest
from chronograph.synthetic import planted_neighborhood_graph, synthetic_graph, write_dataset

TINY_FEATURES = "10,1,0.1,0.2\n20,1,0.3,0.4\n30,2,0.5,0.6\n"
TINY_EDGES = "txId1,txId2\n10,20\n"
TINY_CLASSES = "txId,class\n10,1\n20,2\n"


def write_tiny_dataset(directory: Path) -> dict[str, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "features": directory / "features.csv",
        "edges": directory / "edges.csv",
        "classes": directory / "classes.csv",
    }
    paths["features"].write_text(TINY_FEATURES)
    paths["edges"].write_text(TINY_EDGES)
    paths["classes"].write_text(TINY_CLASSES)
    return paths


@pytest.fixture()
def tiny_dataset(tmp_path) -> dict[str, Path]:
    """The 3-node fixture: edge 10->20 at step 1, isolated 30 at step 2."""
    return write_tiny_dataset(tmp_path / "tiny")


@pytest.fixture()
def tiny_graph(tiny_dataset) -> TemporalGraph:
    return ingest(
        tiny_dataset["features"], tiny_dataset["edges"], tiny_dataset["classes"],
        local_count=2,
    )


@pytest.fixture(scope="session")
def synth_graph() -> TemporalGraph:
    return synthetic_graph(steps=5, nodes_per_step=40, seed=0)


@pytest.fixture(scope="session")
def synth_dataset_dir(tmp_path_factory, synth_graph) -> Path:
    directory = tmp_path_factory.mktemp("synth")
    write_dataset(synth_graph, directory)
    return directory


@pytest.fixture(scope="session")
def planted_graph() -> TemporalGraph:
    return planted_neighborhood_graph(seed=0)


def random_temporal_graph(seed: int, steps: int = 2, nodes_per_step: int = 6,
                          feature_count: int = 3) -> TemporalGraph:
    """Small random labeled graph for gradient checks."""
    rng = np.random.default_rng(seed)
    total = steps * nodes_per_step
    ts = np.repeat(np.arange(1, steps + 1), nodes_per_step)
    features = np.column_stack(
        [ts.astype(float), rng.normal(0, 1, (total, feature_count - 1))]
    )
    edges = []
    for t in range(steps):
        base = t * nodes_per_step
        for _ in range(nodes_per_step * 2):
            u, v = rng.integers(0, nodes_per_step, 2)
            if u != v:
                edges.append((base + int(u), base + int(v)))
    edges = np.unique(np.asarray(edges, dtype=np.int64), axis=0)
    labels = rng.integers(0, 2, total).astype(np.int8)
    return build_graph(np.arange(total) * 11 + 1, ts, features, edges, labels)


def elliptic_dir() -> Path | None:
    """Directory with the production CSV release, when supplied locally."""
    env = os.environ.get("CHRONOGRAPH_ELLIPTIC_DIR")
    if env and Path(env).is_dir():
        return Path(env)
    default = Path(__file__).resolve().parent.parent / "data" / "elliptic"
    if default.is_dir():
        return default
    return None


requires_dataset = pytest.mark.skipif(
    elliptic_dir() is None,
    reason="production dataset not supplied (set CHRONOGRAPH_ELLIPTIC_DIR)",
)
