"""Inductive contract: training never touches data past the split boundary.

Two instruments:
* access counters on graph slices and feature-row reads;
* label poisoning -- flipping every test-step label must leave the trained
  parameters bit-identical, proving those labels were never read.
"""

import numpy as np
import pytest

from chronograph.bench import SplitSpec, temporal_split
from chronograph.features import assemble
from chronograph.graph import ILLICIT, LICIT
from chronograph.models import (
    train_evolvegcn,
    train_gcn,
    train_logreg,
    train_mlp,
    train_random_forest,
)

BOUNDARY = 4

TRAINERS = {
    "logreg": lambda g, fm, labels, mask: train_logreg(fm, labels, mask, epochs=10),
    "mlp": lambda g, fm, labels, mask: train_mlp(fm, labels, mask, epochs=10),
    "forest": lambda g, fm, labels, mask: train_random_forest(
        fm, labels, mask, estimators=4, max_features=4
    ),
    "gcn": lambda g, fm, labels, mask: train_gcn(
        g, fm, labels, mask, d=4, epochs=10, steps=range(1, BOUNDARY + 1)
    ),
    "skip_gcn": lambda g, fm, labels, mask: train_gcn(
        g, fm, labels, mask, d=4, epochs=10, skip=True, steps=range(1, BOUNDARY + 1)
    ),
    "evolve_gcn": lambda g, fm, labels, mask: train_evolvegcn(
        g, fm, labels, mask, d=4, epochs=5, steps=range(1, BOUNDARY + 1)
    ),
}


@pytest.mark.parametrize("family", sorted(TRAINERS))
def test_training_never_accesses_test_steps(synth_graph, family):
    graph = synth_graph
    fm = assemble(graph.nodes, "AF")
    train_mask, _ = temporal_split(graph, SplitSpec(BOUNDARY))
    ts = graph.nodes.time_steps

    graph.reset_access_counts()
    fm.reset_access_log()
    TRAINERS[family](graph, fm, graph.labels, train_mask)

    touched_steps = [t for t, c in graph.slice_access_counts.items() if c > 0]
    assert all(t <= BOUNDARY for t in touched_steps), touched_steps
    rows = fm.accessed_rows()
    assert rows.size > 0
    assert np.all(ts[rows] <= BOUNDARY)
    graph.reset_access_counts()
    fm.reset_access_log()


@pytest.mark.parametrize("family", sorted(TRAINERS))
def test_training_invariant_to_poisoned_test_labels(synth_graph, family):
    graph = synth_graph
    fm = assemble(graph.nodes, "AF")
    train_mask, _ = temporal_split(graph, SplitSpec(BOUNDARY))
    ts = graph.nodes.time_steps

    clean = TRAINERS[family](graph, fm, graph.labels, train_mask)

    poisoned = graph.labels.copy()
    test_rows = ts > BOUNDARY
    poisoned[test_rows] = np.where(
        poisoned[test_rows] == ILLICIT, LICIT, ILLICIT
    ).astype(np.int8)
    assert not np.array_equal(poisoned, graph.labels)
    dirty = TRAINERS[family](graph, fm, poisoned, train_mask)

    def flatten(params, out):
        for key in sorted(params):
            value = params[key]
            if isinstance(value, np.ndarray):
                out.append((key, value))
            elif isinstance(value, list):
                for i, tree in enumerate(value):
                    flatten(tree, out)
        return out

    for (ka, va), (kb, vb) in zip(flatten(clean.params, []), flatten(dirty.params, [])):
        assert ka == kb
        assert np.array_equal(va, vb), f"{family}:{ka} changed under poisoned test labels"
