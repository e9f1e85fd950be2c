"""Synthetic temporal transaction graphs.

Two generators:

* ``synthetic_graph`` emulates the production release at small scale: per
  step, one weakly connected component with homophilous directed edges,
  class-informative local features, and true one-hop aggregates appended, so
  the LF/AF distinction behaves like the real data.
* ``planted_neighborhood_graph`` plants labels that depend ONLY on neighbor
  features (own features carry no signal); feature-only models sit at chance
  while graph convolutions can read the neighborhood.

``write_dataset`` materializes any generated graph in the three-file CSV
schema.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .features import AggregateConfig, aggregate_neighbor_stats
from .graph import ILLICIT, LICIT, UNKNOWN, TemporalGraph, build_graph, export_csv
from .numerics import RngStream


def _spanning_edges(n: int, rng: RngStream) -> list[tuple[int, int]]:
    # Attach each node to a random earlier one: a single weak component.
    return [(int(rng.integers(0, i)), i) for i in range(1, n)]


def synthetic_graph(
    steps: int = 5,
    nodes_per_step: int = 40,
    seed: int = 0,
    illicit_rate: float = 0.2,
    label_rate: float = 0.7,
    extra_edge_factor: float = 0.6,
    homophily: float = 0.75,
) -> TemporalGraph:
    rng = RngStream(seed, ("synthetic",))
    node_counts = [
        int(nodes_per_step + rng.integers(-nodes_per_step // 4, nodes_per_step // 4 + 1))
        for _ in range(steps)
    ]
    total = sum(node_counts)
    ids = rng.permutation(total).astype(np.int64) * 7919 + 13

    ts = np.concatenate(
        [np.full(c, t + 1, dtype=np.int64) for t, c in enumerate(node_counts)]
    )
    latent = (rng.uniform(0, 1, total) < illicit_rate).astype(np.int8)

    edges = []
    offset = 0
    for c in node_counts:
        local_edges = _spanning_edges(c, rng.child(f"tree{offset}"))
        extra = int(c * extra_edge_factor)
        er = rng.child(f"extra{offset}")
        attempts = 0
        while extra > 0 and attempts < 20 * c:
            attempts += 1
            u, v = int(er.integers(0, c)), int(er.integers(0, c))
            if u == v:
                continue
            same = latent[offset + u] == latent[offset + v]
            if not same and er.uniform(0, 1, None) < homophily:
                continue  # prefer same-class payment partners
            local_edges.append((u, v))
            extra -= 1
        for u, v in local_edges:
            edges.append((offset + u, offset + v))
        offset += c
    edges = np.unique(np.asarray(edges, dtype=np.int64), axis=0)

    # Local features: time step, two class-informative columns, three noise.
    fr = rng.child("features")
    mu = np.where(latent == ILLICIT, 1.0, -1.0)
    informative = np.column_stack(
        [
            mu * 0.8 + fr.normal(0, 1, total),
            mu * 0.6 + fr.normal(0, 1, total),
        ]
    )
    noise = fr.normal(0, 1, (total, 3))
    local = np.column_stack([ts.astype(np.float64), informative, noise])

    labels = np.where(latent == 1, ILLICIT, LICIT).astype(np.int8)
    unlabeled = rng.child("labels").uniform(0, 1, total) >= label_rate
    labels[unlabeled] = UNKNOWN

    base = build_graph(ids, ts, local, edges, labels, local_count=local.shape[1])
    agg = aggregate_neighbor_stats(
        base,
        AggregateConfig(source_columns=(1, 2)),
    )
    full = np.hstack([local, agg.values])
    return build_graph(ids, ts, full, edges, labels, local_count=local.shape[1])


def planted_neighborhood_graph(
    steps: int = 3,
    nodes_per_step: int = 60,
    seed: int = 0,
    band: float = 0.06,
    skew: float = 0.10,
) -> TemporalGraph:
    """Labels planted in the two-hop neighborhood of a payload feature.

    Each step is a 3-regular circulant ring (offsets +-1 plus the antipode),
    so the propagation operator weights every neighbor equally. A node's
    label thresholds the twice-propagated payload with the node's OWN
    contribution removed; the decision margins exceed the self-loop weight,
    which makes the rule exactly representable by two propagation rounds yet
    leaves the node's own feature row carrying zero information about its
    label. Feature-only models sit at the class prior; graph convolutions can
    solve it. The band between the illicit and licit thresholds is unknown.
    """
    if nodes_per_step % 2 or nodes_per_step < 6:
        raise ValueError("nodes_per_step must be even and at least 6")
    rng = RngStream(seed, ("planted",))
    total = steps * nodes_per_step
    ids = np.arange(total, dtype=np.int64) * 31 + 5
    ts = np.repeat(np.arange(1, steps + 1), nodes_per_step).astype(np.int64)
    payload = np.where(rng.uniform(0, 1, total) < 0.5, 1.0, -1.0)

    half = nodes_per_step // 2
    edges = []
    for t in range(steps):
        offset = t * nodes_per_step
        for i in range(nodes_per_step):
            edges.append((offset + i, offset + (i + 1) % nodes_per_step))
            j = (i + half) % nodes_per_step
            if i < j:
                edges.append((offset + i, offset + j))
    edges = np.unique(np.asarray(edges, dtype=np.int64), axis=0)

    # Degree is exactly 3, so the self weight of the squared operator is 1/4.
    self_weight = 0.25
    hi = self_weight + band + skew
    lo = -(self_weight + band)
    labels = np.full(total, UNKNOWN, dtype=np.int8)
    for t in range(steps):
        offset = t * nodes_per_step
        idx = np.arange(offset, offset + nodes_per_step)
        a = np.zeros((nodes_per_step, nodes_per_step))
        for u, v in edges:
            if offset <= u < offset + nodes_per_step:
                a[u - offset, v - offset] = 1.0
                a[v - offset, u - offset] = 1.0
        a_tilde = a + np.eye(nodes_per_step)
        deg = a_tilde.sum(axis=1)
        a_hat = a_tilde / np.sqrt(np.outer(deg, deg))
        two_hop = a_hat @ a_hat
        z = (two_hop - np.diag(np.diag(two_hop))) @ payload[idx]
        labels[idx[z > hi]] = ILLICIT
        labels[idx[z < lo]] = LICIT

    features = np.column_stack([ts.astype(np.float64), payload])
    return build_graph(ids, ts, features, edges, labels, local_count=features.shape[1])


def write_dataset(graph: TemporalGraph, out_dir) -> dict[str, Path]:
    return export_csv(graph, Path(out_dir))
