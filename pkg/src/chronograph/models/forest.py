"""Random forest grown from scratch with class-weighted Gini splits.

Each tree trains on a bootstrap resample of the masked rows, considers a
fresh uniform feature subset at every split, and grows until nodes are pure
or no split improves the impurity. Prediction averages the leaf class
distributions across trees, so it is invariant to estimator order.
"""

from __future__ import annotations

import numpy as np
from joblib import Parallel, delayed

from ..features import FeatureMatrix
from ..numerics import RngStream
from .artifact import ModelArtifact
from .linear import DEFAULT_CLASS_WEIGHTS

_MIN_GAIN = 1e-12


def gini_impurity(weighted_counts: np.ndarray) -> float:
    """Gini impurity 1 - sum((w_c / w)^2) of a (possibly weighted) histogram."""
    total = weighted_counts.sum()
    if total <= 0:
        return 0.0
    p = weighted_counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(
    x: np.ndarray,
    samples: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    feature_ids: np.ndarray,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, cost) over the candidate features.

    Cost is the weight-averaged child impurity; the caller compares it to the
    parent impurity. Returns None when no feature admits a split.
    """
    total_w = w.sum()
    total_w1 = float(w[y == 1].sum())
    best = None
    for f in feature_ids:
        v = x[samples, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        sw = w[order]
        sw1 = np.where(y[order] == 1, sw, 0.0)
        cw = np.cumsum(sw)
        cw1 = np.cumsum(sw1)
        cut = np.flatnonzero(sv[:-1] < sv[1:])
        wl = cw[cut]
        wl1 = cw1[cut]
        wr = total_w - wl
        wr1 = total_w1 - wl1
        gini_l = 1.0 - ((wl1 / wl) ** 2 + ((wl - wl1) / wl) ** 2)
        gini_r = 1.0 - ((wr1 / wr) ** 2 + ((wr - wr1) / wr) ** 2)
        cost = (wl * gini_l + wr * gini_r) / total_w
        k = int(np.argmin(cost))
        if best is None or cost[k] < best[2]:
            i = cut[k]
            thr = 0.5 * (sv[i] + sv[i + 1])
            if thr >= sv[i + 1]:  # midpoint collapsed onto the right value
                thr = sv[i]
            best = (int(f), float(thr), float(cost[k]))
    return best


def _fit_tree(
    x: np.ndarray,
    y: np.ndarray,
    weight: np.ndarray,
    max_features: int,
    bootstrap: bool,
    rng: RngStream,
) -> dict[str, np.ndarray]:
    n, n_features = x.shape
    if bootstrap:
        rows = rng.integers(0, n, n).astype(np.int64)
    else:
        rows = np.arange(n, dtype=np.int64)
    m = min(max_features, n_features)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[np.ndarray] = []

    # Depth-first growth with an explicit stack of (node_id, sample rows).
    stack: list[tuple[int, np.ndarray]] = []

    def new_node(samples: np.ndarray) -> int:
        node_id = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        w = weight[y[samples]]
        counts = np.array(
            [w[y[samples] == 0].sum(), w[y[samples] == 1].sum()], dtype=np.float64
        )
        value.append(counts / counts.sum())
        stack.append((node_id, samples))
        return node_id

    new_node(rows)
    while stack:
        node_id, samples = stack.pop()
        ys = y[samples]
        if ys.min() == ys.max():
            continue  # pure
        w = weight[ys]
        counts = np.array([w[ys == 0].sum(), w[ys == 1].sum()])
        parent_gini = gini_impurity(counts)
        candidates = rng.choice(n_features, m, replace=False).astype(np.int64)
        split = _best_split(x, samples, ys, w, candidates)
        if split is None:
            continue
        f, thr, cost = split
        if parent_gini - cost <= _MIN_GAIN:
            continue
        go_left = x[samples, f] <= thr
        feature[node_id] = f
        threshold[node_id] = thr
        right[node_id] = new_node(samples[~go_left])
        left[node_id] = new_node(samples[go_left])

    return {
        "feature": np.asarray(feature, dtype=np.int32),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int32),
        "right": np.asarray(right, dtype=np.int32),
        "value": np.asarray(value, dtype=np.float64),
    }


def tree_predict(tree: dict[str, np.ndarray], x: np.ndarray) -> np.ndarray:
    node = np.zeros(len(x), dtype=np.int64)
    active = np.flatnonzero(tree["feature"][node] >= 0)
    while active.size:
        cur = node[active]
        go_left = x[active, tree["feature"][cur]] <= tree["threshold"][cur]
        node[active] = np.where(go_left, tree["left"][cur], tree["right"][cur])
        active = active[tree["feature"][node[active]] >= 0]
    return tree["value"][node]


def forest_forward(params: dict, x: np.ndarray) -> np.ndarray:
    probs = np.zeros((len(x), 2), dtype=np.float64)
    for tree in params["trees"]:
        probs += tree_predict(tree, x)
    return probs / len(params["trees"])


def train_random_forest(
    features: FeatureMatrix,
    labels: np.ndarray,
    mask: np.ndarray,
    estimators: int = 50,
    max_features: int = 50,
    seed: int = 0,
    class_weights: tuple[float, float] = DEFAULT_CLASS_WEIGHTS,
    bootstrap: bool = True,
    n_jobs: int = 1,
) -> ModelArtifact:
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("training mask is empty")
    x = features.take(mask)
    y = np.asarray(labels)[mask].astype(np.int64)
    weight = np.asarray(class_weights, dtype=np.float64)
    root = RngStream(seed, ("forest",))

    def fit(i: int) -> dict[str, np.ndarray]:
        return _fit_tree(x, y, weight, max_features, bootstrap, root.child(f"tree-{i}"))

    if n_jobs == 1:
        trees = [fit(i) for i in range(estimators)]
    else:
        trees = Parallel(n_jobs=n_jobs)(delayed(fit)(i) for i in range(estimators))

    return ModelArtifact(
        family="forest",
        params={"trees": trees},
        hyperparams={
            "estimators": estimators,
            "max_features": max_features,
            "class_weights": list(class_weights),
            "bootstrap": bootstrap,
        },
        seed=seed,
        feature_count=x.shape[1],
    )
