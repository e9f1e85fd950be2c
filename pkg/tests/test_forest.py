import numpy as np
import pytest

from chronograph.features import FeatureMatrix
from chronograph.models import classify, forest_forward, gini_impurity, predict, train_random_forest
from chronograph.models.forest import _fit_tree, tree_predict
from chronograph.numerics import RngStream


def make_features(x):
    x = np.asarray(x, dtype=float)
    return FeatureMatrix(x, ("local",) * x.shape[1],
                         tuple(f"f{i}" for i in range(x.shape[1])))


def two_gaussians(n_per_class=100, seed=0, spread=1.0):
    rng = np.random.default_rng(seed)
    x = np.vstack(
        [rng.normal(-1.5, spread, (n_per_class, 5)), rng.normal(1.5, spread, (n_per_class, 5))]
    )
    y = np.repeat([0, 1], n_per_class).astype(np.int8)
    perm = rng.permutation(len(y))
    return x[perm], y[perm]


def test_gini_closed_forms():
    assert gini_impurity(np.array([2.0, 2.0])) == 0.5
    assert gini_impurity(np.array([2.0, 0.0])) == 0.0
    assert gini_impurity(np.array([0.0, 2.0])) == 0.0
    # A (2,2) parent split into pure (2,0) and (0,2) children gains 0.5.
    parent = gini_impurity(np.array([2.0, 2.0]))
    children = 0.5 * gini_impurity(np.array([2.0, 0.0])) + 0.5 * gini_impurity(np.array([0.0, 2.0]))
    assert parent - children == 0.5


def test_perfect_split_found():
    x = np.array([[0.0], [1.0], [10.0], [11.0]])
    y = np.array([0, 0, 1, 1], dtype=np.int64)
    tree = _fit_tree(x, y, np.array([1.0, 1.0]), 1, False, RngStream(0).child("t"))
    probs = tree_predict(tree, x)
    assert np.array_equal(probs, np.array([[1, 0], [1, 0], [0, 1], [0, 1]], dtype=float))


def test_single_unbootstrapped_tree_memorizes_consistent_data():
    x, y = two_gaussians(40, seed=3)
    fm = make_features(x)
    art = train_random_forest(
        fm, y, np.arange(len(y)), estimators=1, max_features=x.shape[1],
        bootstrap=False, seed=0, class_weights=(1.0, 1.0),
    )
    assert np.array_equal(classify(predict(art, fm)), y)


def test_matches_sklearn_reference_forest():
    """Independent reference: sklearn forest on the same 200-sample fixture."""
    sklearn = pytest.importorskip("sklearn.ensemble")
    x, y = two_gaussians(100, seed=5, spread=1.6)
    x_test, y_test = two_gaussians(60, seed=99, spread=1.6)
    fm = make_features(x)
    art = train_random_forest(
        fm, y, np.arange(len(y)), estimators=50, max_features=3, seed=1,
        class_weights=(1.0, 1.0),
    )
    ours = float(np.mean(classify(forest_forward(art.params, x_test)) == y_test))
    ref = sklearn.RandomForestClassifier(
        n_estimators=50, max_features=3, random_state=1
    ).fit(x, y)
    theirs = float(np.mean(ref.predict(x_test) == y_test))
    assert ours > 0.95
    assert abs(ours - theirs) <= 0.02


def test_prediction_invariant_to_tree_order():
    x, y = two_gaussians(50, seed=7)
    fm = make_features(x)
    art = train_random_forest(fm, y, np.arange(len(y)), estimators=12,
                              max_features=3, seed=2)
    base = forest_forward(art.params, x)
    rng = np.random.default_rng(0)
    shuffled = {"trees": [art.params["trees"][i] for i in rng.permutation(12)]}
    assert np.allclose(forest_forward(shuffled, x), base, atol=1e-12)


def test_unanimous_leaves_give_hard_probabilities():
    x = np.array([[0.0], [10.0]])
    y = np.array([0, 1], dtype=np.int8)
    fm = make_features(x)
    art = train_random_forest(fm, y, np.arange(2), estimators=5, max_features=1,
                              bootstrap=False, seed=0)
    probs = predict(art, fm)
    assert set(np.unique(probs)) <= {0.0, 1.0}


def test_deterministic_and_parallel_equivalence():
    x, y = two_gaussians(40, seed=11)
    fm = make_features(x)
    seq = train_random_forest(fm, y, np.arange(len(y)), estimators=8, max_features=2,
                              seed=3, n_jobs=1)
    par = train_random_forest(fm, y, np.arange(len(y)), estimators=8, max_features=2,
                              seed=3, n_jobs=2)
    for ta, tb in zip(seq.params["trees"], par.params["trees"]):
        for key in ta:
            assert np.array_equal(ta[key], tb[key])


def test_empty_mask_rejected():
    x, y = two_gaussians(10, seed=0)
    with pytest.raises(ValueError, match="empty"):
        train_random_forest(make_features(x), y, np.array([], dtype=int))


def test_class_weights_shift_leaf_distributions():
    # A stump over mixed labels weights its histogram by class.
    x = np.array([[0.0], [0.0], [0.0], [0.0]])
    y = np.array([0, 0, 1, 1], dtype=np.int8)
    fm = make_features(x)
    art = train_random_forest(fm, y, np.arange(4), estimators=1, max_features=1,
                              bootstrap=False, seed=0, class_weights=(0.3, 0.7))
    probs = predict(art, fm)
    assert np.allclose(probs[0], [0.3, 0.7], atol=1e-12)
