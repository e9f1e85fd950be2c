import json

import numpy as np
import pytest

from chronograph.bench import (
    ExperimentConfig,
    SplitSpec,
    compute_metrics,
    full_benchmark,
    load_report_rows,
    per_timestep_f1,
    render_table,
    retrain_per_step,
    run_experiment,
    temporal_split,
)
from chronograph.graph import ILLICIT, LICIT, UNKNOWN


def test_split_partitions_labeled_nodes(synth_graph):
    train, test = temporal_split(synth_graph, SplitSpec(3))
    labeled = np.flatnonzero(synth_graph.labels != UNKNOWN)
    assert np.intersect1d(train, test).size == 0
    assert np.array_equal(np.union1d(train, test), labeled)
    ts = synth_graph.nodes.time_steps
    assert np.all(ts[train] <= 3)
    assert np.all(ts[test] > 3)


def test_split_last_step_only(synth_graph):
    t = synth_graph.num_steps
    _, test = temporal_split(synth_graph, SplitSpec(t - 1))
    assert np.all(synth_graph.nodes.time_steps[test] == t)


def test_split_boundary_validation(synth_graph):
    with pytest.raises(ValueError):
        temporal_split(synth_graph, SplitSpec(0))
    with pytest.raises(ValueError):
        temporal_split(synth_graph, SplitSpec(synth_graph.num_steps))


def test_metrics_closed_form():
    # TP=2, FP=1, FN=2, TN=1
    pred = np.array([ILLICIT, ILLICIT, ILLICIT, LICIT, LICIT, LICIT])
    true = np.array([ILLICIT, ILLICIT, LICIT, ILLICIT, ILLICIT, LICIT])
    m = compute_metrics(pred, true)
    assert m.illicit_precision == pytest.approx(2 / 3, abs=1e-12)
    assert m.illicit_recall == pytest.approx(0.5, abs=1e-12)
    assert m.illicit_f1 == pytest.approx(4 / 7, abs=1e-12)  # 0.5714
    assert m.support_illicit == 4
    assert m.micro_f1 == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize(
    "precision,recall,f1",
    [(0.956, 0.670, 0.788), (0.850, 0.624, 0.720)],
    ids=["forest-af-row", "evolve-row"],
)
def test_f1_harmonic_mean_reference_rows(precision, recall, f1):
    computed = 2 * precision * recall / (precision + recall)
    assert computed == pytest.approx(f1, abs=5e-4)


def test_metrics_zero_division_flags():
    pred = np.array([LICIT, LICIT])
    true = np.array([ILLICIT, LICIT])
    m = compute_metrics(pred, true)
    assert m.illicit_precision == 0.0
    assert m.illicit_f1 == 0.0
    assert "illicit_precision_zero_division" in m.flags


def test_metrics_reject_empty_and_unknown():
    with pytest.raises(ValueError):
        compute_metrics(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        compute_metrics(np.array([LICIT]), np.array([UNKNOWN]))


def test_metrics_order_invariant():
    rng = np.random.default_rng(0)
    pred = rng.integers(0, 2, 30)
    true = rng.integers(0, 2, 30)
    m1 = compute_metrics(pred, true)
    perm = rng.permutation(30)
    m2 = compute_metrics(pred[perm], true[perm])
    assert m1.to_dict() == m2.to_dict()


def test_micro_f1_equals_accuracy_identity():
    rng = np.random.default_rng(1)
    for _ in range(20):
        n = int(rng.integers(2, 50))
        pred = rng.integers(0, 2, n)
        true = rng.integers(0, 2, n)
        m = compute_metrics(pred, true)
        assert m.micro_f1 == pytest.approx(np.mean(pred == true), abs=1e-12)


def test_per_step_series_perfect_predictor(synth_graph):
    labels = synth_graph.labels
    series = per_timestep_f1(labels, labels, synth_graph, [4, 5])
    for entry in series:
        if entry["support_illicit"] > 0:
            assert entry["f1"] == 1.0


def test_per_step_series_all_licit_predictor(synth_graph):
    pred = np.full(synth_graph.num_nodes, LICIT)
    series = per_timestep_f1(pred, synth_graph.labels, synth_graph, [4, 5])
    for entry in series:
        assert entry["f1"] == 0.0
        assert any("zero_division" in f for f in entry["flags"])


def test_per_step_series_absent_step_flagged():
    from chronograph.graph import build_graph

    features = np.array([[1, 0.0], [1, 1.0], [2, 2.0]])
    g = build_graph([1, 2, 3], [1, 1, 2], features, np.empty((0, 2)),
                    np.array([ILLICIT, LICIT, UNKNOWN], dtype=np.int8))
    series = per_timestep_f1(
        np.array([ILLICIT, LICIT, LICIT]), g.labels, g, [1, 2]
    )
    assert series[1]["f1"] is None
    assert "absent_no_labeled_nodes" in series[1]["flags"]


def test_run_experiment_deterministic_files(synth_graph, tmp_path):
    config = ExperimentConfig(
        model="forest", feature_mode="AF", boundary=4, seed=7,
        hyperparams={"estimators": 8, "max_features": 6},
    )
    first = run_experiment(config, synth_graph, out_dir=tmp_path / "a")
    second = run_experiment(config, synth_graph, out_dir=tmp_path / "b")
    for key in ("report_json", "report_csv", "series_csv", "artifact"):
        assert first.paths[key].read_bytes() == second.paths[key].read_bytes(), key


def test_run_experiment_emits_table_schema(synth_graph, tmp_path):
    config = ExperimentConfig(
        model="logreg", feature_mode="LF", boundary=4, seed=1,
        hyperparams={"epochs": 50},
    )
    result = run_experiment(config, synth_graph, out_dir=tmp_path)
    row = json.loads(result.paths["report_json"].read_text())
    for key in ("method", "illicit_precision", "illicit_recall", "illicit_f1",
                "micro_avg_f1", "seed", "boundary", "feature_mode"):
        assert key in row
    header = result.paths["report_csv"].read_text().splitlines()[0]
    assert header == "Method,IllicitPrecision,IllicitRecall,IllicitF1,MicroAvgF1"
    series_header = result.paths["series_csv"].read_text().splitlines()[0]
    assert series_header == "time_step,f1,support_illicit,flags"
    assert row["method"] == "Logistic Regr^LF"
    rows = load_report_rows(tmp_path)
    assert len(rows) == 1
    assert "Logistic Regr^LF" in render_table(rows)


def test_retrain_first_step_matches_standard_split(synth_graph, tmp_path):
    base = dict(model="forest", feature_mode="AF", boundary=4, seed=3,
                hyperparams={"estimators": 6, "max_features": 6})
    standard = run_experiment(ExperimentConfig(**base), synth_graph)
    retrained = retrain_per_step(
        ExperimentConfig(**base, retrain_per_step=True), synth_graph
    )
    # At t = boundary+1 both trained on exactly steps 1..boundary.
    first_standard = standard.metrics.per_step_f1[0]
    first_retrained = retrained.metrics.per_step_f1[0]
    assert first_standard["time_step"] == first_retrained["time_step"]
    assert first_standard["f1"] == first_retrained["f1"]


def test_retrain_training_set_grows(synth_graph):
    labeled = synth_graph.labels != UNKNOWN
    ts = synth_graph.nodes.time_steps
    sizes = [
        int(np.count_nonzero(labeled & (ts < t)))
        for t in range(4, synth_graph.num_steps + 1)
    ]
    assert all(b > a for a, b in zip(sizes, sizes[1:]))


def test_ne_mode_appends_embedding_columns(synth_graph, tmp_path):
    config = ExperimentConfig(
        model="logreg", feature_mode="AF+NE", boundary=4, seed=2,
        hyperparams={"epochs": 30},
    )
    result = run_experiment(config, synth_graph, out_dir=tmp_path)
    total = synth_graph.nodes.total_count
    assert result.artifact.feature_count == total + 100
    assert result.report_row["feature_mode"] == "AF+NE"


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(model="svm")
    with pytest.raises(ValueError):
        ExperimentConfig(model="logreg", feature_mode="ZF")


@pytest.mark.parametrize(
    "model,mode,hp",
    [
        ("logreg", "LF", {"epochs": 20}),
        ("mlp", "AF", {"epochs": 20, "hidden": 8}),
        ("forest", "LF+NE", {"estimators": 4, "max_features": 4}),
        ("gcn", "AF", {"epochs": 15, "d": 4}),
        ("skip_gcn", "AF", {"epochs": 15, "d": 4}),
        ("evolve_gcn", "AF", {"epochs": 8, "d": 4}),
    ],
)
def test_every_family_runs_through_the_harness(synth_graph, tmp_path, model, mode, hp):
    """Smoke of the exact code path the full benchmark drives per row."""
    config = ExperimentConfig(model=model, feature_mode=mode, boundary=4,
                              seed=5, hyperparams=hp)
    result = run_experiment(config, synth_graph, out_dir=tmp_path)
    assert 0.0 <= result.metrics.illicit_f1 <= 1.0
    assert result.paths["report_json"].exists()
    series = result.metrics.per_step_f1
    assert [e["time_step"] for e in series] == [5]
    table = render_table(load_report_rows(tmp_path))
    assert result.config.method_name in table


def test_full_benchmark_covers_every_row(synth_graph, tmp_path):
    """The whole reproduction driver, shrunk onto synthetic data."""
    tiny = {
        "logreg": {"epochs": 15},
        "mlp": {"epochs": 15, "hidden": 6},
        "forest": {"estimators": 4, "max_features": 4},
        "gcn": {"epochs": 10, "d": 4},
        "skip_gcn": {"epochs": 10, "d": 4},
        "evolve_gcn": {"epochs": 5, "d": 4},
    }
    seen = []
    results = full_benchmark(
        synth_graph, out_dir=tmp_path, boundary=4, seeds=(0, 1), hyperparams=tiny,
        progress=lambda rid, f1: seen.append(rid),
    )
    # 6 AF/LF rows + 3 graph models x 2 seeds + 2 NE rows + retrained forest.
    assert len(results) == 15
    assert len(seen) == 15
    assert ("evolve_gcn", "AF", 1, False) in results
    assert ("forest", "AF", 0, True) in results
    assert results[("forest", "AF+NE", 0, False)].artifact.feature_count == \
        synth_graph.nodes.total_count + tiny["gcn"]["d"]
    rows = load_report_rows(tmp_path)
    assert len(rows) == 15
    for result in results.values():
        for entry in result.metrics.per_step_f1:
            assert entry["f1"] is None or 0.0 <= entry["f1"] <= 1.0
