"""Temporal evaluation protocol: split, metrics, experiments, reports.

The protocol is a single temporal split (train on the first ``boundary``
steps, test on the rest) because that is what deployment looks like: models
screen transactions that arrive after everything they were fitted on.
Training is inductive; the instrumentation in graph/feature access lets
tests prove no experiment reads test-step data while fitting.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .features import FeatureMatrix, assemble
from .graph import ILLICIT, LICIT, UNKNOWN, TemporalGraph

TABLE_COLUMNS = ("Method", "IllicitPrecision", "IllicitRecall", "IllicitF1", "MicroAvgF1")

_DISPLAY = {
    "logreg": "Logistic Regr",
    "mlp": "MLP",
    "forest": "RandomForest",
    "gcn": "GCN",
    "skip_gcn": "Skip-GCN",
    "evolve_gcn": "EvolveGCN",
}

FEATURE_MODES = ("LF", "AF", "LF+NE", "AF+NE")


@dataclass(frozen=True)
class SplitSpec:
    """Train on steps 1..boundary, test on boundary+1..T."""

    boundary: int = 34

    def validate(self, num_steps: int) -> None:
        if not 1 <= self.boundary < num_steps:
            raise ValueError(
                f"split boundary {self.boundary} out of range 1..{num_steps - 1}"
            )


def temporal_split(graph: TemporalGraph, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Disjoint (train, test) index sets over the labeled nodes."""
    spec.validate(graph.num_steps)
    labeled = graph.labels != UNKNOWN
    ts = graph.nodes.time_steps
    train = np.flatnonzero(labeled & (ts <= spec.boundary))
    test = np.flatnonzero(labeled & (ts > spec.boundary))
    return train, test


@dataclass
class MetricsReport:
    illicit_precision: float
    illicit_recall: float
    illicit_f1: float
    licit_precision: float
    licit_recall: float
    licit_f1: float
    micro_f1: float
    support_illicit: int
    support_licit: int
    flags: list[str] = field(default_factory=list)
    per_step_f1: list[dict] | None = None

    def to_dict(self) -> dict:
        out = {
            "illicit_precision": self.illicit_precision,
            "illicit_recall": self.illicit_recall,
            "illicit_f1": self.illicit_f1,
            "licit_precision": self.licit_precision,
            "licit_recall": self.licit_recall,
            "licit_f1": self.licit_f1,
            "micro_avg_f1": self.micro_f1,
            "support_illicit": self.support_illicit,
            "support_licit": self.support_licit,
            "flags": self.flags,
        }
        if self.per_step_f1 is not None:
            out["per_step_f1"] = self.per_step_f1
        return out


def _prf(tp: int, fp: int, fn: int, flags: list[str], tag: str) -> tuple[float, float, float]:
    if tp + fp == 0:
        precision = 0.0
        flags.append(f"{tag}_precision_zero_division")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        flags.append(f"{tag}_recall_zero_division")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def compute_metrics(pred_labels: np.ndarray, true_labels: np.ndarray) -> MetricsReport:
    """Per-class precision/recall/F1 plus micro-average over labeled nodes.

    Micro-averaged F1 in single-label binary classification equals accuracy;
    that identity is asserted on every call.
    """
    pred_labels = np.asarray(pred_labels)
    true_labels = np.asarray(true_labels)
    if pred_labels.shape != true_labels.shape or pred_labels.size == 0:
        raise ValueError("predictions and labels must be equal-length and non-empty")
    if np.any(true_labels == UNKNOWN):
        raise ValueError("unknown labels must be excluded before computing metrics")

    flags: list[str] = []
    tp_i = int(np.count_nonzero((pred_labels == ILLICIT) & (true_labels == ILLICIT)))
    fp_i = int(np.count_nonzero((pred_labels == ILLICIT) & (true_labels == LICIT)))
    fn_i = int(np.count_nonzero((pred_labels == LICIT) & (true_labels == ILLICIT)))
    tn_i = int(np.count_nonzero((pred_labels == LICIT) & (true_labels == LICIT)))
    p_i, r_i, f_i = _prf(tp_i, fp_i, fn_i, flags, "illicit")
    p_l, r_l, f_l = _prf(tn_i, fn_i, fp_i, flags, "licit")

    total = pred_labels.size
    correct = tp_i + tn_i
    micro = correct / total
    accuracy = float(np.mean(pred_labels == true_labels))
    assert abs(micro - accuracy) < 1e-12, "micro-avg F1 must equal accuracy"

    return MetricsReport(
        illicit_precision=p_i,
        illicit_recall=r_i,
        illicit_f1=f_i,
        licit_precision=p_l,
        licit_recall=r_l,
        licit_f1=f_l,
        micro_f1=micro,
        support_illicit=tp_i + fn_i,
        support_licit=tn_i + fp_i,
        flags=flags,
    )


def per_timestep_f1(
    pred_labels: np.ndarray,
    labels: np.ndarray,
    graph: TemporalGraph,
    test_steps,
) -> list[dict]:
    """Illicit F1 per step over that step's labeled nodes.

    Steps without labeled nodes yield f1 None with an ``absent`` flag rather
    than a misleading zero.
    """
    test_steps = list(test_steps)
    if not test_steps:
        raise ValueError("test steps must be non-empty")
    ts = graph.nodes.time_steps
    labels = np.asarray(labels)
    pred_labels = np.asarray(pred_labels)
    series = []
    for t in test_steps:
        idx = np.flatnonzero((ts == t) & (labels != UNKNOWN))
        support = int(np.count_nonzero(labels[idx] == ILLICIT))
        if idx.size == 0:
            series.append({"time_step": int(t), "f1": None, "support_illicit": 0,
                           "flags": ["absent_no_labeled_nodes"]})
            continue
        report = compute_metrics(pred_labels[idx], labels[idx])
        series.append(
            {
                "time_step": int(t),
                "f1": report.illicit_f1,
                "support_illicit": support,
                "flags": report.flags,
            }
        )
    return series


@dataclass
class ExperimentConfig:
    model: str
    feature_mode: str = "AF"
    boundary: int = 34
    seed: int = 0
    retrain_per_step: bool = False
    class_weights: tuple[float, float] = models.DEFAULT_CLASS_WEIGHTS
    embedding_source: str = "gcn"   # family used to produce NE columns
    hyperparams: dict = field(default_factory=dict)
    n_jobs: int = 1

    def __post_init__(self):
        if self.model not in _DISPLAY:
            raise ValueError(f"unknown model {self.model!r}")
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature mode {self.feature_mode!r}")
        if "+NE" in self.feature_mode and self.embedding_source not in ("gcn", "skip_gcn"):
            raise ValueError("NE modes need a (skip-)GCN embedding source")

    @property
    def experiment_id(self) -> str:
        tag = self.feature_mode.lower().replace("+", "-")
        rid = f"{self.model}_{tag}_b{self.boundary}_seed{self.seed}"
        return rid + ("_retrain" if self.retrain_per_step else "")

    @property
    def method_name(self) -> str:
        name = _DISPLAY[self.model]
        if self.model in ("logreg", "mlp", "forest"):
            name = f"{name}^{self.feature_mode}"
        if self.retrain_per_step:
            name += " (retrained per step)"
        return name


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    metrics: MetricsReport
    artifact: models.ModelArtifact | None
    report_row: dict
    paths: dict[str, Path] = field(default_factory=dict)


def train_for_config(
    config: ExperimentConfig,
    graph: TemporalGraph,
    features: FeatureMatrix,
    labels: np.ndarray,
    train_mask: np.ndarray,
    train_steps,
) -> models.ModelArtifact:
    hp = dict(config.hyperparams)
    common = {"seed": config.seed, "class_weights": config.class_weights}
    if config.model == "logreg":
        return models.train_logreg(features, labels, train_mask, **common, **hp)
    if config.model == "mlp":
        return models.train_mlp(features, labels, train_mask, **common, **hp)
    if config.model == "forest":
        return models.train_random_forest(
            features, labels, train_mask, n_jobs=config.n_jobs, **common, **hp
        )
    if config.model == "gcn":
        return models.train_gcn(
            graph, features, labels, train_mask, steps=train_steps, **common, **hp
        )
    if config.model == "skip_gcn":
        return models.train_gcn(
            graph, features, labels, train_mask, steps=train_steps, skip=True,
            **common, **hp
        )
    return models.train_evolvegcn(
        graph, features, labels, train_mask, steps=train_steps, **common, **hp
    )


def build_features_for_mode(
    config: ExperimentConfig,
    graph: TemporalGraph,
    embedding_artifact: models.ModelArtifact | None = None,
) -> tuple[FeatureMatrix, models.ModelArtifact | None]:
    """Assemble the config's feature set; trains the NE source if needed.

    The embedding source is a (skip-)GCN trained on the same split, seed and
    class weights, over AF inputs; pass ``embedding_artifact`` to reuse one.
    """
    base_mode = config.feature_mode.split("+")[0]
    if "+NE" not in config.feature_mode:
        return assemble(graph.nodes, base_mode), None
    if embedding_artifact is None:
        af = assemble(graph.nodes, "AF")
        train_mask, _ = temporal_split(graph, SplitSpec(config.boundary))
        embedding_artifact = models.train_gcn(
            graph,
            af,
            graph.labels,
            train_mask,
            steps=range(1, config.boundary + 1),
            skip=(config.embedding_source == "skip_gcn"),
            seed=config.seed,
            class_weights=config.class_weights,
        )
    embeddings = models.extract_embeddings(
        embedding_artifact, graph, assemble(graph.nodes, "AF")
    )
    return assemble(graph.nodes, base_mode, embeddings), embedding_artifact


def run_experiment(
    config: ExperimentConfig,
    graph: TemporalGraph,
    out_dir=None,
    embedding_artifact: models.ModelArtifact | None = None,
) -> ExperimentResult:
    """Split, assemble, train, predict on the test span, emit reports."""
    if config.retrain_per_step:
        return retrain_per_step(config, graph, out_dir, embedding_artifact)
    split = SplitSpec(config.boundary)
    train_mask, test_mask = temporal_split(graph, split)
    features, embedding_artifact = build_features_for_mode(
        config, graph, embedding_artifact
    )
    artifact = train_for_config(
        config, graph, features, graph.labels, train_mask,
        range(1, config.boundary + 1),
    )
    probs = models.predict(artifact, features, graph)
    pred = models.classify(probs)
    metrics = compute_metrics(pred[test_mask], graph.labels[test_mask])
    test_steps = range(config.boundary + 1, graph.num_steps + 1)
    metrics.per_step_f1 = per_timestep_f1(pred, graph.labels, graph, test_steps)
    row = _report_row(config, metrics, artifact)
    paths = _emit(config, row, metrics, artifact, out_dir)
    return ExperimentResult(config, metrics, artifact, row, paths)


def retrain_per_step(
    config: ExperimentConfig,
    graph: TemporalGraph,
    out_dir=None,
    embedding_artifact: models.ModelArtifact | None = None,
) -> ExperimentResult:
    """Refit after every test step on all labels seen so far, test on t.

    Models the optimistic analyst workflow where ground truth arrives right
    after each step closes.
    """
    split = SplitSpec(config.boundary)
    split.validate(graph.num_steps)
    features, embedding_artifact = build_features_for_mode(
        config, graph, embedding_artifact
    )
    labels = graph.labels
    ts = graph.nodes.time_steps
    labeled = labels != UNKNOWN
    series = []
    pooled_pred = []
    pooled_true = []
    artifact = None
    for t in range(config.boundary + 1, graph.num_steps + 1):
        train_mask = np.flatnonzero(labeled & (ts < t))
        eval_mask = np.flatnonzero(labeled & (ts == t))
        if eval_mask.size == 0:
            series.append({"time_step": t, "f1": None, "support_illicit": 0,
                           "flags": ["absent_no_labeled_nodes"]})
            continue
        artifact = train_for_config(
            config, graph, features, labels, train_mask, range(1, t)
        )
        probs = models.predict(artifact, features, graph)
        pred = models.classify(probs)
        step_metrics = compute_metrics(pred[eval_mask], labels[eval_mask])
        series.append(
            {
                "time_step": t,
                "f1": step_metrics.illicit_f1,
                "support_illicit": step_metrics.support_illicit,
                "flags": step_metrics.flags,
            }
        )
        pooled_pred.append(pred[eval_mask])
        pooled_true.append(labels[eval_mask])
    metrics = compute_metrics(np.concatenate(pooled_pred), np.concatenate(pooled_true))
    metrics.per_step_f1 = series
    row = _report_row(config, metrics, artifact)
    paths = _emit(config, row, metrics, artifact, out_dir)
    return ExperimentResult(config, metrics, artifact, row, paths)


def _report_row(
    config: ExperimentConfig,
    metrics: MetricsReport,
    artifact: models.ModelArtifact | None,
) -> dict:
    return {
        "experiment_id": config.experiment_id,
        "method": config.method_name,
        "model": config.model,
        "feature_mode": config.feature_mode,
        "boundary": config.boundary,
        "seed": config.seed,
        "retrain_per_step": config.retrain_per_step,
        "class_weights": list(config.class_weights),
        "hyperparams": artifact.hyperparams if artifact else dict(config.hyperparams),
        **metrics.to_dict(),
    }


def _format(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _emit(
    config: ExperimentConfig,
    row: dict,
    metrics: MetricsReport,
    artifact: models.ModelArtifact | None,
    out_dir,
) -> dict[str, Path]:
    if out_dir is None:
        return {}
    out_dir = Path(out_dir)
    rid = config.experiment_id
    paths = {}

    reports = out_dir / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    paths["report_json"] = reports / f"{rid}.json"
    paths["report_json"].write_text(
        json.dumps(row, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )
    paths["report_csv"] = reports / f"{rid}.csv"
    csv_values = (
        row["method"],
        _format(metrics.illicit_precision),
        _format(metrics.illicit_recall),
        _format(metrics.illicit_f1),
        _format(metrics.micro_f1),
    )
    paths["report_csv"].write_text(
        ",".join(TABLE_COLUMNS) + "\n" + ",".join(csv_values) + "\n",
        encoding="utf-8",
    )

    if metrics.per_step_f1 is not None:
        series_dir = out_dir / "series"
        series_dir.mkdir(parents=True, exist_ok=True)
        paths["series_csv"] = series_dir / f"{rid}.csv"
        lines = ["time_step,f1,support_illicit,flags"]
        for entry in metrics.per_step_f1:
            lines.append(
                ",".join(
                    (
                        str(entry["time_step"]),
                        _format(entry["f1"]),
                        str(entry["support_illicit"]),
                        ";".join(entry["flags"]),
                    )
                )
            )
        paths["series_csv"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    if artifact is not None:
        artifacts_dir = out_dir / "artifacts"
        artifacts_dir.mkdir(parents=True, exist_ok=True)
        paths["artifact"] = models.save_artifact(artifact, artifacts_dir / f"{rid}.json")
    return paths


def full_benchmark(
    graph: TemporalGraph,
    out_dir=None,
    boundary: int = 34,
    seeds: tuple[int, ...] = (0, 1, 2),
    n_jobs: int = 1,
    hyperparams: dict[str, dict] | None = None,
    progress=None,
) -> dict[tuple, ExperimentResult]:
    """Every benchmark row: non-graph models on AF/LF, graph models over
    ``seeds``, the +NE enhancements, and the retrained-per-step forest.

    ``hyperparams`` optionally overrides per-family settings (tests shrink
    them; the defaults reproduce the reference protocol). Results are keyed
    by (model, feature_mode, seed, retrain_per_step).
    """
    hyperparams = hyperparams or {}
    results: dict[tuple, ExperimentResult] = {}

    def run(model, mode, seed=0, retrain=False, embedding_artifact=None):
        config = ExperimentConfig(
            model=model, feature_mode=mode, boundary=boundary, seed=seed,
            retrain_per_step=retrain,
            hyperparams=dict(hyperparams.get(model, {})), n_jobs=n_jobs,
        )
        out = run_experiment(
            config, graph, out_dir=out_dir, embedding_artifact=embedding_artifact
        )
        results[(model, mode, seed, retrain)] = out
        if progress is not None:
            progress(config.experiment_id, out.metrics.illicit_f1)
        return out

    for mode in ("AF", "LF"):
        run("logreg", mode)
        run("forest", mode)
        run("mlp", mode)
    for seed in seeds:
        run("gcn", "AF", seed)
        run("skip_gcn", "AF", seed)
        run("evolve_gcn", "AF", seed)
    ne_source = results[("gcn", "AF", seeds[0], False)].artifact
    run("forest", "AF+NE", seed=seeds[0], embedding_artifact=ne_source)
    run("mlp", "AF+NE", seed=seeds[0], embedding_artifact=ne_source)
    run("forest", "AF", seed=seeds[0], retrain=True)
    return results


def load_report_rows(out_dir) -> list[dict]:
    reports = Path(out_dir) / "reports"
    if not reports.is_dir():
        return []
    rows = []
    for path in sorted(reports.glob("*.json")):
        rows.append(json.loads(path.read_text(encoding="utf-8")))
    return rows


def render_table(rows: list[dict]) -> str:
    """Fixed-width text table with the standard report columns."""
    header = ("Method", "Illicit Precision", "Illicit Recall", "Illicit F1", "MicroAVG F1")
    body = [
        (
            r["method"],
            f"{r['illicit_precision']:.3f}",
            f"{r['illicit_recall']:.3f}",
            f"{r['illicit_f1']:.3f}",
            f"{r['micro_avg_f1']:.3f}",
        )
        for r in rows
    ]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    lines.append("  ".join("-" * w for w in widths))
    for b in body:
        lines.append("  ".join(b[i].ljust(widths[i]) for i in range(len(header))))
    return "\n".join(lines)
