"""Trained-model container with bit-exact JSON serialization.

Tensors are stored as base64 of their little-endian bytes, so a saved and
reloaded artifact reproduces predictions bit for bit, and two identical
seeded runs write identical files.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

ARTIFACT_VERSION = 1

FAMILIES = ("logreg", "mlp", "forest", "gcn", "skip_gcn", "evolve_gcn")
GRAPH_FAMILIES = ("gcn", "skip_gcn", "evolve_gcn")


@dataclass
class ModelArtifact:
    family: str
    params: dict
    hyperparams: dict
    seed: int
    feature_count: int
    loss_trace: list[float] = field(default_factory=list)
    version: int = ARTIFACT_VERSION

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")


def _encode(obj):
    if isinstance(obj, np.ndarray):
        arr = np.ascontiguousarray(obj)
        dtype = arr.dtype.newbyteorder("<")
        return {
            "__ndarray__": {
                "dtype": dtype.str,
                "shape": list(arr.shape),
                "data": base64.b64encode(arr.astype(dtype).tobytes()).decode("ascii"),
            }
        }
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            meta = obj["__ndarray__"]
            raw = base64.b64decode(meta["data"])
            arr = np.frombuffer(raw, dtype=np.dtype(meta["dtype"]))
            return arr.reshape(meta["shape"]).astype(np.dtype(meta["dtype"]).newbyteorder("=")).copy()
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def artifact_to_json(artifact: ModelArtifact) -> str:
    payload = {
        "version": artifact.version,
        "family": artifact.family,
        "seed": artifact.seed,
        "feature_count": artifact.feature_count,
        "hyperparams": _encode(artifact.hyperparams),
        "loss_trace": artifact.loss_trace,
        "params": _encode(artifact.params),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_artifact(artifact: ModelArtifact, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(artifact_to_json(artifact), encoding="utf-8")
    return path


def load_artifact(path) -> ModelArtifact:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return ModelArtifact(
        family=payload["family"],
        params=_decode(payload["params"]),
        hyperparams=_decode(payload["hyperparams"]),
        seed=payload["seed"],
        feature_count=payload["feature_count"],
        loss_trace=list(payload["loss_trace"]),
        version=payload["version"],
    )
