"""Model serialization.

A checkpoint is a single JSON document holding the format version, the model
configuration, an opaque pipeline block (schema, vocabulary, normalization
stats, whatever the data layer wants to persist), and every named tensor as
a flat list of decimal values. Keys are sorted and floats use their shortest
round-trip representation, so saving the same model twice produces the same
bytes and load followed by save is the identity.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .arn import ArnParams
from .attention import SattParams
from .errors import DataError
from .gru import GruParams
from .model import Classifier, ModelConfig

FORMAT_VERSION = 1


def _zero_classifier(config: ModelConfig) -> Classifier:
    """Classifier with correctly shaped all-zero tensors, no RNG involved."""
    n, m = config.n, config.m
    if config.cell_kind == "arn":
        cell = ArnParams(
            Wx=np.zeros((n, m)),
            Wh=np.zeros((n, n)),
            satt=SattParams(Wq=np.zeros((n, n)), Wk=np.zeros((n, n)), Wv=np.zeros((n, n))),
        )
    else:
        cell = GruParams(
            W_R=np.zeros((n + m, n)),
            W_Z=np.zeros((n + m, n)),
            W_h=np.zeros((n + m, n)),
            n=n,
            m=m,
        )
    return Classifier(
        config=config,
        cell=cell,
        head_W=np.zeros((config.num_classes, n)),
        head_b=np.zeros(config.num_classes),
        embeddings=[np.zeros((v, config.embed_dim)) for v in config.vocab_sizes],
    )


def checkpoint_document(clf: Classifier, pipeline: dict | None = None) -> dict:
    config = asdict(clf.config)
    config["vocab_sizes"] = list(clf.config.vocab_sizes)
    tensors = [
        {"name": name, "shape": list(t.shape), "values": [float(v) for v in t.ravel()]}
        for name, t in sorted(clf.named_params().items())
    ]
    return {
        "format_version": FORMAT_VERSION,
        "config": config,
        "pipeline": pipeline if pipeline is not None else {},
        "tensors": tensors,
    }


def dumps_checkpoint(clf: Classifier, pipeline: dict | None = None) -> str:
    doc = checkpoint_document(clf, pipeline)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False) + "\n"


def save_checkpoint(path, clf: Classifier, pipeline: dict | None = None) -> None:
    text = dumps_checkpoint(clf, pipeline)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def loads_checkpoint(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"checkpoint is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataError("checkpoint root must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format_version {version!r}")
    raw_cfg = doc.get("config")
    if not isinstance(raw_cfg, dict):
        raise DataError("checkpoint is missing its config block")
    try:
        raw_cfg = dict(raw_cfg)
        raw_cfg["vocab_sizes"] = tuple(raw_cfg.get("vocab_sizes", ()))
        config = ModelConfig(**raw_cfg)
        config.validate()
    except (TypeError, ValueError) as exc:
        raise DataError(f"bad checkpoint config: {exc}") from None

    clf = _zero_classifier(config)
    params = clf.named_params()
    seen = set()
    for entry in doc.get("tensors", []):
        name = entry.get("name")
        if name not in params:
            raise DataError(f"checkpoint tensor {name!r} does not belong to this model")
        target = params[name]
        values = np.asarray(entry.get("values", []), dtype=np.float64)
        shape = tuple(entry.get("shape", []))
        if shape != target.shape or values.size != target.size:
            raise DataError(
                f"checkpoint tensor {name!r} has shape {shape}, expected {target.shape}"
            )
        target[...] = values.reshape(shape)
        seen.add(name)
    missing = sorted(set(params) - seen)
    if missing:
        raise DataError(f"checkpoint is missing tensors: {', '.join(missing)}")
    pipeline = doc.get("pipeline") or {}
    return clf, pipeline


def load_checkpoint(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads_checkpoint(fh.read())
