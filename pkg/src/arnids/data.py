"""CSV ingestion, encoding, splitting and windowing.

The input format is a plain CSV with a header plus a JSON schema that says
what each column is: numeric, categorical, the label, or dropped. Numeric
columns are min-max scaled with statistics taken from training rows only;
categorical columns are mapped through a vocabulary that is also built from
training rows only, with index 0 reserved for anything unseen. Windows are
overlapping runs of consecutive rows, labeled by their final row.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, SchemaError, UsageError
from .numeric import make_rng

COLUMN_KINDS = ("numeric", "categorical", "label", "drop")


@dataclass
class Schema:
    names: list
    kinds: list
    label_map: dict
    normal_class: int = 0

    def validate(self) -> None:
        if len(self.names) != len(self.kinds):
            raise SchemaError("schema has mismatched names/kinds lengths")
        if len(set(self.names)) != len(self.names):
            raise SchemaError("schema has duplicate column names")
        for name, kind in zip(self.names, self.kinds):
            if kind not in COLUMN_KINDS:
                raise SchemaError(
                    f"column {name!r} has unknown kind {kind!r}; "
                    f"expected one of {COLUMN_KINDS}"
                )
        n_label = self.kinds.count("label")
        if n_label != 1:
            raise SchemaError(f"schema must declare exactly one label column, found {n_label}")
        if not self.label_map:
            raise SchemaError("label_map must not be empty")
        classes = sorted(set(self.label_map.values()))
        if classes != list(range(len(classes))):
            raise SchemaError(
                f"label_map values must be dense class indices 0..C-1, got {classes}"
            )
        if len(classes) < 2:
            raise SchemaError("label_map must define at least 2 classes")
        if self.normal_class not in classes:
            raise SchemaError(
                f"normal_class {self.normal_class} is not a label_map value"
            )

    @property
    def numeric_columns(self) -> list:
        return [n for n, k in zip(self.names, self.kinds) if k == "numeric"]

    @property
    def categorical_columns(self) -> list:
        return [n for n, k in zip(self.names, self.kinds) if k == "categorical"]

    @property
    def label_column(self) -> str:
        return self.names[self.kinds.index("label")]

    @property
    def num_classes(self) -> int:
        return len(set(self.label_map.values()))

    def to_dict(self) -> dict:
        return {
            "columns": [{"name": n, "kind": k} for n, k in zip(self.names, self.kinds)],
            "label_map": dict(self.label_map),
            "normal_class": self.normal_class,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Schema":
        if not isinstance(doc, dict) or "columns" not in doc:
            raise SchemaError("schema document must be an object with a 'columns' list")
        columns = doc["columns"]
        if not isinstance(columns, list) or not columns:
            raise SchemaError("'columns' must be a nonempty list")
        names, kinds = [], []
        for i, col in enumerate(columns):
            if not isinstance(col, dict) or "name" not in col or "kind" not in col:
                raise SchemaError(f"column entry {i} must have 'name' and 'kind'")
            names.append(str(col["name"]))
            kinds.append(str(col["kind"]))
        label_map = doc.get("label_map")
        if not isinstance(label_map, dict):
            raise SchemaError("schema must carry a 'label_map' object")
        label_map = {str(k): int(v) for k, v in label_map.items()}
        schema = cls(
            names=names,
            kinds=kinds,
            label_map=label_map,
            normal_class=int(doc.get("normal_class", 0)),
        )
        schema.validate()
        return schema


def load_schema(path) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema file is not valid JSON: {exc}") from None
    return Schema.from_dict(doc)


@dataclass
class RawDataset:
    """Typed columnar view of one CSV file."""

    schema: Schema
    numeric: np.ndarray
    categorical: list
    labels: np.ndarray

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    def take(self, indices) -> "RawDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return RawDataset(
            schema=self.schema,
            numeric=self.numeric[indices],
            categorical=[[col[i] for i in indices] for col in self.categorical],
            labels=self.labels[indices],
        )


def load_csv(path, schema: Schema) -> RawDataset:
    """Read and type-check one CSV file against the schema.

    The header must match the schema's column names exactly; any cell that
    fails to parse is reported with its row number (1-based, header is
    row 1) and column name.
    """
    schema.validate()
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if header != schema.names:
            missing = [n for n in schema.names if n not in header]
            unexpected = [n for n in header if n not in schema.names]
            detail = []
            if missing:
                detail.append(f"missing {missing}")
            if unexpected:
                detail.append(f"unexpected {unexpected}")
            if not detail:
                detail.append("same names, different order")
            raise SchemaError(f"{path}: header does not match schema ({'; '.join(detail)})")

        numeric_idx = [i for i, k in enumerate(schema.kinds) if k == "numeric"]
        cat_idx = [i for i, k in enumerate(schema.kinds) if k == "categorical"]
        label_idx = schema.kinds.index("label")

        numeric_rows = []
        cat_cols: list = [[] for _ in cat_idx]
        labels = []
        width = len(schema.names)
        for row_no, row in enumerate(reader, start=2):
            if len(row) != width:
                raise DataError(
                    f"{path}: row {row_no} has {len(row)} cells, expected {width}"
                )
            values = []
            for i in numeric_idx:
                cell = row[i].strip()
                try:
                    values.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {row_no}, column {schema.names[i]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
            numeric_rows.append(values)
            for j, i in enumerate(cat_idx):
                cat_cols[j].append(row[i].strip())
            raw_label = row[label_idx].strip()
            if raw_label not in schema.label_map:
                raise DataError(
                    f"{path}: row {row_no}, column {schema.label_column!r}: "
                    f"label {raw_label!r} is not in the label map"
                )
            labels.append(schema.label_map[raw_label])

    numeric = np.asarray(numeric_rows, dtype=np.float64)
    if numeric.size == 0:
        numeric = numeric.reshape(len(labels), len(numeric_idx))
    return RawDataset(
        schema=schema,
        numeric=numeric,
        categorical=cat_cols,
        labels=np.asarray(labels, dtype=np.int64),
    )


@dataclass
class Vocab:
    """Token tables for the categorical columns, in schema order.

    Index 0 always means "never seen in training"; real tokens get dense
    indices from 1 upward, assigned in sorted token order.
    """

    tables: list = field(default_factory=list)

    @property
    def sizes(self) -> tuple:
        return tuple(len(t) + 1 for t in self.tables)

    def to_dict(self) -> dict:
        return {"tables": self.tables}

    @classmethod
    def from_dict(cls, doc: dict) -> "Vocab":
        tables = [{str(k): int(v) for k, v in t.items()} for t in doc.get("tables", [])]
        return cls(tables=tables)


def build_vocab(train: RawDataset) -> Vocab:
    tables = []
    for col in train.categorical:
        tokens = sorted(set(col))
        tables.append({tok: i + 1 for i, tok in enumerate(tokens)})
    return Vocab(tables=tables)


@dataclass
class NormStats:
    """Per-numeric-column training minima and maxima."""

    mins: np.ndarray
    maxs: np.ndarray

    def validate(self) -> None:
        if self.mins.shape != self.maxs.shape:
            raise SchemaError("norm stats mins/maxs shapes differ")
        if np.any(self.mins > self.maxs):
            raise SchemaError("norm stats have min > max")

    def to_dict(self) -> dict:
        return {"mins": [float(v) for v in self.mins], "maxs": [float(v) for v in self.maxs]}

    @classmethod
    def from_dict(cls, doc: dict) -> "NormStats":
        stats = cls(
            mins=np.asarray(doc.get("mins", []), dtype=np.float64),
            maxs=np.asarray(doc.get("maxs", []), dtype=np.float64),
        )
        stats.validate()
        return stats


def compute_norm_stats(train: RawDataset) -> NormStats:
    if train.n_rows == 0:
        raise UsageError("cannot compute normalization stats on an empty dataset")
    if train.numeric.shape[1] == 0:
        return NormStats(mins=np.zeros(0), maxs=np.zeros(0))
    return NormStats(mins=train.numeric.min(axis=0), maxs=train.numeric.max(axis=0))


def normalize(ds: RawDataset, stats: NormStats) -> np.ndarray:
    """Min-max scale numeric columns into [0,1].

    Constant training columns map to 0; values outside the training range
    (possible on test data) are clamped to the ends.
    """
    stats.validate()
    if ds.numeric.shape[1] != stats.mins.shape[0]:
        raise SchemaError(
            f"dataset has {ds.numeric.shape[1]} numeric columns, "
            f"stats cover {stats.mins.shape[0]}"
        )
    span = stats.maxs - stats.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (ds.numeric - stats.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def vectorize(ds: RawDataset, vocab: Vocab) -> np.ndarray:
    """Map categorical tokens to vocabulary indices; unseen tokens become 0."""
    if len(ds.categorical) != len(vocab.tables):
        raise SchemaError(
            f"dataset has {len(ds.categorical)} categorical columns, "
            f"vocab covers {len(vocab.tables)}"
        )
    out = np.zeros((ds.n_rows, len(vocab.tables)), dtype=np.int64)
    for j, (col, table) in enumerate(zip(ds.categorical, vocab.tables)):
        out[:, j] = [table.get(tok, 0) for tok in col]
    return out


def encode(ds: RawDataset, vocab: Vocab, stats: NormStats) -> np.ndarray:
    """Full feature matrix: scaled numerics first, then index slots as floats."""
    numeric = normalize(ds, stats)
    indices = vectorize(ds, vocab).astype(np.float64)
    if indices.shape[1] == 0:
        return numeric
    if numeric.shape[1] == 0:
        return indices
    return np.concatenate([numeric, indices], axis=1)


def parse_ratio(text: str):
    parts = str(text).split(":")
    if len(parts) != 2:
        raise UsageError(f"split ratio must look like 'a:b', got {text!r}")
    try:
        a, b = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"split ratio must be numeric, got {text!r}") from None
    if a <= 0 or b <= 0:
        raise UsageError(f"both ratio parts must be positive, got {text!r}")
    return a, b


def split(
    ds: RawDataset,
    ratio: str = "8:2",
    mode: str = "sequential",
    seed: int = 0,
    subsample: float = 1.0,
):
    """Partition rows into train and test sets.

    Sequential mode keeps temporal order: the first a/(a+b) of the rows
    train. Random mode permutes rows with the seed first. A subsample
    fraction below 1 randomly keeps that share of the rows (seeded, order
    preserved) before any splitting happens.
    """
    a, b = parse_ratio(ratio)
    if mode not in ("sequential", "random"):
        raise UsageError(f"split mode must be 'sequential' or 'random', got {mode!r}")
    if not 0.0 < subsample <= 1.0:
        raise UsageError(f"subsample fraction must be in (0, 1], got {subsample}")

    rng = make_rng(seed)
    if subsample < 1.0:
        keep = int(subsample * ds.n_rows)
        if keep < 1:
            raise UsageError("subsample fraction keeps zero rows")
        picked = np.sort(rng.permutation(ds.n_rows)[:keep])
        ds = ds.take(picked)

    n = ds.n_rows
    n_train = int(n * a / (a + b))
    if mode == "sequential":
        order = np.arange(n)
    else:
        order = rng.permutation(n)
    return ds.take(order[:n_train]), ds.take(order[n_train:])


@dataclass
class SequenceBatch:
    """Encoded windows ready for the model: [B x window x slots] plus labels."""

    windows: np.ndarray
    labels: np.ndarray

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(repr(self.windows.shape).encode())
        digest.update(np.ascontiguousarray(self.windows).tobytes())
        digest.update(repr(self.labels.shape).encode())
        digest.update(np.ascontiguousarray(self.labels).tobytes())
        return digest.hexdigest()


def make_windows(features: np.ndarray, labels: np.ndarray, window: int, stride: int = 1) -> SequenceBatch:
    """Cut overlapping windows of consecutive rows; label comes from the last row."""
    if window < 1:
        raise UsageError(f"window must be >= 1, got {window}")
    if stride < 1:
        raise UsageError(f"stride must be >= 1, got {stride}")
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    n = features.shape[0]
    if n < window:
        return SequenceBatch(
            windows=np.zeros((0, window, features.shape[1] if features.ndim > 1 else 0)),
            labels=np.zeros(0, dtype=np.int64),
        )
    starts = range(0, n - window + 1, stride)
    windows = np.stack([features[s : s + window] for s in starts])
    out_labels = np.array([labels[s + window - 1] for s in starts], dtype=np.int64)
    return SequenceBatch(windows=windows, labels=out_labels)


def pipeline_state(schema: Schema, vocab: Vocab, stats: NormStats) -> dict:
    """JSON-ready bundle of everything needed to encode new data identically."""
    return {
        "schema": schema.to_dict(),
        "vocab": vocab.to_dict(),
        "norm_stats": stats.to_dict(),
    }


def pipeline_from_state(doc: dict):
    if not isinstance(doc, dict) or "schema" not in doc:
        raise DataError("checkpoint has no pipeline state; cannot encode data")
    schema = Schema.from_dict(doc["schema"])
    vocab = Vocab.from_dict(doc.get("vocab", {}))
    stats = NormStats.from_dict(doc.get("norm_stats", {}))
    return schema, vocab, stats
