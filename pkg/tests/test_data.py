import json

import numpy as np
import pytest

from arnids.data import (
    NormStats,
    Schema,
    Vocab,
    build_vocab,
    compute_norm_stats,
    encode,
    load_csv,
    load_schema,
    make_windows,
    normalize,
    parse_ratio,
    pipeline_from_state,
    pipeline_state,
    split,
    vectorize,
)
from arnids.errors import DataError, SchemaError, UsageError


def simple_schema():
    return Schema(
        names=["flow", "proto", "label"],
        kinds=["numeric", "categorical", "label"],
        label_map={"Normal": 0, "Attack": 1},
        normal_class=0,
    )


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_schema_validation_catches_problems():
    with pytest.raises(SchemaError, match="duplicate"):
        Schema(["a", "a"], ["numeric", "label"], {"x": 0, "y": 1}).validate()
    with pytest.raises(SchemaError, match="kind"):
        Schema(["a", "b"], ["numeric", "mystery"], {"x": 0, "y": 1}).validate()
    with pytest.raises(SchemaError, match="label column"):
        Schema(["a", "b"], ["numeric", "numeric"], {"x": 0, "y": 1}).validate()
    with pytest.raises(SchemaError, match="dense"):
        Schema(["a", "b"], ["numeric", "label"], {"x": 0, "y": 2}).validate()
    with pytest.raises(SchemaError, match="normal_class"):
        Schema(["a", "b"], ["numeric", "label"], {"x": 0, "y": 1}, normal_class=7).validate()
    simple_schema().validate()


def test_load_schema_file(tmp_path):
    doc = {
        "columns": [
            {"name": "flow", "kind": "numeric"},
            {"name": "proto", "kind": "categorical"},
            {"name": "label", "kind": "label"},
        ],
        "label_map": {"Normal": 0, "Attack": 1},
        "normal_class": 0,
    }
    path = tmp_path / "schema.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    schema = load_schema(path)
    assert schema.names == ["flow", "proto", "label"]
    assert schema.num_classes == 2
    assert schema.label_column == "label"


def test_load_schema_rejects_bad_json(tmp_path):
    path = tmp_path / "schema.json"
    path.write_text("{oops", encoding="utf-8")
    with pytest.raises(SchemaError):
        load_schema(path)


def test_load_csv_two_rows(tmp_path):
    path = write_csv(tmp_path, "flow,proto,label\n1.0,tcp,Normal\n2.5,udp,Attack\n")
    ds = load_csv(path, simple_schema())
    assert ds.n_rows == 2
    assert np.allclose(ds.numeric[:, 0], [1.0, 2.5])
    assert ds.categorical[0] == ["tcp", "udp"]
    assert ds.labels.tolist() == [0, 1]


def test_load_csv_bad_numeric_names_row_and_column(tmp_path):
    path = write_csv(tmp_path, "flow,proto,label\n1.0,tcp,Normal\nabc,udp,Attack\n")
    with pytest.raises(DataError, match=r"row 3.*'flow'"):
        load_csv(path, simple_schema())


def test_load_csv_header_mismatch(tmp_path):
    path = write_csv(tmp_path, "flow,port,label\n1.0,80,Normal\n")
    with pytest.raises(SchemaError, match="proto"):
        load_csv(path, simple_schema())


def test_load_csv_ragged_row(tmp_path):
    path = write_csv(tmp_path, "flow,proto,label\n1.0,tcp\n")
    with pytest.raises(DataError, match="row 2"):
        load_csv(path, simple_schema())


def test_load_csv_unknown_label(tmp_path):
    path = write_csv(tmp_path, "flow,proto,label\n1.0,tcp,Weird\n")
    with pytest.raises(DataError, match=r"row 2.*Weird"):
        load_csv(path, simple_schema())


def test_load_csv_empty_file(tmp_path):
    path = write_csv(tmp_path, "")
    with pytest.raises(DataError, match="empty"):
        load_csv(path, simple_schema())


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_csv(tmp_path / "absent.csv", simple_schema())


def test_load_csv_drop_columns_ignored(tmp_path):
    schema = Schema(
        names=["ts", "flow", "label"],
        kinds=["drop", "numeric", "label"],
        label_map={"Normal": 0, "Attack": 1},
    )
    path = write_csv(tmp_path, "ts,flow,label\n2021-01-01,3.5,Normal\n")
    ds = load_csv(path, schema)
    assert ds.numeric.shape == (1, 1)
    assert ds.numeric[0, 0] == 3.5


def test_swat_style_fixture_parses_binary(tmp_path):
    header = "FIT101,LIT101,Normal/Attack"
    rows = [f"{i * 0.1:.1f},{500 + i},{'Attack' if i >= 7 else 'Normal'}" for i in range(10)]
    schema = Schema(
        names=["FIT101", "LIT101", "Normal/Attack"],
        kinds=["numeric", "numeric", "label"],
        label_map={"Normal": 0, "Attack": 1},
    )
    path = write_csv(tmp_path, header + "\n" + "\n".join(rows) + "\n")
    ds = load_csv(path, schema)
    assert ds.n_rows == 10
    assert sorted(set(ds.labels.tolist())) == [0, 1]
    assert ds.labels.sum() == 3


def tokens_dataset(train_tokens, test_tokens):
    schema = simple_schema()
    mk = lambda toks: load_rows(schema, toks)  # noqa: E731
    return mk(train_tokens), mk(test_tokens)


def load_rows(schema, tokens):
    from arnids.data import RawDataset

    return RawDataset(
        schema=schema,
        numeric=np.zeros((len(tokens), 1)),
        categorical=[list(tokens)],
        labels=np.zeros(len(tokens), dtype=np.int64),
    )


def test_vocab_indices_sorted_from_one():
    train, test = tokens_dataset(["udp", "tcp", "udp"], ["tcp", "icmp"])
    vocab = build_vocab(train)
    assert vocab.tables[0] == {"tcp": 1, "udp": 2}
    assert vocab.sizes == (3,)
    encoded = vectorize(test, vocab)
    assert encoded[:, 0].tolist() == [1, 0]  # icmp unseen -> 0


def test_vocab_empty_string_is_a_token():
    train, test = tokens_dataset(["", "tcp"], ["", "udp"])
    vocab = build_vocab(train)
    assert "" in vocab.tables[0]
    encoded = vectorize(test, vocab)
    assert encoded[0, 0] == vocab.tables[0][""]
    assert encoded[1, 0] == 0


def test_normalize_basic_and_constant_and_clamp():
    schema = Schema(
        names=["a", "b", "label"],
        kinds=["numeric", "numeric", "label"],
        label_map={"n": 0, "a": 1},
    )
    from arnids.data import RawDataset

    train = RawDataset(
        schema=schema,
        numeric=np.array([[0.0, 7.0], [5.0, 7.0], [10.0, 7.0]]),
        categorical=[],
        labels=np.zeros(3, dtype=np.int64),
    )
    stats = compute_norm_stats(train)
    out = normalize(train, stats)
    assert np.allclose(out[:, 0], [0.0, 0.5, 1.0])
    assert np.allclose(out[:, 1], 0.0)  # constant column

    test = RawDataset(
        schema=schema,
        numeric=np.array([[12.0, 7.0], [-3.0, 9.0]]),
        categorical=[],
        labels=np.zeros(2, dtype=np.int64),
    )
    out = normalize(test, stats)
    assert out[0, 0] == 1.0  # clamped above
    assert out[1, 0] == 0.0  # clamped below
    assert np.all(out >= 0.0) and np.all(out <= 1.0)


def test_encode_layout_numeric_then_categorical(tmp_path):
    path = write_csv(tmp_path, "flow,proto,label\n2.0,tcp,Normal\n4.0,udp,Attack\n")
    ds = load_csv(path, simple_schema())
    vocab = build_vocab(ds)
    stats = compute_norm_stats(ds)
    features = encode(ds, vocab, stats)
    assert features.shape == (2, 2)
    assert np.allclose(features[:, 0], [0.0, 1.0])
    assert features[:, 1].tolist() == [1.0, 2.0]


def make_numbered(n):
    schema = simple_schema()
    from arnids.data import RawDataset

    return RawDataset(
        schema=schema,
        numeric=np.arange(n, dtype=np.float64)[:, None],
        categorical=[["t"] * n],
        labels=(np.arange(n) % 2).astype(np.int64),
    )


def test_parse_ratio():
    assert parse_ratio("8:2") == (8.0, 2.0)
    with pytest.raises(UsageError):
        parse_ratio("8")
    with pytest.raises(UsageError):
        parse_ratio("a:b")
    with pytest.raises(UsageError):
        parse_ratio("0:2")


def test_split_sizes_match_ratios():
    train, test = split(make_numbered(100), "8:2")
    assert (train.n_rows, test.n_rows) == (80, 20)
    train, test = split(make_numbered(110), "10:1")
    assert (train.n_rows, test.n_rows) == (100, 10)


def test_split_sequential_keeps_order():
    train, test = split(make_numbered(10), "8:2", mode="sequential")
    assert train.numeric[:, 0].tolist() == list(range(8))
    assert test.numeric[:, 0].tolist() == [8.0, 9.0]


def test_split_random_is_seeded():
    a_train, a_test = split(make_numbered(50), "8:2", mode="random", seed=3)
    b_train, b_test = split(make_numbered(50), "8:2", mode="random", seed=3)
    assert np.array_equal(a_train.numeric, b_train.numeric)
    assert np.array_equal(a_test.numeric, b_test.numeric)
    c_train, _ = split(make_numbered(50), "8:2", mode="random", seed=4)
    assert not np.array_equal(a_train.numeric, c_train.numeric)


def test_subsample_before_split():
    train, test = split(make_numbered(1000), "8:2", mode="sequential", seed=9, subsample=0.25)
    assert train.n_rows + test.n_rows == 250
    again_train, again_test = split(
        make_numbered(1000), "8:2", mode="sequential", seed=9, subsample=0.25
    )
    assert np.array_equal(train.numeric, again_train.numeric)
    assert np.array_equal(test.numeric, again_test.numeric)
    # subsampled rows keep their original temporal order
    assert np.all(np.diff(train.numeric[:, 0]) > 0)


def test_split_rejects_bad_mode_and_subsample():
    with pytest.raises(UsageError):
        split(make_numbered(10), "8:2", mode="stratified")
    with pytest.raises(UsageError):
        split(make_numbered(10), "8:2", subsample=0.0)


def test_make_windows_counts_and_labels():
    feats = np.arange(10, dtype=np.float64).reshape(5, 2)
    labels = np.array([0, 0, 1, 1, 0])
    batch = make_windows(feats, labels, window=3)
    assert batch.windows.shape == (3, 3, 2)
    assert np.array_equal(batch.windows[0], feats[:3])
    assert batch.labels.tolist() == [1, 1, 0]


def test_make_windows_window_one_is_per_row():
    feats = np.arange(4, dtype=np.float64).reshape(4, 1)
    labels = np.array([0, 1, 0, 1])
    batch = make_windows(feats, labels, window=1)
    assert batch.windows.shape == (4, 1, 1)
    assert batch.labels.tolist() == labels.tolist()


def test_make_windows_last_row_labels():
    feats = np.zeros((4, 1))
    labels = np.array([0, 0, 1, 1])
    batch = make_windows(feats, labels, window=2)
    assert batch.labels.tolist() == [0, 1, 1]


def test_make_windows_too_few_rows():
    batch = make_windows(np.zeros((2, 3)), np.zeros(2, dtype=int), window=5)
    assert batch.windows.shape[0] == 0
    assert batch.labels.size == 0


def test_leakage_freedom_stats_ignore_test_rows(tmp_path):
    rows = [f"{float(i)},{'tcp' if i % 2 else 'udp'},{'Normal' if i < 8 else 'Attack'}" for i in range(10)]
    path = write_csv(tmp_path, "flow,proto,label\n" + "\n".join(rows) + "\n")
    ds = load_csv(path, simple_schema())
    train, test = split(ds, "8:2", mode="sequential")
    vocab = build_vocab(train)
    stats = compute_norm_stats(train)
    # recompute after discarding the test partition entirely: identical
    vocab_again = build_vocab(train)
    stats_again = compute_norm_stats(train)
    assert vocab.tables == vocab_again.tables
    assert np.array_equal(stats.mins, stats_again.mins)
    assert np.array_equal(stats.maxs, stats_again.maxs)
    # and the test rows demonstrably played no part: train max is 7, not 9
    assert stats.maxs[0] == 7.0


def test_pipeline_determinism_content_hash(tmp_path):
    rows = [f"{float(i)},p{i % 3},{'Normal' if i % 2 else 'Attack'}" for i in range(12)]
    text = "flow,proto,label\n" + "\n".join(rows) + "\n"
    hashes = []
    for name in ("a.csv", "b.csv"):
        path = write_csv(tmp_path, text, name)
        ds = load_csv(path, simple_schema())
        train, test = split(ds, "8:2", mode="random", seed=5)
        vocab = build_vocab(train)
        stats = compute_norm_stats(train)
        batch = make_windows(encode(train, vocab, stats), train.labels, window=3)
        hashes.append(batch.content_hash())
    assert hashes[0] == hashes[1]


def test_pipeline_state_round_trip():
    schema = simple_schema()
    vocab = Vocab(tables=[{"tcp": 1, "udp": 2}])
    stats = NormStats(mins=np.array([0.0]), maxs=np.array([4.5]))
    doc = pipeline_state(schema, vocab, stats)
    schema2, vocab2, stats2 = pipeline_from_state(json.loads(json.dumps(doc)))
    assert schema2 == schema
    assert vocab2.tables == vocab.tables
    assert np.array_equal(stats2.mins, stats.mins)
    assert np.array_equal(stats2.maxs, stats.maxs)
