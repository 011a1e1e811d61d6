"""Command-line entry point: train, eval, gradcheck and bench subcommands.

A run is driven by a JSON config file plus a handful of override flags, and
every artifact it writes (resolved config, checkpoint, logs) is enough to
replay the run exactly. Exit codes are part of the contract: 0 success,
2 I/O trouble, 3 usage or schema problems, 4 numeric failure, and 10+k for
a gradient check with k failing parameter groups.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .complexity import bench_rows, bench_wallclock
from .data import (
    Schema,
    build_vocab,
    compute_norm_stats,
    encode,
    load_csv,
    load_schema,
    make_windows,
    pipeline_from_state,
    pipeline_state,
    split,
)
from .errors import DataError, NumericError, SchemaError, ShapeError, UsageError
from .evaluation import evaluate, render_report
from .gradcheck import check_gradients
from .kernels import available_backends
from .model import ModelConfig, init_classifier, loss_and_grads
from .numeric import make_rng
from .training import TrainConfig, history_lines, train

BENCH_HEADER = "cell\tm\tn\tpredicted\tmeasured\tseconds_per_step"

_MODEL_KEYS = ("cell_kind", "n", "window", "embed_dim", "seed")
_MODEL_DEFAULTS = {"cell_kind": "arn", "n": 100, "window": 10, "embed_dim": 16, "seed": 0}
_TRAIN_KEYS = ("epochs", "lr", "batch_size", "adam_beta1", "adam_beta2", "adam_eps", "clip_norm", "seed")
_SPLIT_KEYS = ("ratio", "mode", "seed", "subsample")
_SPLIT_DEFAULTS = {"ratio": "8:2", "mode": "sequential", "seed": 0, "subsample": 1.0}
_TOP_KEYS = ("data", "schema", "out", "stride", "model", "train", "split")


def _reject_unknown(doc: dict, allowed, where: str) -> None:
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise UsageError(f"unknown {where} config keys: {', '.join(unknown)}")


def load_run_config(path) -> dict:
    """Read a run config file and fill in every default.

    The returned document is the fully resolved form that gets written back
    into the output directory, so a later run on that file replays this one.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"run config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError("run config must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "top-level")

    resolved = {
        "data": doc.get("data"),
        "schema": doc.get("schema"),
        "out": doc.get("out"),
        "stride": int(doc.get("stride", 1)),
        "model": dict(_MODEL_DEFAULTS),
        "train": {},
        "split": dict(_SPLIT_DEFAULTS),
    }
    model = doc.get("model", {})
    if not isinstance(model, dict):
        raise UsageError("'model' must be an object")
    _reject_unknown(model, _MODEL_KEYS, "model")
    resolved["model"].update(model)

    train_block = doc.get("train", {})
    if not isinstance(train_block, dict):
        raise UsageError("'train' must be an object")
    _reject_unknown(train_block, _TRAIN_KEYS, "train")
    defaults = TrainConfig()
    resolved["train"] = {k: train_block.get(k, getattr(defaults, k)) for k in _TRAIN_KEYS}

    split_block = doc.get("split", {})
    if not isinstance(split_block, dict):
        raise UsageError("'split' must be an object")
    _reject_unknown(split_block, _SPLIT_KEYS, "split")
    resolved["split"].update(split_block)
    return resolved


def _apply_overrides(cfg: dict, args) -> None:
    if args.data is not None:
        cfg["data"] = args.data
    if args.schema is not None:
        cfg["schema"] = args.schema
    if args.out is not None:
        cfg["out"] = args.out
    if args.cell is not None:
        cfg["model"]["cell_kind"] = args.cell
    if args.seed is not None:
        cfg["model"]["seed"] = args.seed
        cfg["train"]["seed"] = args.seed
        cfg["split"]["seed"] = args.seed


def _require(cfg: dict, key: str, flag: str) -> str:
    value = cfg.get(key)
    if not value:
        raise UsageError(f"a {key} path is required (config {key!r} or {flag})")
    return str(value)


def _write_text(path: str, text: str, written: list) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    written.append(path)


def cmd_train(args) -> int:
    cfg = load_run_config(args.config)
    _apply_overrides(cfg, args)
    data_path = _require(cfg, "data", "--data")
    schema_path = _require(cfg, "schema", "--schema")
    out_dir = _require(cfg, "out", "--out")

    schema = load_schema(schema_path)
    ds = load_csv(data_path, schema)
    sp = cfg["split"]
    train_ds, test_ds = split(
        ds,
        ratio=sp["ratio"],
        mode=sp["mode"],
        seed=int(sp["seed"]),
        subsample=float(sp["subsample"]),
    )
    vocab = build_vocab(train_ds)
    stats = compute_norm_stats(train_ds)
    window = int(cfg["model"]["window"])
    stride = int(cfg["stride"])
    batch_train = make_windows(encode(train_ds, vocab, stats), train_ds.labels, window, stride)
    if batch_train.windows.shape[0] == 0:
        raise UsageError(
            f"training split has {train_ds.n_rows} rows, not enough for window {window}"
        )
    batch_test = make_windows(encode(test_ds, vocab, stats), test_ds.labels, window, stride)

    model_cfg = ModelConfig(
        cell_kind=str(cfg["model"]["cell_kind"]),
        n=int(cfg["model"]["n"]),
        num_classes=schema.num_classes,
        window=window,
        embed_dim=int(cfg["model"]["embed_dim"]),
        seed=int(cfg["model"]["seed"]),
        num_numeric=len(schema.numeric_columns),
        vocab_sizes=vocab.sizes,
    )
    clf = init_classifier(model_cfg)
    train_cfg = TrainConfig(**{k: cfg["train"][k] for k in _TRAIN_KEYS})
    _, history = train(clf, batch_train.windows, batch_train.labels, train_cfg)

    os.makedirs(out_dir, exist_ok=True)
    written: list = []
    try:
        _write_text(
            os.path.join(out_dir, "config.json"),
            json.dumps(cfg, indent=2, sort_keys=True) + "\n",
            written,
        )
        _write_text(
            os.path.join(out_dir, "train.log"),
            "\n".join(history_lines(history)) + "\n",
            written,
        )
        ckpt_path = os.path.join(out_dir, "checkpoint.json")
        save_checkpoint(ckpt_path, clf, pipeline_state(schema, vocab, stats))
        written.append(ckpt_path)
        if batch_test.windows.shape[0] > 0:
            report = evaluate(clf, batch_test.windows, batch_test.labels, schema.normal_class)
            _write_text(
                os.path.join(out_dir, "metrics.json"),
                json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
                written,
            )
    except BaseException:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise

    last = history[-1] if history else None
    print(
        f"trained {model_cfg.cell_kind} on {batch_train.windows.shape[0]} windows "
        f"for {train_cfg.epochs} epochs"
    )
    if last is not None:
        print(f"final epoch: loss {last.mean_loss:.6f}, accuracy {last.train_accuracy:.6f}")
    print("wrote " + ", ".join(written))
    return 0


def _schema_diff(embedded: Schema, given: Schema) -> list:
    lines = []
    names = list(dict.fromkeys(list(embedded.names) + list(given.names)))
    for name in names:
        a = embedded.kinds[embedded.names.index(name)] if name in embedded.names else "(absent)"
        b = given.kinds[given.names.index(name)] if name in given.names else "(absent)"
        if a != b:
            lines.append(f"  column {name!r}: checkpoint={a} given={b}")
    if embedded.label_map != given.label_map:
        lines.append(f"  label_map: checkpoint={embedded.label_map} given={given.label_map}")
    if embedded.normal_class != given.normal_class:
        lines.append(
            f"  normal_class: checkpoint={embedded.normal_class} given={given.normal_class}"
        )
    return lines


def cmd_eval(args) -> int:
    clf, pipeline = load_checkpoint(args.checkpoint)
    schema, vocab, stats = pipeline_from_state(pipeline)
    if args.schema is not None:
        given = load_schema(args.schema)
        diff = _schema_diff(schema, given)
        if diff:
            raise SchemaError(
                "given schema does not match the one the checkpoint was trained with:\n"
                + "\n".join(diff)
            )
    ds = load_csv(args.data, schema)
    batch = make_windows(encode(ds, vocab, stats), ds.labels, clf.config.window)
    if batch.windows.shape[0] == 0:
        raise UsageError(
            f"evaluation data has {ds.n_rows} rows, not enough for window {clf.config.window}"
        )
    report = evaluate(clf, batch.windows, batch.labels, schema.normal_class)
    text = render_report(report)
    print(text, end="")
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.txt"), "w", encoding="utf-8") as fh:
            fh.write(text)
        with open(os.path.join(args.out, "metrics.json"), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return 0


def cmd_gradcheck(args) -> int:
    cells = [args.cell] if args.cell else ["arn", "gru"]
    failing = 0
    for cell_kind in cells:
        cfg = ModelConfig(
            cell_kind=cell_kind,
            n=args.n,
            num_classes=2,
            window=args.window,
            seed=args.seed,
            num_numeric=args.m,
            vocab_sizes=(),
        )
        clf = init_classifier(cfg)
        rng = make_rng(args.seed)
        windows = rng.uniform(0.0, 1.0, size=(args.batch, args.window, args.m))
        labels = np.arange(args.batch, dtype=np.int64) % 2

        params = clf.named_params()
        _, analytic = loss_and_grads(clf, windows, labels)
        if args.corrupt_backward:
            first = sorted(analytic)[0]
            analytic[first] = analytic[first] + 1.0

        def loss() -> float:
            return loss_and_grads(clf, windows, labels)[0]

        results = check_gradients(loss, params, analytic, tolerance=args.tolerance)
        print(f"== {cell_kind} ==")
        for res in results:
            verdict = "PASS" if res.passed else "FAIL"
            print(f"{res.name}\t{res.max_rel_err:.3e}\t{res.tolerance:.0e}\t{verdict}")
        failing += sum(1 for res in results if not res.passed)
    if failing:
        print(f"{failing} parameter group(s) failed", file=sys.stderr)
        return 10 + failing
    print("all parameter groups pass")
    return 0


def _parse_dims(text: str) -> list:
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split("x")
        if len(parts) != 2:
            raise UsageError(f"dims must look like '10x100,10x200', got {chunk!r}")
        try:
            m, n = int(parts[0]), int(parts[1])
        except ValueError:
            raise UsageError(f"dims must be integer pairs, got {chunk!r}") from None
        pairs.append((m, n))
    if not pairs:
        raise UsageError("dims list is empty")
    return pairs


def cmd_bench(args) -> int:
    dims = _parse_dims(args.dims)
    pairs = [(cell, m, n) for (m, n) in dims for cell in ("arn", "gru")]
    rows = bench_rows(pairs, steps=args.steps, repeats=args.repeats, seed=args.seed, backend=args.backend)
    lines = [BENCH_HEADER]
    for cell, m, n, predicted, measured, seconds in rows:
        lines.append(f"{cell}\t{m}\t{n}\t{predicted}\t{measured}\t{seconds:.6e}")
    table = "\n".join(lines) + "\n"
    print(table, end="")

    if args.compare_backends:
        print()
        print("cell\tm\tn\tbackend\tseconds_per_step")
        for cell, m, n in pairs:
            for backend in available_backends():
                seconds = bench_wallclock(
                    cell, m, n, steps=args.steps, repeats=args.repeats, seed=args.seed, backend=backend
                )
                print(f"{cell}\t{m}\t{n}\t{backend}\t{seconds:.6e}")

    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "bench.tsv"), "w", encoding="utf-8") as fh:
            fh.write(table)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the exit-code contract reserves 2 for I/O."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(3)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arnids", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model from a run config and write artifacts")
    p_train.add_argument("--config", required=True, help="run config JSON path")
    p_train.add_argument("--data", help="override the config's CSV path")
    p_train.add_argument("--schema", help="override the config's schema path")
    p_train.add_argument("--out", help="override the config's output directory")
    p_train.add_argument("--cell", choices=["arn", "gru"], help="override the cell kind")
    p_train.add_argument("--seed", type=int, help="override model, shuffle and split seeds at once")
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a CSV file")
    p_eval.add_argument("--checkpoint", required=True, help="checkpoint JSON path")
    p_eval.add_argument("--data", required=True, help="CSV file to score")
    p_eval.add_argument("--schema", help="optional schema path, checked against the checkpoint")
    p_eval.add_argument("--out", help="directory for report.txt and metrics.json")
    p_eval.set_defaults(func=cmd_eval)

    p_grad = sub.add_parser("gradcheck", help="finite-difference check of every parameter group")
    p_grad.add_argument("--cell", choices=["arn", "gru"], help="check one cell kind (default: both)")
    p_grad.add_argument("--n", type=int, default=8, help="state width (default 8)")
    p_grad.add_argument("--m", type=int, default=6, help="input features per step (default 6)")
    p_grad.add_argument("--window", type=int, default=5, help="steps per window (default 5)")
    p_grad.add_argument("--batch", type=int, default=2, help="windows in the probe batch (default 2)")
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--tolerance", type=float, default=1e-4)
    p_grad.add_argument("--corrupt-backward", action="store_true", help=argparse.SUPPRESS)
    p_grad.set_defaults(func=cmd_gradcheck)

    p_bench = sub.add_parser("bench", help="operation counts and wall-clock timing per cell")
    p_bench.add_argument("--dims", default="10x100,10x200", help="comma list of mxn pairs")
    p_bench.add_argument("--steps", type=int, default=2000, help="sequence length per timing run")
    p_bench.add_argument("--repeats", type=int, default=5, help="timing repetitions (median wins)")
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--backend", default="auto", help="kernel backend: auto, fast or reference")
    p_bench.add_argument("--compare-backends", action="store_true", help="also time every available backend")
    p_bench.add_argument("--out", help="directory for bench.tsv")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, UsageError, DataError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
