"""Command-line surface: model/data generation, prediction, profiled benchmarks,
and KNN feature extraction.

Exit codes: 0 ok, 1 usage, 2 data/model error, 3 backend output mismatch.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .dataio import (
    DataError,
    ingest_csv,
    load_corpus_csv,
    write_data_csv,
    write_features_csv,
    write_predictions_csv,
)
from .kernels import SCALAR, Backend, parse_backend
from .knn import embed_features
from .model import ModelError, gen_synthetic_model, load_model, save_model
from .predict import DEFAULT_BLOCK_SIZE, OutputTransform, predict_batch
from .profiler import Profiler, compare_reports

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MISMATCH = 3

# backend used internally where the choice cannot affect outputs
_FAST_BACKEND = Backend(32)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _transform(text: str) -> OutputTransform:
    return OutputTransform(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oblitree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-model", parents=[], help="generate a synthetic model file")
    p.add_argument("--features", type=int, default=90)
    p.add_argument("--trees", type=int, default=1000)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--dims", type=int, default=1)
    p.add_argument("--borders", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_model)

    p = sub.add_parser("gen-data", help="generate a synthetic sample CSV")
    p.add_argument("--rows", type=int, default=1000)
    p.add_argument("--features", type=int, default=None,
                   help="feature count (defaults to the model's)")
    p.add_argument("--model", default=None)
    p.add_argument("--consistent-labels", action="store_true",
                   help="append a label column equal to the model's argmax prediction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("predict", help="run batch prediction over a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--backend", type=parse_backend, default=SCALAR,
                   help="scalar or vec:W with W in {4,8,16,32}")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--transform", type=_transform, default=OutputTransform.RAW,
                   help="raw, sigmoid, or softmax-argmax")
    p.add_argument("--profile", action="store_true")
    p.add_argument("--repeat", type=int, default=5,
                   help="timing repetitions; the mean wall time is reported")
    p.add_argument("--out", default=None)
    p.add_argument("--report", choices=("table", "tsv"), default="table")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bench", help="profile scalar vs vectorized backends (serial)")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--backend", type=parse_backend, default=Backend(8),
                   help="the vectorized backend to compare against scalar")
    p.add_argument("--block-size", type=int, default=DEFAULT_BLOCK_SIZE)
    p.add_argument("--out", default=None)
    p.add_argument("--report", choices=("table", "tsv"), default="table")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("knn-features", help="derive neighbor features from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--data", required=True, help="query CSV (same width as the corpus)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--classes", type=int, default=None,
                   help="class count (defaults to max corpus label + 1)")
    p.add_argument("--backend", type=parse_backend, default=SCALAR)
    p.add_argument("--profile", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--report", choices=("table", "tsv"), default="table")
    p.set_defaults(func=cmd_knn_features)

    return parser


def _config_line(args) -> str:
    """One reproducibility line with every knob of the run."""
    skip = {"func", "command"}
    parts = []
    for key in sorted(vars(args)):
        if key in skip:
            continue
        value = getattr(args, key)
        if isinstance(value, Backend):
            value = value.name
        elif isinstance(value, OutputTransform):
            value = value.value
        parts.append(f"{key}={value}")
    return "config: " + " ".join(parts)


def cmd_gen_model(args) -> int:
    ensemble = gen_synthetic_model(
        seed=args.seed,
        n_features=args.features,
        n_trees=args.trees,
        depth=args.depth,
        n_dims=args.dims,
        borders_per_feature=args.borders,
    )
    save_model(ensemble, args.out)
    print(
        f"wrote model: {args.trees} trees, depth {args.depth}, "
        f"{args.features} features, {args.dims} dims -> {args.out}"
    )
    return EXIT_OK


def cmd_gen_data(args) -> int:
    ensemble = load_model(args.model) if args.model else None
    if args.consistent_labels and ensemble is None:
        print("error: --consistent-labels requires --model", file=sys.stderr)
        return EXIT_USAGE
    n_features = args.features if args.features is not None else (
        ensemble.n_features if ensemble else None
    )
    if n_features is None:
        print("error: pass --features or --model", file=sys.stderr)
        return EXIT_USAGE
    if ensemble is not None and n_features != ensemble.n_features:
        print(
            f"error: --features {n_features} != model features {ensemble.n_features}",
            file=sys.stderr,
        )
        return EXIT_USAGE

    rng = np.random.default_rng(args.seed)
    X = rng.uniform(-1.2, 1.2, size=(args.rows, n_features)).astype(np.float32)
    labels = None
    if args.consistent_labels:
        if ensemble.n_dims < 2:
            print(
                "error: --consistent-labels needs a multi-class model (n_dims >= 2)",
                file=sys.stderr,
            )
            return EXIT_USAGE
        prediction = predict_batch(
            ensemble, X, backend=_FAST_BACKEND,
            transform=OutputTransform.SOFTMAX_ARGMAX,
        )
        labels = prediction.transformed
    write_data_csv(args.out, X, labels)
    label_note = " (+ labels)" if labels is not None else ""
    print(f"wrote {args.rows} rows x {n_features} features{label_note} -> {args.out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    print(_config_line(args))
    ensemble = load_model(args.model)
    X, labels = ingest_csv(args.data, expected_features=ensemble.n_features)
    print(f"loaded {X.shape[0]} rows x {X.shape[1]} feature columns from {args.data}")

    profiler = Profiler() if args.profile else None
    repeats = max(1, args.repeat)
    prediction = None
    elapsed = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        prediction = predict_batch(
            ensemble,
            X,
            backend=args.backend,
            workers=args.workers,
            transform=args.transform,
            profiler=profiler,
            block_size=args.block_size,
        )
        elapsed.append(time.perf_counter() - t0)

    print(
        f"backend={args.backend.name} workers={args.workers} "
        f"wall_time_s: {sum(elapsed) / len(elapsed):.6f} (mean of {repeats})"
    )
    if prediction.nan_count:
        print(f"warning: {prediction.nan_count} NaN feature cells mapped to bin 0")
    if labels is not None:
        _print_quality(prediction, labels, args.transform)
    if args.out:
        write_predictions_csv(args.out, prediction, args.transform)
        print(f"wrote {prediction.n_samples} prediction rows -> {args.out}")
    if profiler is not None:
        grand = int(sum(elapsed) * 1e9)  # scopes accumulated across all repeats
        print(profiler.report(grand_total_ns=grand).render(args.report))
    return EXIT_OK


def _print_quality(prediction, labels, transform: OutputTransform):
    if transform is OutputTransform.SOFTMAX_ARGMAX:
        accuracy = float(np.mean(prediction.transformed == labels.astype(np.int64)))
        print(f"accuracy: {accuracy!r}")
    elif transform is OutputTransform.SIGMOID:
        predicted = (prediction.transformed >= 0.5).astype(np.int64)
        accuracy = float(np.mean(predicted == labels.astype(np.int64)))
        print(f"accuracy: {accuracy!r}")
    else:
        mae = float(np.mean(np.abs(prediction.raw[:, 0] - labels)))
        print(f"mae: {mae!r}")


def cmd_bench(args) -> int:
    if not args.backend.vectorized:
        print("error: bench needs a vectorized --backend (vec:W)", file=sys.stderr)
        return EXIT_USAGE
    print(_config_line(args))
    ensemble = load_model(args.model)
    X, _ = ingest_csv(args.data, expected_features=ensemble.n_features)
    print(f"loaded {X.shape[0]} rows x {X.shape[1]} feature columns from {args.data}")

    def profiled_leg(backend: Backend):
        profiler = Profiler()
        t0 = time.perf_counter_ns()
        prediction = predict_batch(
            ensemble, X, backend=backend, workers=1,
            profiler=profiler, block_size=args.block_size,
        )
        grand = time.perf_counter_ns() - t0
        return prediction, profiler.report(grand_total_ns=grand)

    baseline_pred, baseline = profiled_leg(SCALAR)
    optimized_pred, optimized = profiled_leg(args.backend)

    if baseline_pred.raw.tobytes() != optimized_pred.raw.tobytes():
        worst = float(np.abs(baseline_pred.raw - optimized_pred.raw).max())
        print(
            f"error: scalar and {args.backend.name} outputs differ "
            f"(max abs deviation {worst:g}); refusing to report performance",
            file=sys.stderr,
        )
        return EXIT_MISMATCH
    print(f"outputs identical across backends ({baseline_pred.n_samples} samples)")

    comparison = compare_reports(baseline, optimized)
    rendered = comparison.render(args.report)
    print(rendered)
    print(f"total_speedup: {comparison.total_speedup:.2f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered + "\n")
        print(f"wrote report -> {args.out}")
    return EXIT_OK


def cmd_knn_features(args) -> int:
    print(_config_line(args))
    corpus = load_corpus_csv(args.corpus, n_classes=args.classes)
    queries, labels = ingest_csv(args.data, expected_features=corpus.dim)
    print(
        f"corpus: {corpus.n_items} items x {corpus.dim} dims, "
        f"{corpus.n_classes} classes; {queries.shape[0]} queries"
    )
    profiler = Profiler() if args.profile else None
    t0 = time.perf_counter_ns()
    rows = np.empty((queries.shape[0], corpus.n_classes + 1), dtype=np.float64)
    if profiler is not None:
        with profiler.scope("embedding_features"):
            for i in range(queries.shape[0]):
                rows[i] = embed_features(
                    queries[i], corpus, args.k, backend=args.backend, profiler=profiler
                )
    else:
        for i in range(queries.shape[0]):
            rows[i] = embed_features(queries[i], corpus, args.k, backend=args.backend)
    grand = time.perf_counter_ns() - t0
    print(f"wall_time_s: {grand / 1e9:.6f}")
    if args.out:
        write_features_csv(args.out, rows, labels)
        print(f"wrote {rows.shape[0]} feature rows -> {args.out}")
    if profiler is not None:
        print(profiler.report(grand_total_ns=grand).render(args.report))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (ModelError, DataError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
