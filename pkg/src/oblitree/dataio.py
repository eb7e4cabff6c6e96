"""CSV ingestion and emission for sample matrices, corpora, and predictions.

All files carry a header row. Feature columns are free-form names; a column
named 'label' is treated as the target. Floats are written with full
round-trip precision so equal outputs compare equal byte for byte.
"""

from __future__ import annotations

import csv

import numpy as np

from .knn import EmbeddingCorpus
from .predict import OutputTransform, PredictionMatrix

LABEL_COLUMN = "label"


class DataError(ValueError):
    """Raised for malformed data files; the message carries the line number."""


def ingest_csv(path, expected_features: int | None = None):
    """Read a sample-major float matrix (plus an optional label column).

    Returns (X float32 of shape (rows, features), labels float64 or None).
    Ragged rows and unparseable cells are rejected with their line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (missing header row)") from None
        header = [h.strip() for h in header]
        label_col = header.index(LABEL_COLUMN) if LABEL_COLUMN in header else None
        n_cols = len(header)
        n_feat = n_cols - (0 if label_col is None else 1)
        if n_feat < 1:
            raise DataError(f"{path}: no feature columns in header")
        if expected_features is not None and n_feat != expected_features:
            raise DataError(
                f"{path}: data has {n_feat} feature columns, expected {expected_features}"
            )
        feature_cols = [j for j in range(n_cols) if j != label_col]

        rows = []
        labels = [] if label_col is not None else None
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != n_cols:
                raise DataError(
                    f"{path}: line {lineno}: expected {n_cols} columns, got {len(cells)}"
                )
            try:
                rows.append([float(cells[j]) for j in feature_cols])
            except ValueError:
                bad = next(j for j in feature_cols if not _is_float(cells[j]))
                raise DataError(
                    f"{path}: line {lineno}: cannot parse '{cells[bad]}' "
                    f"in column '{header[bad]}'"
                ) from None
            if label_col is not None:
                if not _is_float(cells[label_col]):
                    raise DataError(
                        f"{path}: line {lineno}: cannot parse '{cells[label_col]}' "
                        f"in column '{LABEL_COLUMN}'"
                    )
                labels.append(float(cells[label_col]))

    X = np.asarray(rows, dtype=np.float32).reshape(len(rows), n_feat)
    y = None if labels is None else np.asarray(labels, dtype=np.float64)
    return X, y


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def _fmt(value) -> str:
    return repr(float(value))


def write_data_csv(path, X: np.ndarray, labels=None):
    """Write a feature matrix (f0..fN-1) with an optional trailing label column."""
    n, d = X.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        names = [f"f{j}" for j in range(d)]
        if labels is not None:
            names.append(LABEL_COLUMN)
        fh.write(",".join(names) + "\n")
        for i in range(n):
            cells = [_fmt(v) for v in X[i]]
            if labels is not None:
                value = labels[i]
                cells.append(str(int(value)) if float(value).is_integer() else _fmt(value))
            fh.write(",".join(cells) + "\n")


def write_predictions_csv(path, prediction: PredictionMatrix, transform: OutputTransform):
    """Write one row per sample: raw scores, plus the transform column if any."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        names = [f"raw_{j}" for j in range(prediction.n_dims)]
        if transform is OutputTransform.SIGMOID:
            names.append("prob")
        elif transform is OutputTransform.SOFTMAX_ARGMAX:
            names.append(LABEL_COLUMN)
        fh.write(",".join(names) + "\n")
        for i in range(prediction.n_samples):
            cells = [_fmt(v) for v in prediction.raw[i]]
            if transform is OutputTransform.SIGMOID:
                cells.append(_fmt(prediction.transformed[i]))
            elif transform is OutputTransform.SOFTMAX_ARGMAX:
                cells.append(str(int(prediction.transformed[i])))
            fh.write(",".join(cells) + "\n")


def load_corpus_csv(path, n_classes: int | None = None) -> EmbeddingCorpus:
    """Read an embedding corpus: a 'label' column plus the embedding float columns."""
    X, labels = ingest_csv(path)
    if labels is None:
        raise DataError(f"{path}: corpus file must include a '{LABEL_COLUMN}' column")
    int_labels = labels.astype(np.int64)
    if not np.array_equal(int_labels, labels):
        raise DataError(f"{path}: corpus labels must be integers")
    if n_classes is None:
        n_classes = int(int_labels.max()) + 1 if int_labels.size else 1
    return EmbeddingCorpus(vectors=X, labels=int_labels, n_classes=n_classes)


def write_features_csv(path, features: np.ndarray, labels=None):
    """Write derived feature rows (f0..fK) with an optional label passthrough."""
    write_data_csv(path, np.asarray(features, dtype=np.float64), labels)
