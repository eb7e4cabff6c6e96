"""Brute-force k-nearest-neighbor search over embedding vectors.

Distance computation dominates this path, so every query walks the whole
corpus through the squared-L2 kernel; no index structures. The derived
feature map is per-class neighbor frequency among the k nearest plus the
mean squared distance to them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import SCALAR, Backend, k_l2_sqr
from .profiler import DISABLED


@dataclass(frozen=True, eq=False)
class EmbeddingCorpus:
    """Item-major embedding matrix with one class label per item."""

    vectors: np.ndarray  # float32, shape (n_items, dim)
    labels: np.ndarray  # int64, values in [0, n_classes)
    n_classes: int

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if vectors.ndim != 2:
            raise ValueError("corpus vectors must be 2-d (items x dim)")
        if labels.shape[0] != vectors.shape[0]:
            raise ValueError(
                f"label count {labels.shape[0]} != item count {vectors.shape[0]}"
            )
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise ValueError(f"labels must lie in [0, {self.n_classes})")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "labels", labels)

    @property
    def n_items(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def l2_sqr_distance(a, b, backend: Backend = SCALAR, profiler=None) -> float:
    """Squared L2 distance between two vectors (profiled facade over the kernel)."""
    prof = profiler if profiler is not None else DISABLED
    with prof.scope("l2_sqr_distance"):
        return k_l2_sqr(a, b, backend)


def knn_search(
    query, corpus: EmbeddingCorpus, k: int, backend: Backend = SCALAR, profiler=None
) -> list:
    """The k corpus items nearest to the query, as (item index, squared distance).

    Results are sorted ascending by distance; exact ties break toward the
    lower item index, making the output deterministic per backend.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > corpus.n_items:
        raise ValueError(f"k ({k}) exceeds corpus size ({corpus.n_items})")
    q = np.ascontiguousarray(query, dtype=np.float32).reshape(-1)
    if q.shape[0] != corpus.dim:
        raise ValueError(
            f"dimension mismatch: query has {q.shape[0]} values, corpus dim is {corpus.dim}"
        )
    vectors = corpus.vectors
    distances = [
        l2_sqr_distance(q, vectors[i], backend, profiler) for i in range(corpus.n_items)
    ]
    order = sorted(range(corpus.n_items), key=lambda i: (distances[i], i))
    return [(i, distances[i]) for i in order[:k]]


def embed_features(
    query,
    corpus: EmbeddingCorpus,
    k: int,
    n_classes: int | None = None,
    backend: Backend = SCALAR,
    profiler=None,
) -> np.ndarray:
    """Derived feature vector of length n_classes + 1 for one query.

    First n_classes entries: per-class share of the k nearest neighbors
    (they sum to 1). Last entry: mean squared distance to the k nearest.
    """
    if n_classes is None:
        n_classes = corpus.n_classes
    neighbors = knn_search(query, corpus, k, backend, profiler)
    features = np.zeros(n_classes + 1, dtype=np.float64)
    dist_sum = 0.0
    for item, dist in neighbors:
        label = int(corpus.labels[item])
        if label >= n_classes:
            raise ValueError(f"corpus label {label} outside [0, {n_classes})")
        features[label] += 1.0
        dist_sum += dist
    features[:n_classes] /= k
    features[n_classes] = dist_sum / k
    return features
