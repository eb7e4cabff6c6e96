"""Blocked batch prediction over an oblivious-tree ensemble.

Samples are processed in fixed-size blocks: quantize the block, then for
every tree compute the per-sample leaf index bitwise and add the addressed
leaf row into a float64 accumulator. Per-sample accumulation order over trees
is fixed, which makes raw outputs bit-identical across backends and worker
counts. A node-by-node traversal evaluator doubles as the test oracle.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .kernels import SCALAR, Backend, k_calc_indexes
from .model import Ensemble, ObliviousTree
from .profiler import DISABLED
from .quantize import QuantizedBlock, RawBlock, bin_index, binarize_block

DEFAULT_BLOCK_SIZE = 128


class OutputTransform(enum.Enum):
    """Optional post-processing of raw scores."""

    RAW = "raw"
    SIGMOID = "sigmoid"
    SOFTMAX_ARGMAX = "softmax-argmax"

    def check(self, n_dims: int):
        if self is OutputTransform.SIGMOID and n_dims != 1:
            raise ValueError(f"sigmoid transform requires n_dims == 1, got {n_dims}")
        if self is OutputTransform.SOFTMAX_ARGMAX and n_dims < 2:
            raise ValueError(
                f"softmax-argmax transform requires n_dims >= 2, got {n_dims}"
            )

    def apply(self, raw: np.ndarray):
        if self is OutputTransform.RAW:
            return None
        if self is OutputTransform.SIGMOID:
            return 1.0 / (1.0 + np.exp(-raw[:, 0]))
        # softmax is monotone, so the argmax of raw scores IS the class label
        return np.argmax(raw, axis=1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PredictionMatrix:
    """Per-sample raw scores (scale * leaf sum + bias) and optional transform output."""

    raw: np.ndarray  # float64, shape (n_samples, n_dims)
    transformed: np.ndarray | None = None
    nan_count: int = 0

    @property
    def n_samples(self) -> int:
        return self.raw.shape[0]

    @property
    def n_dims(self) -> int:
        return self.raw.shape[1]


def calc_leaf_indexes(
    block: QuantizedBlock, tree: ObliviousTree, backend: Backend = SCALAR
) -> np.ndarray:
    """Per-sample leaf index: sum over levels i of 2**i * [bin(f_i) >= threshold_i].

    Implemented as depth calls of the index kernel over a zeroed accumulator.
    """
    indexes = np.zeros(block.n_samples, dtype=np.uint32)
    for level, (feature, border_bin) in enumerate(tree.level_splits):
        k_calc_indexes(block.bins[feature], border_bin, level, indexes, backend)
    return indexes


def accumulate_leaf_values(indexes, tree: ObliviousTree, acc: np.ndarray):
    """Add each sample's addressed leaf row into the accumulator, in place.

    Indirect addressing keeps this off the lane-parametric path: there is one
    implementation regardless of backend.
    """
    acc += tree.leaf_values[indexes]


def predict_batch(
    ensemble: Ensemble,
    samples,
    backend: Backend = SCALAR,
    workers: int = 1,
    transform: OutputTransform = OutputTransform.RAW,
    profiler=None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> PredictionMatrix:
    """Predict raw scores for a sample-major float matrix.

    Blocks of block_size samples are quantized and pushed through every tree;
    workers > 1 fans independent blocks out to a thread pool, writing disjoint
    row ranges of the output. Raw outputs are bit-identical across backends
    and worker counts.
    """
    X = np.ascontiguousarray(samples, dtype=np.float32)
    if X.ndim == 1:
        X = X.reshape(0, ensemble.n_features) if X.size == 0 else X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError("samples must be a 2-d sample-major matrix")
    if X.shape[1] != ensemble.n_features:
        raise ValueError(
            f"dimension mismatch: samples have {X.shape[1]} columns, "
            f"model expects {ensemble.n_features}"
        )
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    transform.check(ensemble.n_dims)

    prof = profiler if profiler is not None else DISABLED
    n = X.shape[0]
    raw = np.empty((n, ensemble.n_dims), dtype=np.float64)
    borders = ensemble.border_table()
    scale = ensemble.scale
    bias = ensemble.bias

    def run_block(start: int, stop: int) -> int:
        block = RawBlock(X[start:stop])
        with prof.scope("binarize_features"):
            quantized = binarize_block(block, borders, backend, profiler=prof)
        acc = np.zeros((stop - start, ensemble.n_dims), dtype=np.float64)
        with prof.scope("calc_trees_blocked"):
            for tree in ensemble.trees:
                with prof.scope("calc_leaf_indexes"):
                    indexes = calc_leaf_indexes(quantized, tree, backend)
                with prof.scope("calc_leaf_values"):
                    accumulate_leaf_values(indexes, tree, acc)
        np.multiply(acc, scale, out=acc)
        np.add(acc, bias, out=acc)
        raw[start:stop] = acc
        return quantized.nan_count

    ranges = [(s, min(s + block_size, n)) for s in range(0, n, block_size)]
    if workers == 1 or len(ranges) <= 1:
        nan_count = sum(run_block(s, e) for s, e in ranges)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nan_count = sum(pool.map(lambda r: run_block(*r), ranges))

    return PredictionMatrix(raw=raw, transformed=transform.apply(raw), nan_count=nan_count)


def predict_oracle(ensemble: Ensemble, sample) -> np.ndarray:
    """Reference evaluator walking every tree node by node from the root.

    At each level it re-bins the raw feature value and descends left (0) or
    right (1) on bin >= border_bin, building the leaf index positionally.
    Accumulation order matches predict_batch, so agreement is bit-exact.
    """
    x = np.asarray(sample, dtype=np.float32).reshape(-1)
    if x.shape[0] != ensemble.n_features:
        raise ValueError(
            f"dimension mismatch: sample has {x.shape[0]} values, "
            f"model expects {ensemble.n_features}"
        )
    borders = ensemble.border_table()
    acc = np.zeros(ensemble.n_dims, dtype=np.float64)
    for tree in ensemble.trees:
        leaf = 0
        for level, (feature, border_bin) in enumerate(tree.level_splits):
            if bin_index(x[feature], borders[feature]) >= border_bin:
                leaf |= 1 << level
        acc += tree.leaf_values[leaf]
    return acc * ensemble.scale + ensemble.bias
