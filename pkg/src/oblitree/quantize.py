"""Feature binarization: raw float samples to 8-bit bin indexes.

Quantized blocks are feature-major (feature outer, sample inner) so the
index kernel reads one feature's bins for a whole block at unit stride.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from .kernels import SCALAR, Backend, k_binarize
from .profiler import DISABLED


@dataclass(frozen=True, eq=False)
class RawBlock:
    """A block of raw samples, sample-major float32."""

    values: np.ndarray  # shape (n_samples, n_features)

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float32)
        if vals.ndim != 2:
            raise ValueError("raw block values must be 2-d (samples x features)")
        object.__setattr__(self, "values", vals)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class QuantizedBlock:
    """Feature-major 8-bit bin indexes for a block, plus a NaN diagnostic count."""

    bins: np.ndarray  # uint8, shape (n_features, n_samples), contiguous per feature
    nan_count: int = 0

    @property
    def n_features(self) -> int:
        return self.bins.shape[0]

    @property
    def n_samples(self) -> int:
        return self.bins.shape[1]


def bin_index(value, borders) -> int:
    """Count of borders the value strictly exceeds, compared in float32.

    Result lies in [0, len(borders)] and is monotone nondecreasing in value;
    a value equal to a border is NOT counted (ties go to the lower bin).
    NaN compares false against every border and lands in bin 0.
    """
    v = float(np.float32(value))
    border_list = [float(b) for b in np.asarray(borders, dtype=np.float32)]
    return bisect_left(border_list, v)


def binarize_block(
    raw: RawBlock, borders, backend: Backend = SCALAR, profiler=None
) -> QuantizedBlock:
    """Quantize a raw block against the per-feature border schema.

    bins[f][s] == bin_index(raw.values[s][f], borders[f]) for both backends;
    integer outputs make the backends bit-exact.
    """
    if raw.n_features != len(borders):
        raise ValueError(
            f"feature-count mismatch: block has {raw.n_features} features, "
            f"schema covers {len(borders)}"
        )
    prof = profiler if profiler is not None else DISABLED
    feature_major = np.ascontiguousarray(raw.values.T)
    bins = np.empty((raw.n_features, raw.n_samples), dtype=np.uint8)
    for f in range(raw.n_features):
        with prof.scope("binarize_floats"):
            k_binarize(feature_major[f], borders[f], bins[f], backend)
    nan_count = int(np.isnan(raw.values).sum())
    return QuantizedBlock(bins=bins, nan_count=nan_count)
