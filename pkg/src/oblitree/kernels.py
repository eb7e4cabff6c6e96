"""The three hot kernels, each in two schedules.

The scalar backend is the per-element reference. The vectorized backend
walks the data in chunks of W lanes and applies masked operations, the
portable shape of a SIMD loop; the n mod W tail always falls back to the
scalar path. Integer kernels must match the scalar backend bit-exactly for
every W and every tail length; the float kernel is allowed to reassociate
and is held to a relative tolerance instead.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

LANE_COUNTS = (4, 8, 16, 32)


@dataclass(frozen=True)
class Backend:
    """Kernel dispatch selector: lanes == 0 is scalar, otherwise chunk width W."""

    lanes: int = 0

    def __post_init__(self):
        if self.lanes != 0 and self.lanes not in LANE_COUNTS:
            raise ValueError(
                f"lane count must be one of {LANE_COUNTS}, got {self.lanes}"
            )

    @property
    def vectorized(self) -> bool:
        return self.lanes != 0

    @property
    def name(self) -> str:
        return f"vec:{self.lanes}" if self.lanes else "scalar"


SCALAR = Backend(0)


def parse_backend(text: str) -> Backend:
    """Parse 'scalar' or 'vec:W' with W in {4, 8, 16, 32}."""
    if text == "scalar":
        return SCALAR
    if text.startswith("vec:"):
        try:
            return Backend(int(text[4:]))
        except ValueError as exc:
            raise ValueError(f"bad backend '{text}': {exc}") from exc
    raise ValueError(f"unknown backend '{text}' (expected 'scalar' or 'vec:W')")


def k_calc_indexes(bins, threshold: int, level: int, index_acc, backend: Backend = SCALAR):
    """OR each sample's split bit for one tree level into its index accumulator.

    index_acc[s] |= (bins[s] >= threshold) << level, unsigned compare.
    OR-only accumulation: distinct levels never clear previously set bits.
    """
    n = len(bins)
    if len(index_acc) != n:
        raise ValueError(f"index_acc length {len(index_acc)} != bins length {n}")
    if not 0 <= level < 32:
        raise ValueError(f"level {level} outside [0, 32)")
    start = 0
    if backend.vectorized:
        w = backend.lanes
        # Shift hoisted out of the loop: one lane vector of (1 << level).
        lane_bits = np.full(w, np.uint32(1 << level), dtype=np.uint32)
        main = n - n % w
        for c in range(0, main, w):
            out = index_acc[c : c + w]
            mask = bins[c : c + w] >= threshold
            np.bitwise_or(out, lane_bits, out=out, where=mask)
        start = main
    bit = np.uint32(1 << level)
    for s in range(start, n):
        if bins[s] >= threshold:
            index_acc[s] |= bit


def k_binarize(values, borders, out_bins, backend: Backend = SCALAR):
    """Write each value's bin index: the count of borders it strictly exceeds.

    Comparisons happen in float32 exactly as stored, so NaN lands in bin 0.
    """
    vals = np.asarray(values, dtype=np.float32)
    n = vals.shape[0]
    if len(out_bins) != n:
        raise ValueError(f"out_bins length {len(out_bins)} != values length {n}")
    start = 0
    if backend.vectorized:
        w = backend.lanes
        border_vals = np.asarray(borders, dtype=np.float32)
        ones = np.ones(w, dtype=np.uint8)
        acc = np.empty(w, dtype=np.uint8)
        main = n - n % w
        for c in range(0, main, w):
            chunk = vals[c : c + w]
            acc[:] = 0
            for b in border_vals:
                mask = chunk > b
                np.add(acc, ones, out=acc, where=mask)
            out_bins[c : c + w] = acc
        start = main
    if start < n:
        border_list = [float(b) for b in np.asarray(borders, dtype=np.float32)]
        tail = vals[start:n].tolist()
        for i, v in enumerate(tail):
            out_bins[start + i] = bisect_left(border_list, v)


def k_l2_sqr(a, b, backend: Backend = SCALAR) -> float:
    """Squared L2 distance with 32-bit accumulation.

    Scalar: one accumulator, sequential left to right. Vectorized: W partial
    sums (subtract, square, add per chunk), the tail folded into lane 0, then
    a sequential reduction of the partials. Reassociation makes the two paths
    agree only to relative 1e-5.
    """
    a = np.ascontiguousarray(a, dtype=np.float32)
    b = np.ascontiguousarray(b, dtype=np.float32)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"vector length mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if backend.vectorized:
        w = backend.lanes
        partials = np.zeros(w, dtype=np.float32)
        diff = np.empty(w, dtype=np.float32)
        main = n - n % w
        for c in range(0, main, w):
            np.subtract(a[c : c + w], b[c : c + w], out=diff)
            np.multiply(diff, diff, out=diff)
            np.add(partials, diff, out=partials)
        for i in range(main, n):
            d = a[i] - b[i]
            partials[0] += d * d
        total = np.float32(0.0)
        for p in partials:
            total = total + p
        return float(total)
    acc = np.float32(0.0)
    for i in range(n):
        d = a[i] - b[i]
        acc = acc + d * d
    return float(acc)
