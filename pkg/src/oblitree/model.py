"""Oblivious-tree ensemble data model: types, validation, JSON persistence,
and a seeded synthetic generator.

An oblivious tree of depth d tests one (feature, threshold) condition per
level, so a leaf is addressed by a d-bit integer and the tree stores exactly
2**d leaf rows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

MAX_DEPTH = 16
MAX_BORDERS = 255  # bin indexes must fit an unsigned byte


class ModelError(ValueError):
    """Raised for malformed model files or ensembles violating invariants."""


@dataclass(frozen=True, eq=False)
class FloatFeatureBorders:
    """Trained bin boundaries for one float feature, strictly ascending."""

    feature_index: int
    borders: np.ndarray  # float32, shape (n_borders,)

    def __post_init__(self):
        borders = np.asarray(self.borders, dtype=np.float32).reshape(-1)
        object.__setattr__(self, "borders", borders)
        f = self.feature_index
        if f < 0:
            raise ModelError(f"feature {f}: feature_index must be >= 0")
        if borders.size > MAX_BORDERS:
            raise ModelError(
                f"feature {f}: {borders.size} borders exceed the maximum of {MAX_BORDERS}"
            )
        if np.isnan(borders).any():
            raise ModelError(f"feature {f}: borders contain NaN")
        if borders.size > 1 and not np.all(borders[:-1] < borders[1:]):
            raise ModelError(f"feature {f}: borders are not strictly ascending")

    def __eq__(self, other):
        if not isinstance(other, FloatFeatureBorders):
            return NotImplemented
        return self.feature_index == other.feature_index and np.array_equal(
            self.borders, other.borders
        )


@dataclass(frozen=True, eq=False)
class ObliviousTree:
    """One oblivious tree: d per-level splits and a (2**d, n_dims) leaf table."""

    depth: int
    level_splits: tuple  # ((feature_index, border_bin), ...) of length depth
    leaf_values: np.ndarray  # float64, shape (2**depth, n_dims)

    def __post_init__(self):
        d = self.depth
        if not 1 <= d <= MAX_DEPTH:
            raise ModelError(f"tree depth {d} outside [1, {MAX_DEPTH}]")
        splits = tuple((int(f), int(b)) for f, b in self.level_splits)
        object.__setattr__(self, "level_splits", splits)
        if len(splits) != d:
            raise ModelError(
                f"tree of depth {d} has {len(splits)} level splits (expected {d})"
            )
        for i, (f, b) in enumerate(splits):
            if f < 0:
                raise ModelError(f"tree level {i}: negative feature index {f}")
            if not 0 <= b <= MAX_BORDERS:
                raise ModelError(f"tree level {i}: border_bin {b} outside [0, {MAX_BORDERS}]")
        leaves = np.asarray(self.leaf_values, dtype=np.float64)
        if leaves.ndim != 2:
            raise ModelError("leaf_values must be a 2-d matrix")
        if leaves.shape[0] != 2**d:
            raise ModelError(
                f"leaf count mismatch: {leaves.shape[0]} leaf rows for depth {d} "
                f"(expected {2**d})"
            )
        if not np.isfinite(leaves).all():
            raise ModelError("leaf_values contain non-finite entries")
        object.__setattr__(self, "leaf_values", leaves)

    @property
    def n_dims(self) -> int:
        return self.leaf_values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ObliviousTree):
            return NotImplemented
        return (
            self.depth == other.depth
            and self.level_splits == other.level_splits
            and np.array_equal(self.leaf_values, other.leaf_values)
        )


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Immutable trained model: border schema, trees, and affine output adjustment.

    Immutable after construction and safe to share across concurrent workers.
    """

    n_features: int
    n_dims: int
    borders: tuple  # (FloatFeatureBorders, ...)
    trees: tuple  # (ObliviousTree, ...)
    scale: float = 1.0
    bias: np.ndarray = None

    def __post_init__(self):
        if self.n_features < 1:
            raise ModelError(f"n_features must be >= 1, got {self.n_features}")
        if self.n_dims < 1:
            raise ModelError(f"n_dims must be >= 1, got {self.n_dims}")
        object.__setattr__(self, "borders", tuple(self.borders))
        object.__setattr__(self, "trees", tuple(self.trees))
        if not math.isfinite(self.scale):
            raise ModelError("scale must be finite")
        bias = (
            np.zeros(self.n_dims, dtype=np.float64)
            if self.bias is None
            else np.asarray(self.bias, dtype=np.float64).reshape(-1)
        )
        if bias.shape[0] != self.n_dims:
            raise ModelError(
                f"bias has {bias.shape[0]} entries, expected n_dims={self.n_dims}"
            )
        if not np.isfinite(bias).all():
            raise ModelError("bias must be finite")
        object.__setattr__(self, "bias", bias)

        table = [np.empty(0, dtype=np.float32)] * self.n_features
        seen = set()
        for fb in self.borders:
            if fb.feature_index in seen:
                raise ModelError(f"feature {fb.feature_index}: duplicate border schema entry")
            if fb.feature_index >= self.n_features:
                raise ModelError(
                    f"feature {fb.feature_index}: outside [0, {self.n_features})"
                )
            seen.add(fb.feature_index)
            table[fb.feature_index] = fb.borders
        object.__setattr__(self, "_border_table", table)

        for t, tree in enumerate(self.trees):
            if tree.n_dims != self.n_dims:
                raise ModelError(
                    f"tree {t}: leaf width {tree.n_dims} does not match n_dims={self.n_dims}"
                )
            for i, (f, b) in enumerate(tree.level_splits):
                if f >= self.n_features:
                    raise ModelError(
                        f"tree {t} level {i}: feature {f} outside [0, {self.n_features})"
                    )
                if b > table[f].size:
                    raise ModelError(
                        f"tree {t} level {i}: border_bin {b} exceeds the "
                        f"{table[f].size} borders of feature {f}"
                    )

    def border_table(self) -> list:
        """Per-feature border arrays indexed by feature (empty where unbinned)."""
        return self._border_table

    def __eq__(self, other):
        if not isinstance(other, Ensemble):
            return NotImplemented
        return (
            self.n_features == other.n_features
            and self.n_dims == other.n_dims
            and self.scale == other.scale
            and np.array_equal(self.bias, other.bias)
            and self.borders == other.borders
            and self.trees == other.trees
        )


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise ModelError(f"{context}: missing field '{key}'")
    return doc[key]


def load_model(path) -> Ensemble:
    """Load an ensemble from its JSON model file.

    Raises ModelError on parse failures or invariant violations; the message
    names the offending tree or feature.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: top-level value must be an object")
    try:
        borders = tuple(
            FloatFeatureBorders(
                feature_index=int(_require(entry, "feature", "borders entry")),
                borders=np.asarray(_require(entry, "values", "borders entry"), np.float32),
            )
            for entry in _require(doc, "borders", path)
        )
        n_dims = int(_require(doc, "n_dims", path))
        trees = []
        for t, entry in enumerate(_require(doc, "trees", path)):
            depth = int(_require(entry, "depth", f"tree {t}"))
            splits = [
                (int(_require(s, "feature", f"tree {t} split")),
                 int(_require(s, "border_bin", f"tree {t} split")))
                for s in _require(entry, "splits", f"tree {t}")
            ]
            flat = np.asarray(_require(entry, "leaf_values", f"tree {t}"), np.float64)
            if depth < 1 or depth > MAX_DEPTH:
                raise ModelError(f"tree {t}: depth {depth} outside [1, {MAX_DEPTH}]")
            if flat.ndim != 1 or flat.size % max(n_dims, 1) != 0:
                raise ModelError(
                    f"tree {t}: leaf_values length {flat.size} is not a multiple of "
                    f"n_dims={n_dims}"
                )
            try:
                trees.append(
                    ObliviousTree(depth=depth, level_splits=splits,
                                  leaf_values=flat.reshape(-1, n_dims))
                )
            except ModelError as exc:
                raise ModelError(f"tree {t}: {exc}") from exc
        return Ensemble(
            n_features=int(_require(doc, "n_features", path)),
            n_dims=n_dims,
            borders=borders,
            trees=tuple(trees),
            scale=float(doc.get("scale", 1.0)),
            bias=doc.get("bias"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"{path}: malformed model document: {exc}") from exc


def save_model(ensemble: Ensemble, path) -> None:
    """Write the ensemble as JSON; load_model(save_model(e)) == e structurally.

    Floats are serialized at full round-trip precision.
    """
    doc = {
        "n_features": ensemble.n_features,
        "n_dims": ensemble.n_dims,
        "scale": float(ensemble.scale),
        "bias": [float(b) for b in ensemble.bias],
        "borders": [
            {"feature": fb.feature_index, "values": [float(v) for v in fb.borders]}
            for fb in ensemble.borders
        ],
        "trees": [
            {
                "depth": tree.depth,
                "splits": [{"feature": f, "border_bin": b} for f, b in tree.level_splits],
                "leaf_values": [float(v) for v in tree.leaf_values.reshape(-1)],
            }
            for tree in ensemble.trees
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def gen_synthetic_model(
    seed: int,
    n_features: int,
    n_trees: int,
    depth: int,
    n_dims: int = 1,
    borders_per_feature: int = 32,
) -> Ensemble:
    """Deterministically generate a valid random ensemble for a given seed.

    Borders are drawn strictly ascending in (-1, 1); every split threshold
    stays within its feature's border range; leaf values are standard normal.
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise ModelError(f"depth {depth} outside [1, {MAX_DEPTH}]")
    if not 1 <= borders_per_feature <= MAX_BORDERS:
        raise ModelError(
            f"borders_per_feature {borders_per_feature} outside [1, {MAX_BORDERS}]"
        )
    if n_features < 1 or n_trees < 1 or n_dims < 1:
        raise ModelError("n_features, n_trees and n_dims must all be >= 1")

    rng = np.random.default_rng(seed)
    borders = []
    for f in range(n_features):
        vals = np.unique(rng.uniform(-1.0, 1.0, borders_per_feature).astype(np.float32))
        while vals.size < borders_per_feature:  # collisions after float32 rounding
            extra = rng.uniform(-1.0, 1.0, borders_per_feature).astype(np.float32)
            vals = np.unique(np.concatenate([vals, extra]))
        borders.append(FloatFeatureBorders(f, vals[:borders_per_feature]))

    trees = []
    for _ in range(n_trees):
        splits = [
            (int(rng.integers(0, n_features)), int(rng.integers(1, borders_per_feature + 1)))
            for _ in range(depth)
        ]
        leaves = rng.standard_normal((2**depth, n_dims))
        trees.append(ObliviousTree(depth=depth, level_splits=splits, leaf_values=leaves))

    return Ensemble(
        n_features=n_features,
        n_dims=n_dims,
        borders=tuple(borders),
        trees=tuple(trees),
    )
