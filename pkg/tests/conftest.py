import numpy as np
import pytest

from oblitree import Ensemble, FloatFeatureBorders, ObliviousTree


@pytest.fixture
def minimal_ensemble():
    """Smallest legal model: 1 feature, 1 border, 1 depth-1 tree, leaves [-1, +1]."""
    return Ensemble(
        n_features=1,
        n_dims=1,
        borders=(FloatFeatureBorders(0, np.array([0.0], np.float32)),),
        trees=(
            ObliviousTree(
                depth=1, level_splits=[(0, 1)], leaf_values=np.array([[-1.0], [1.0]])
            ),
        ),
    )


def make_random_ensemble(rng, n_features=6, n_trees=5, depth=3, n_dims=1, n_borders=8):
    """Hand-rolled random ensemble builder independent of gen_synthetic_model."""
    borders = []
    for f in range(n_features):
        vals = np.sort(
            rng.choice(
                np.linspace(-2, 2, 4001).astype(np.float32), n_borders, replace=False
            )
        )
        borders.append(FloatFeatureBorders(f, vals))
    trees = []
    for _ in range(n_trees):
        splits = [
            (int(rng.integers(0, n_features)), int(rng.integers(0, n_borders + 1)))
            for _ in range(depth)
        ]
        trees.append(
            ObliviousTree(
                depth=depth,
                level_splits=splits,
                leaf_values=rng.standard_normal((2**depth, n_dims)),
            )
        )
    return Ensemble(
        n_features=n_features,
        n_dims=n_dims,
        borders=tuple(borders),
        trees=tuple(trees),
        scale=float(rng.uniform(0.5, 1.5)),
        bias=rng.standard_normal(n_dims),
    )
