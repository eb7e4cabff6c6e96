"""Batch inference engine for gradient-boosted oblivious decision trees.

Features are quantized to 8-bit bins against trained borders, leaf indexes
are computed bitwise level by level, and leaf values accumulate in float64.
Every hot kernel ships in a scalar reference schedule and a lane-parametric
masked schedule selected through Backend.
"""

from .kernels import LANE_COUNTS, SCALAR, Backend, k_binarize, k_calc_indexes, k_l2_sqr, parse_backend
from .knn import EmbeddingCorpus, embed_features, knn_search, l2_sqr_distance
from .model import (
    Ensemble,
    FloatFeatureBorders,
    ModelError,
    ObliviousTree,
    gen_synthetic_model,
    load_model,
    save_model,
)
from .predict import (
    DEFAULT_BLOCK_SIZE,
    OutputTransform,
    PredictionMatrix,
    accumulate_leaf_values,
    calc_leaf_indexes,
    predict_batch,
    predict_oracle,
)
from .profiler import ProfileReport, Profiler, ProfilerError, ScopeStats, compare_reports
from .quantize import QuantizedBlock, RawBlock, bin_index, binarize_block

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "DEFAULT_BLOCK_SIZE",
    "EmbeddingCorpus",
    "Ensemble",
    "FloatFeatureBorders",
    "LANE_COUNTS",
    "ModelError",
    "ObliviousTree",
    "OutputTransform",
    "PredictionMatrix",
    "ProfileReport",
    "Profiler",
    "ProfilerError",
    "QuantizedBlock",
    "RawBlock",
    "SCALAR",
    "ScopeStats",
    "accumulate_leaf_values",
    "bin_index",
    "binarize_block",
    "calc_leaf_indexes",
    "compare_reports",
    "embed_features",
    "gen_synthetic_model",
    "k_binarize",
    "k_calc_indexes",
    "k_l2_sqr",
    "knn_search",
    "l2_sqr_distance",
    "load_model",
    "parse_backend",
    "predict_batch",
    "predict_oracle",
    "save_model",
]
