"""Semantic axes between antonym poles.

Build axis directions from pole adjective embeddings, check them for
internal consistency, and use them to measure how words and their contexts
differ across categories, communities, and time.
"""

from .axes import Axis, build_axis, load_axes_bundle, realize_all, write_axes_bundle
from .consistency import (
    ConsistencyReport,
    axis_consistency,
    loo_cosine,
    pole_consistency,
    summarize_method,
)
from .contexts import (
    ContextPool,
    ContextRecord,
    length_ok,
    select_default_contexts,
    select_prob_contexts,
)
from .lexicon import AxisSpec, Pole, Synset, SynsetDb, build_axes, expand_pole
from .projection import (
    AxisScore,
    SemanticAxisProjector,
    axis_score,
    bootstrap_mean,
    contrast_experiment,
    mean_difference_ranking,
    rank_poles,
)
from .store import (
    EmbeddingSet,
    EmbeddingZScorer,
    SaxeFormatError,
    ZScoreStats,
    compute_zscore_stats,
    mean_pool,
    zscore,
)
from .timeseries import (
    ClusterModel,
    FrequencySeries,
    KSpectralCentroid,
    build_series,
    ksc_cluster,
    ksc_distance,
    smooth,
)

__version__ = "0.1.0"

__all__ = [
    "Axis", "AxisScore", "AxisSpec", "ClusterModel", "ConsistencyReport",
    "ContextPool", "ContextRecord", "EmbeddingSet", "EmbeddingZScorer",
    "FrequencySeries", "KSpectralCentroid", "Pole", "SaxeFormatError",
    "SemanticAxisProjector", "Synset", "SynsetDb", "ZScoreStats",
    "axis_consistency", "axis_score", "bootstrap_mean", "build_axes",
    "build_axis", "build_series", "compute_zscore_stats",
    "contrast_experiment", "expand_pole", "ksc_cluster", "ksc_distance",
    "length_ok", "load_axes_bundle", "loo_cosine", "mean_difference_ranking",
    "mean_pool", "pole_consistency", "rank_poles", "realize_all",
    "select_default_contexts", "select_prob_contexts", "smooth",
    "summarize_method", "write_axes_bundle", "zscore",
]
