"""Score targets against axes and compare groups of scores.

Targets are placed on an axis by cosine similarity to its direction
vector.  Group comparisons come in two forms: a category-vs-background
contrast (bootstrap estimate plus one-sample t-test of the per-term scores
against the background mean) and a plain mean-difference ranking between
two sets of scores per axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from sklearn.base import BaseEstimator, TransformerMixin

from .axes import Axis
from .store import ZScoreStats, zscore
from .utils import check_matrix, check_vector, cosine, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_BOOTSTRAP = 1000
DEFAULT_ALPHA = 0.001


@dataclass(frozen=True)
class AxisScore:
    target_key: str
    axis_id: str
    score: float
    assigned_pole: str  # "left" | "right"


def axis_score(
    target_key: str,
    target,
    axis: Axis,
    stats: ZScoreStats | None = None,
) -> AxisScore:
    """Cosine similarity of a target to an axis vector.

    For z-scored axes the target is standardized with the same stats first.
    A positive score assigns the left pole; zero and below assign the right.
    """
    vec = check_vector(target, name="target", dim=axis.vector.size)
    if axis.zscored:
        if stats is None:
            raise ValueError(f"axis {axis.axis_id} is z-scored; stats required")
        vec = zscore(vec, stats)
    score = cosine(vec, axis.vector)
    return AxisScore(
        target_key=target_key,
        axis_id=axis.axis_id,
        score=score,
        assigned_pole="left" if score > 0.0 else "right",
    )


def rank_poles(
    target,
    axes: list[Axis],
    top_k: int | None = None,
    stats: ZScoreStats | None = None,
) -> list[tuple[str, str, float]]:
    """Rank axes for one target by absolute score, descending.

    Returns (axis_id, assigned_pole, |score|) triples; ties break on axis id.
    """
    if not axes:
        raise ValueError("no axes to rank")
    scored = [axis_score("target", target, axis, stats) for axis in axes]
    scored.sort(key=lambda s: (-abs(s.score), s.axis_id))
    if top_k is not None:
        scored = scored[:top_k]
    return [(s.axis_id, s.assigned_pole, abs(s.score)) for s in scored]


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    ci_low: float
    ci_high: float


def bootstrap_mean(scores, n_boot: int = DEFAULT_BOOTSTRAP, seed: int = 0) -> BootstrapResult:
    """Bootstrap estimate of a mean with a percentile 95% interval.

    Draws ``n_boot`` resamples of size n with replacement; the reported
    mean is the mean of resample means and the interval is the 2.5/97.5
    percentile of those means.  Fully deterministic under ``seed``.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("scores must be a non-empty 1-D sequence")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(n_boot, arr.size))
    means = arr[idx].mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    return BootstrapResult(mean=float(means.mean()), ci_low=float(lo), ci_high=float(hi))


def _t_pvalue(sample: np.ndarray, popmean: float) -> float:
    """Two-sided one-sample t-test p-value, with the zero-variance edge pinned."""
    if np.ptp(sample) == 0.0:
        # all scores identical: no evidence against an equal null, certain
        # rejection of a different one
        return 1.0 if math.isclose(float(sample[0]), popmean,
                                   rel_tol=1e-12, abs_tol=1e-12) else 0.0
    res = sps.ttest_1samp(sample, popmean)
    return float(res.pvalue)


@dataclass(frozen=True)
class ContrastResult:
    axis_id: str
    category_mean: float
    background_mean: float
    difference: float
    direction: str  # "+" | "-"
    p_value: float
    ci_low: float
    ci_high: float
    significant: bool


def contrast_experiment(
    category_scores: dict[str, list[float]],
    background_scores: dict[str, list[float]],
    n_boot: int = DEFAULT_BOOTSTRAP,
    alpha: float = DEFAULT_ALPHA,
    seed: int = 0,
    null_value: float | None = None,
) -> list[ContrastResult]:
    """Which axes shift significantly for a category of targets?

    Per axis, the n category scores are tested against the pooled
    background mean (one-sample t-test, two-sided) and the category mean
    gets a bootstrap interval.  The t-test runs on the per-term scores, not
    on bootstrap replicates, so its calibration does not depend on
    ``n_boot``.  Only significant axes are returned, ranked by absolute
    difference.  ``null_value`` overrides the background mean as the tested
    null when given.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    results = []
    for axis_id in sorted(category_scores):
        cat = np.asarray(category_scores[axis_id], dtype=np.float64)
        if cat.size < 2:
            logger.warning("axis %s: %d category scores, need >= 2; excluded", axis_id, cat.size)
            continue
        if null_value is not None:
            bg_mean = float(null_value)
        else:
            bg = np.asarray(background_scores.get(axis_id, ()), dtype=np.float64)
            if bg.size == 0:
                logger.warning("axis %s: no background scores; excluded", axis_id)
                continue
            bg_mean = float(bg.mean())
        p = _t_pvalue(cat, bg_mean)
        boot = bootstrap_mean(cat, n_boot=n_boot, seed=derive_seed(seed, "contrast", axis_id))
        diff = float(cat.mean()) - bg_mean
        results.append(
            ContrastResult(
                axis_id=axis_id,
                category_mean=float(cat.mean()),
                background_mean=bg_mean,
                difference=diff,
                direction="+" if diff >= 0 else "-",
                p_value=p,
                ci_low=boot.ci_low,
                ci_high=boot.ci_high,
                significant=bool(p < alpha),
            )
        )
    results = [r for r in results if r.significant]
    results.sort(key=lambda r: (-abs(r.difference), r.axis_id))
    return results


@dataclass(frozen=True)
class VariantContrast:
    axis_id: str
    mean_a: float
    ci_a: float
    mean_b: float
    ci_b: float
    difference: float  # mean_a - mean_b


def _mean_ci(arr: np.ndarray) -> tuple[float, float]:
    mean = float(arr.mean())
    ci = float(1.96 * arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return mean, ci


def mean_difference_ranking(
    scores_a: dict[str, list[float]],
    scores_b: dict[str, list[float]],
) -> list[VariantContrast]:
    """Rank axes by how far apart two groups' mean scores sit.

    Both groups must have scores for every axis compared; each group mean
    carries a 95% normal-approximation CI.
    """
    axes = sorted(set(scores_a) & set(scores_b))
    if not axes:
        raise ValueError("no axes shared by both groups")
    rows = []
    for axis_id in axes:
        a = np.asarray(scores_a[axis_id], dtype=np.float64)
        b = np.asarray(scores_b[axis_id], dtype=np.float64)
        if a.size == 0 or b.size == 0:
            raise ValueError(f"axis {axis_id}: empty score group")
        mean_a, ci_a = _mean_ci(a)
        mean_b, ci_b = _mean_ci(b)
        rows.append(
            VariantContrast(
                axis_id=axis_id,
                mean_a=mean_a, ci_a=ci_a,
                mean_b=mean_b, ci_b=ci_b,
                difference=mean_a - mean_b,
            )
        )
    rows.sort(key=lambda r: (-abs(r.difference), r.axis_id))
    return rows


class SemanticAxisProjector(BaseEstimator, TransformerMixin):
    """Transformer mapping embeddings to per-axis cosine scores.

    transform(X) returns an (n_targets, n_axes) matrix; columns follow the
    axis order given at construction.  Z-scored axes standardize targets
    with the supplied stats before scoring.
    """

    def __init__(self, axes: list[Axis], stats: ZScoreStats | None = None):
        self.axes = axes
        self.stats = stats

    def fit(self, X=None, y=None):
        if not self.axes:
            raise ValueError("projector needs at least one axis")
        dims = {ax.vector.size for ax in self.axes}
        if len(dims) != 1:
            raise ValueError(f"axes have mixed dims: {sorted(dims)}")
        if any(ax.zscored for ax in self.axes) and self.stats is None:
            raise ValueError("z-scored axes require stats")
        self.dim_ = dims.pop()
        mat = np.stack([ax.vector for ax in self.axes])
        norms = np.linalg.norm(mat, axis=1)
        if np.any(norms == 0):
            bad = self.axes[int(np.argmin(norms))].axis_id
            raise ValueError(f"axis {bad} has a zero vector")
        self._units = mat / norms[:, None]
        self._z_mask = np.array([ax.zscored for ax in self.axes])
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "_units"):
            self.fit()
        X = check_matrix(X)
        if X.shape[1] != self.dim_:
            raise ValueError(f"targets have dim {X.shape[1]}, axes have {self.dim_}")
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero-norm target row")
        out = np.empty((X.shape[0], len(self.axes)))
        raw = ~self._z_mask
        if raw.any():
            out[:, raw] = (X / norms[:, None]) @ self._units[raw].T
        if self._z_mask.any():
            Xz = (X - self.stats.mean) / self.stats.std
            zn = np.linalg.norm(Xz, axis=1)
            if np.any(zn == 0):
                raise ValueError("zero-norm target row after z-scoring")
            out[:, self._z_mask] = (Xz / zn[:, None]) @ self._units[self._z_mask].T
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array([ax.axis_id for ax in self.axes], dtype=object)
