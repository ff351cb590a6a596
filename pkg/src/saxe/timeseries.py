"""Normalized frequency series and shape-based clustering.

Series record, per term, the share of each month's documents that contain
the term.  Clustering groups series by shape under a scale-invariant but
translation-sensitive distance,

    d(x, y) = ||x - a*y|| / ||x||   with   a = x.y / ||y||^2,

which equals the sine of the angle between x and y, so series that peak at
different times stay far apart no matter how they are scaled.  Cluster
centroids are the principal eigenvector of the members' normalized scatter
matrix, the exact minimizer of the within-cluster sum of squared distances.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .utils import check_matrix, check_vector, derive_seed

logger = logging.getLogger(__name__)

DEFAULT_K = 6
DEFAULT_RESTARTS = 10
DEFAULT_MAX_ITER = 100
DEFAULT_KERNEL = 3


def month_range(first: str, last: str) -> list[str]:
    """Inclusive list of YYYY-MM keys from first to last."""
    fy, fm = (int(p) for p in first.split("-"))
    ly, lm = (int(p) for p in last.split("-"))
    if (fy, fm) > (ly, lm):
        raise ValueError(f"month range {first}..{last} is reversed")
    out = []
    y, m = fy, fm
    while (y, m) <= (ly, lm):
        out.append(f"{y:04d}-{m:02d}")
        m += 1
        if m == 13:
            y, m = y + 1, 1
    return out


@dataclass(frozen=True)
class FrequencySeries:
    term: str
    months: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != len(self.months):
            raise ValueError(f"series {self.term}: values/months length mismatch")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError(f"series {self.term}: values must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    @property
    def usable(self) -> bool:
        return bool(self.values.sum() > 0)


def build_series(
    doc_counts: dict[str, dict[str, int]],
    totals: dict[str, int],
) -> list[FrequencySeries]:
    """Per-term monthly document share over a contiguous month grid.

    The grid runs from the earliest to the latest month in ``totals``,
    zero-filled.  Counts are documents containing the term, so a term
    counted once per document; months with a zero total contribute 0 with
    a warning.  All-zero series are flagged unusable downstream.
    """
    if not totals:
        raise ValueError("totals is empty")
    months = month_range(min(totals), max(totals))
    for m in months:
        if totals.get(m, 0) <= 0:
            logger.warning("month %s has no documents; frequencies forced to 0", m)
    out = []
    for term in sorted(doc_counts):
        counts = doc_counts[term]
        values = np.array(
            [counts.get(m, 0) / totals[m] if totals.get(m, 0) > 0 else 0.0 for m in months]
        )
        series = FrequencySeries(term=term, months=tuple(months), values=values)
        if not series.usable:
            logger.warning("term %r never occurs; series unusable", term)
        out.append(series)
    return out


def smooth(series: FrequencySeries, kernel: int = DEFAULT_KERNEL) -> FrequencySeries:
    """Centered moving average; windows truncate at the boundaries."""
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and >= 1, got {kernel}")
    half = kernel // 2
    vals = series.values
    out = np.empty_like(vals)
    for i in range(vals.size):
        lo = max(0, i - half)
        hi = min(vals.size, i + half + 1)
        out[i] = vals[lo:hi].mean()
    return FrequencySeries(term=series.term, months=series.months, values=out)


def ksc_distance(x, y) -> float:
    """Scale-invariant residual distance between two series; in [0, 1]."""
    x = check_vector(x, name="x")
    y = check_vector(y, name="y", dim=x.size)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        raise ValueError("ksc_distance undefined for zero-norm series")
    alpha = float(np.dot(x, y)) / (ny * ny)
    return float(np.linalg.norm(x - alpha * y) / nx)


class KSpectralCentroid(BaseEstimator, ClusterMixin):
    """Shape-based series clustering with spectral centroid updates.

    Alternates nearest-centroid assignment (ties to the lowest cluster
    index) with centroid replacement by the principal right singular
    vector of the members' normalized series, sign-flipped so centroid
    components sum to >= 0.  Empty clusters are reseeded with the series
    farthest from their current centroid.  The best of ``n_init``
    restarts by total squared distance wins; everything is deterministic
    under ``random_state``.

    Attributes
    ----------
    cluster_centers_ : (n_clusters, n_months) unit-norm centroids
    labels_ : cluster index per input series
    inertia_ : final sum of squared distances
    objective_history_ : per-iteration objective of the winning restart
    objective_histories_ : the same for every restart
    """

    def __init__(
        self,
        n_clusters: int = DEFAULT_K,
        max_iter: int = DEFAULT_MAX_ITER,
        n_init: int = DEFAULT_RESTARTS,
        random_state: int = 0,
    ):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.n_init = n_init
        self.random_state = random_state

    def _normalize(self, X) -> np.ndarray:
        X = check_matrix(X)
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0):
            bad = int(np.flatnonzero(norms == 0)[0])
            raise ValueError(f"series row {bad} has zero norm; drop unusable series first")
        return X / norms[:, None]

    def fit(self, X, y=None):
        Xn = self._normalize(X)
        n = Xn.shape[0]
        if n < self.n_clusters:
            raise ValueError(f"need at least {self.n_clusters} usable series, got {n}")
        best = None
        self.objective_histories_ = []
        for restart in range(self.n_init):
            rng = np.random.default_rng(derive_seed(self.random_state, "ksc", restart))
            init = rng.choice(n, size=self.n_clusters, replace=False)
            centers = Xn[init].copy()
            centers[centers.sum(axis=1) < 0] *= -1.0
            labels = None
            history = []
            converged = False
            n_iter = 0
            for n_iter in range(1, self.max_iter + 1):
                d2 = self._sqdist(Xn, centers)
                new_labels = np.argmin(d2, axis=1)
                history.append(float(d2[np.arange(n), new_labels].sum()))
                if labels is not None and np.array_equal(new_labels, labels):
                    converged = True
                    break
                labels = new_labels
                for k in range(self.n_clusters):
                    members = Xn[labels == k]
                    if members.shape[0] == 0:
                        farthest = int(np.argmax(d2[:, k]))
                        centers[k] = Xn[farthest]
                    else:
                        _, _, vt = np.linalg.svd(members, full_matrices=False)
                        v = vt[0]
                        if v.sum() < 0:
                            v = -v
                        centers[k] = v
            self.objective_histories_.append(history)
            run = (history[-1], restart, labels, centers, n_iter, converged, history)
            if best is None or run[0] < best[0]:
                best = run
        _, _, labels, centers, n_iter, converged, history = best
        self.cluster_centers_ = centers
        self.labels_ = labels
        self.inertia_ = history[-1]
        self.n_iter_ = n_iter
        self.converged_ = converged
        self.objective_history_ = history
        self.n_features_in_ = Xn.shape[1]
        return self

    @staticmethod
    def _sqdist(Xn: np.ndarray, centers: np.ndarray) -> np.ndarray:
        # for unit-norm rows and centroids, d^2 = 1 - (x.mu)^2
        proj = Xn @ centers.T
        return np.clip(1.0 - proj**2, 0.0, None)

    def predict(self, X) -> np.ndarray:
        Xn = self._normalize(X)
        if Xn.shape[1] != self.n_features_in_:
            raise ValueError(f"series length {Xn.shape[1]} != fitted {self.n_features_in_}")
        return np.argmin(self._sqdist(Xn, self.cluster_centers_), axis=1)


@dataclass(frozen=True)
class ClusterModel:
    n_clusters: int
    months: tuple[str, ...]
    centroids: np.ndarray
    assignments: dict[str, int]
    n_iter: int
    converged: bool
    inertia: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "K": self.n_clusters,
                "months": list(self.months),
                "centroids": [[float(v) for v in row] for row in self.centroids],
                "assignments": {t: int(c) for t, c in sorted(self.assignments.items())},
                "n_iter": self.n_iter,
                "converged": self.converged,
                "inertia": self.inertia,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ClusterModel":
        row = json.loads(text)
        return cls(
            n_clusters=int(row["K"]),
            months=tuple(row["months"]),
            centroids=np.asarray(row["centroids"], dtype=np.float64),
            assignments={t: int(c) for t, c in row["assignments"].items()},
            n_iter=int(row["n_iter"]),
            converged=bool(row["converged"]),
            inertia=float(row["inertia"]),
        )


def ksc_cluster(
    series: list[FrequencySeries],
    n_clusters: int = DEFAULT_K,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
    restarts: int = DEFAULT_RESTARTS,
) -> ClusterModel:
    """Cluster usable series; unusable (all-zero) ones are dropped with a warning."""
    usable = [s for s in series if s.usable]
    for s in series:
        if not s.usable:
            logger.warning("series %r is all zeros; excluded from clustering", s.term)
    if len(usable) < n_clusters:
        raise ValueError(f"need at least {n_clusters} usable series, got {len(usable)}")
    grids = {s.months for s in usable}
    if len(grids) != 1:
        raise ValueError("series are on different month grids")
    X = np.stack([s.values for s in usable])
    est = KSpectralCentroid(
        n_clusters=n_clusters, max_iter=max_iter, n_init=restarts, random_state=seed
    ).fit(X)
    return ClusterModel(
        n_clusters=n_clusters,
        months=usable[0].months,
        centroids=est.cluster_centers_,
        assignments={s.term: int(label) for s, label in zip(usable, est.labels_)},
        n_iter=est.n_iter_,
        converged=est.converged_,
        inertia=float(est.inertia_),
    )


def axis_variance(term_scores) -> float:
    """Population variance of per-term scores on one axis."""
    arr = np.asarray(term_scores, dtype=np.float64)
    if arr.size < 2:
        raise ValueError(f"need >= 2 scores for a variance, got {arr.size}")
    return float(arr.var(ddof=0))


@dataclass(frozen=True)
class ProfileRow:
    cluster: int
    freq_half: str  # "low" | "high"
    axis_id: str
    mean: float
    ci95: float | None
    n_terms: int


def cluster_axis_profile(
    model: ClusterModel,
    term_scores: dict[str, dict[str, float]],
    frequencies: dict[str, float],
    percentile: float = 50.0,
) -> list[ProfileRow]:
    """Mean axis score per (cluster, frequency half, axis) with 95% CIs.

    Terms are split at the given percentile of overall frequency across all
    clustered terms (>= cutoff lands in "high").  Groups with fewer than
    two terms report no CI.
    """
    terms = sorted(model.assignments)
    missing = [t for t in terms if t not in frequencies]
    if missing:
        raise ValueError(f"no frequency for clustered terms: {missing[:5]}")
    cutoff = float(np.percentile([frequencies[t] for t in terms], percentile))
    halves = {t: ("high" if frequencies[t] >= cutoff else "low") for t in terms}
    rows = []
    for axis_id in sorted(term_scores):
        scores = term_scores[axis_id]
        missing = [t for t in terms if t not in scores]
        if missing:
            raise ValueError(f"axis {axis_id}: clustered terms without scores: {missing[:5]}")
        for cluster in range(model.n_clusters):
            for half in ("low", "high"):
                group = [
                    scores[t]
                    for t in terms
                    if model.assignments[t] == cluster and halves[t] == half
                ]
                if not group:
                    continue
                arr = np.asarray(group, dtype=np.float64)
                ci = (
                    float(1.96 * arr.std(ddof=1) / np.sqrt(arr.size))
                    if arr.size >= 2
                    else None
                )
                rows.append(
                    ProfileRow(
                        cluster=cluster,
                        freq_half=half,
                        axis_id=axis_id,
                        mean=float(arr.mean()),
                        ci95=ci,
                        n_terms=arr.size,
                    )
                )
    rows.sort(key=lambda r: (r.cluster, r.freq_half, r.axis_id))
    return rows
