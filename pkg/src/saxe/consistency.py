"""Leave-one-out consistency scoring for realized axes.

Hold out one adjective, rebuild the axis from everything else, and check
that the held-out adjective's (averaged) embedding still points toward its
own pole.  A pole's consistency is the mean of these cosines, negated for
the right pole so that positive always means self-consistent; an axis is
consistent when both poles score at least zero.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import mannwhitneyu

from .axes import Axis
from .store import EmbeddingSet, ZScoreStats, context_key, mean_pool, zscore
from .utils import cosine, fmt_num

logger = logging.getLogger(__name__)

PoleEmbeddings = dict[str, list[np.ndarray]]

_SIDES = ("left", "right")


def _pole_mean(groups: PoleEmbeddings, exclude: str | None = None,
               per_adjective_mean: bool = False) -> np.ndarray:
    vectors: list[np.ndarray] = []
    for adj in sorted(groups):
        if adj == exclude:
            continue
        vecs = groups[adj]
        if not vecs:
            continue
        if per_adjective_mean:
            vectors.append(mean_pool(vecs))
        else:
            vectors.extend(np.asarray(v, dtype=np.float64) for v in vecs)
    if not vectors:
        raise ValueError("pole would be empty")
    return mean_pool(vectors)


def loo_cosine(
    left: PoleEmbeddings,
    right: PoleEmbeddings,
    held_out: str,
    side: str,
    per_adjective_mean: bool = False,
) -> float:
    """Cosine of the held-out adjective against the remainder axis.

    The held-out adjective's embeddings are averaged to a single vector.
    Raises if removing it would empty its side.
    """
    if side not in _SIDES:
        raise ValueError(f"side must be left or right, got {side!r}")
    own = left if side == "left" else right
    if held_out not in own or not own[held_out]:
        raise ValueError(f"held-out adjective {held_out!r} has no embeddings on {side}")
    held_vec = mean_pool(own[held_out])
    if side == "left":
        axis_vec = _pole_mean(left, exclude=held_out, per_adjective_mean=per_adjective_mean) \
            - _pole_mean(right, per_adjective_mean=per_adjective_mean)
    else:
        axis_vec = _pole_mean(left, per_adjective_mean=per_adjective_mean) \
            - _pole_mean(right, exclude=held_out, per_adjective_mean=per_adjective_mean)
    return cosine(held_vec, axis_vec)


def pole_consistency(
    left: PoleEmbeddings,
    right: PoleEmbeddings,
    side: str,
    per_adjective_mean: bool = False,
) -> float:
    """Mean leave-one-out cosine for a pole, sign-adjusted.

    Right-pole scores are negated so a self-consistent pole is positive on
    either side.  When only one unique adjective contributed embeddings the
    leave-one-out test cannot run and the score is exactly 0.
    """
    own = left if side == "left" else right
    adjectives = sorted(adj for adj, vecs in own.items() if vecs)
    if not adjectives:
        raise ValueError(f"{side} pole has no embeddings")
    if len(adjectives) == 1:
        return 0.0
    scores = [
        loo_cosine(left, right, adj, side, per_adjective_mean=per_adjective_mean)
        for adj in adjectives
    ]
    mean = float(np.mean(scores))
    return -mean if side == "right" else mean


@dataclass(frozen=True)
class ConsistencyReport:
    axis_id: str
    method: str
    zscored: bool
    left_c: float
    right_c: float
    left_loo: dict[str, float] = field(default_factory=dict)
    right_loo: dict[str, float] = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.left_c >= 0.0 and self.right_c >= 0.0


def gather_pole_embeddings(axis: Axis, embeddings: EmbeddingSet,
                           stats: ZScoreStats | None = None) -> tuple[PoleEmbeddings, PoleEmbeddings]:
    """Group the vectors an axis was built from by adjective, per side.

    Vectors are z-scored when the axis is a z-scored variant, mirroring how
    the axis itself was built.
    """
    if axis.zscored and stats is None:
        raise ValueError("z-scored axis needs stats to regroup its embeddings")
    sides: list[PoleEmbeddings] = []
    for sources in (axis.left_sources, axis.right_sources):
        groups: PoleEmbeddings = {}
        for adj, ctx in sources:
            key = adj if ctx is None else context_key(adj, ctx)
            for vec in embeddings.get(key):
                vec = np.asarray(vec, dtype=np.float64)
                if axis.zscored:
                    vec = zscore(vec, stats)
                groups.setdefault(adj, []).append(vec)
        sides.append(groups)
    return sides[0], sides[1]


def axis_consistency(
    axis: Axis,
    embeddings: EmbeddingSet,
    stats: ZScoreStats | None = None,
    per_adjective_mean: bool = False,
) -> ConsistencyReport:
    left, right = gather_pole_embeddings(axis, embeddings, stats)
    loo: dict[str, dict[str, float]] = {"left": {}, "right": {}}
    for side, groups in (("left", left), ("right", right)):
        adjectives = sorted(adj for adj, vecs in groups.items() if vecs)
        if len(adjectives) < 2:
            continue
        for adj in adjectives:
            loo[side][adj] = loo_cosine(
                left, right, adj, side, per_adjective_mean=per_adjective_mean
            )
    return ConsistencyReport(
        axis_id=axis.axis_id,
        method=axis.method,
        zscored=axis.zscored,
        left_c=pole_consistency(left, right, "left", per_adjective_mean=per_adjective_mean),
        right_c=pole_consistency(left, right, "right", per_adjective_mean=per_adjective_mean),
        left_loo=loo["left"],
        right_loo=loo["right"],
    )


@dataclass(frozen=True)
class MethodSummary:
    method: str
    zscored: bool
    mean_c: float
    ci95: float
    consistent_axes: int
    n_axes: int
    # the interval is mean +/- 1.96 standard errors; recorded here because
    # other interval constructions would be defensible too
    ci_kind: str = "normal-approx"


def summarize_method(
    reports: list[ConsistencyReport],
    method: str | None = None,
    zscored: bool | None = None,
) -> MethodSummary:
    """Mean pole-level consistency with a 95% normal-approximation CI.

    Pass an explicit run label when the reports legitimately mix per-axis
    methods (a probability-selected run contains backed-off axes).
    """
    if not reports:
        raise ValueError("no reports to summarize")
    if method is None or zscored is None:
        methods = {(r.method, r.zscored) for r in reports}
        if len(methods) != 1:
            raise ValueError(
                f"reports mix methods: {sorted(methods)}; pass an explicit run label"
            )
        only_method, only_zscored = methods.pop()
        method = only_method if method is None else method
        zscored = only_zscored if zscored is None else zscored
    pole_scores = np.array([c for r in reports for c in (r.left_c, r.right_c)])
    mean_c = float(pole_scores.mean())
    if pole_scores.size > 1:
        sem = pole_scores.std(ddof=1) / np.sqrt(pole_scores.size)
    else:
        sem = 0.0
    return MethodSummary(
        method=method,
        zscored=zscored,
        mean_c=mean_c,
        ci95=float(1.96 * sem),
        consistent_axes=sum(1 for r in reports if r.consistent),
        n_axes=len(reports),
    )


def compare_methods(scores_a, scores_b) -> tuple[float, float]:
    """Mann-Whitney U for two sets of pole scores.

    Asymptotic normal approximation with tie correction and no continuity
    correction; returns (U, two-sided p).
    """
    res = mannwhitneyu(scores_a, scores_b, alternative="two-sided",
                       method="asymptotic", use_continuity=False)
    return float(res.statistic), float(res.pvalue)


def write_report_tsv(reports: list[ConsistencyReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("axis_id\tmethod\tzscored\tleft_C\tright_C\tconsistent\n")
        for r in sorted(reports, key=lambda r: r.axis_id):
            fh.write(
                f"{r.axis_id}\t{r.method}\t{int(r.zscored)}\t"
                f"{fmt_num(r.left_c)}\t{fmt_num(r.right_c)}\t{int(r.consistent)}\n"
            )


def write_summary_json(summary: MethodSummary, path) -> None:
    payload = {
        "method": summary.method,
        "zscored": summary.zscored,
        "mean_C": summary.mean_c,
        "ci95": summary.ci95,
        "ci_kind": summary.ci_kind,
        "consistent_axes": summary.consistent_axes,
        "n_axes": summary.n_axes,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True) + "\n")
