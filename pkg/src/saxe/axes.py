"""Realize axis specifications as direction vectors.

An axis vector is the mean of the left pole's embeddings minus the mean of
the right pole's.  Pole embeddings come from one of three sources: a single
type vector per adjective, a random sample of contextualized vectors, or a
probability-filtered sample.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .contexts import PoleSelection
from .lexicon import AxisSpec, Pole
from .store import EmbeddingSet, ZScoreStats, context_key, mean_pool, zscore

logger = logging.getLogger(__name__)

METHODS = ("glove", "bert-default", "bert-prob")

Source = tuple[str, str | None]  # (adjective, context_id or None for type vectors)


@dataclass(frozen=True)
class Axis:
    spec: AxisSpec
    vector: np.ndarray
    method: str
    zscored: bool
    left_sources: tuple[Source, ...]
    right_sources: tuple[Source, ...]
    backoff: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.left_sources or not self.right_sources:
            raise ValueError(f"axis {self.spec.axis_id}: sources empty on one side")

    @property
    def axis_id(self) -> str:
        return self.spec.axis_id

    @property
    def storage_key(self) -> str:
        return axis_storage_key(self.axis_id, self.method, self.zscored)


def axis_storage_key(axis_id: str, method: str, zscored: bool) -> str:
    return f"axis:{axis_id}:{method}:{'z' if zscored else 'raw'}"


def build_axis(
    left: list[np.ndarray],
    right: list[np.ndarray],
    *,
    spec: AxisSpec,
    method: str,
    zscored: bool,
    left_sources: tuple[Source, ...],
    right_sources: tuple[Source, ...],
    backoff: bool = False,
) -> Axis:
    """Mean of left embeddings minus mean of right embeddings."""
    if not left:
        raise ValueError(f"axis {spec.axis_id}: left pole has no embeddings")
    if not right:
        raise ValueError(f"axis {spec.axis_id}: right pole has no embeddings")
    vector = mean_pool(left) - mean_pool(right)
    return Axis(
        spec=spec,
        vector=vector,
        method=method,
        zscored=zscored,
        left_sources=left_sources,
        right_sources=right_sources,
        backoff=backoff,
    )


def _glove_side(pole: Pole, embeddings: EmbeddingSet, stats, zscored):
    vectors, sources = [], []
    for adj in pole.adjectives:
        vecs = embeddings.get(adj)
        if not vecs:
            continue
        vec = mean_pool(vecs)
        if zscored:
            vec = zscore(vec, stats)
        vectors.append(vec)
        sources.append((adj, None))
    return vectors, tuple(sources)


def _context_side(
    selection: PoleSelection,
    embeddings: EmbeddingSet,
    stats,
    zscored,
    per_adjective_mean,
):
    by_adj: dict[str, list[np.ndarray]] = {}
    sources = []
    for adj, ctx in selection.contexts:
        key = context_key(adj, ctx)
        vecs = embeddings.get(key)
        if not vecs:
            logger.warning("axis %s: no embedding for %s, skipped", selection.axis_id, key)
            continue
        for vec in vecs:
            vec = np.asarray(vec, dtype=np.float64)
            if zscored:
                vec = zscore(vec, stats)
            by_adj.setdefault(adj, []).append(vec)
        sources.append((adj, ctx))
    if per_adjective_mean:
        vectors = [mean_pool(vs) for _, vs in sorted(by_adj.items())]
    else:
        vectors = [v for _, vs in sorted(by_adj.items()) for v in vs]
    return vectors, tuple(sources)


def realize_all(
    specs: list[AxisSpec],
    embeddings: EmbeddingSet,
    method: str,
    *,
    zscored: bool = False,
    stats: ZScoreStats | None = None,
    selections: list[PoleSelection] | None = None,
    per_adjective_mean: bool = False,
) -> list[Axis]:
    """Build every axis the chosen method can support.

    glove reads one type vector per adjective straight from the embedding
    set.  The contextual methods consume pole selections produced by
    context selection; a selection whose method fell back to the default
    sampler yields an axis recorded as bert-default with its backoff flag
    set.  Axes missing embeddings on a side are skipped and logged.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    if zscored and stats is None:
        raise ValueError("z-scored axes require stats")
    axes = []
    if method == "glove":
        for spec in specs:
            try:
                left, left_src = _glove_side(spec.left, embeddings, stats, zscored)
                right, right_src = _glove_side(spec.right, embeddings, stats, zscored)
                axes.append(
                    build_axis(
                        left, right, spec=spec, method="glove", zscored=zscored,
                        left_sources=left_src, right_sources=right_src,
                    )
                )
            except ValueError as exc:
                logger.warning("axis skipped: %s", exc)
        return axes

    if selections is None:
        raise ValueError(f"{method} requires pole selections")
    by_axis: dict[str, dict[str, PoleSelection]] = {}
    for sel in selections:
        by_axis.setdefault(sel.axis_id, {})[sel.side] = sel
    for spec in specs:
        sides = by_axis.get(spec.axis_id)
        if not sides or "left" not in sides or "right" not in sides:
            logger.warning("axis %s: no selection, skipped", spec.axis_id)
            continue
        used_prob = sides["left"].method == "prob"
        axis_method = "bert-prob" if used_prob else "bert-default"
        if method == "bert-default" and used_prob:
            raise ValueError(f"axis {spec.axis_id}: selection method prob under bert-default run")
        backoff = sides["left"].backoff or sides["right"].backoff
        try:
            left, left_src = _context_side(
                sides["left"], embeddings, stats, zscored, per_adjective_mean
            )
            right, right_src = _context_side(
                sides["right"], embeddings, stats, zscored, per_adjective_mean
            )
            axes.append(
                build_axis(
                    left, right, spec=spec, method=axis_method, zscored=zscored,
                    left_sources=left_src, right_sources=right_src, backoff=backoff,
                )
            )
        except ValueError as exc:
            logger.warning("axis skipped: %s", exc)
    return axes


def write_axes_bundle(axes: list[Axis], vectors_path, manifest_path) -> None:
    """Persist axes as a SAXE vector file plus a JSON-lines manifest."""
    if not axes:
        raise ValueError("no axes to write")
    dims = {ax.vector.size for ax in axes}
    if len(dims) != 1:
        raise ValueError(f"axes have mixed dims: {sorted(dims)}")
    eset = EmbeddingSet(dims.pop())
    for ax in sorted(axes, key=lambda a: a.storage_key):
        eset.add(ax.storage_key, ax.vector)
    eset.write(vectors_path)
    with open(manifest_path, "w", encoding="utf-8") as fh:
        for ax in sorted(axes, key=lambda a: a.storage_key):
            fh.write(
                json.dumps(
                    {
                        "axis_id": ax.axis_id,
                        "method": ax.method,
                        "zscored": ax.zscored,
                        "backoff": ax.backoff,
                        "left": {
                            "seed": ax.spec.left.seed_synset,
                            "adjectives": list(ax.spec.left.adjectives),
                        },
                        "right": {
                            "seed": ax.spec.right.seed_synset,
                            "adjectives": list(ax.spec.right.adjectives),
                        },
                        "left_sources": [list(s) for s in ax.left_sources],
                        "right_sources": [list(s) for s in ax.right_sources],
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
                + "\n"
            )


def load_axes_bundle(vectors_path, manifest_path) -> list[Axis]:
    eset = EmbeddingSet.load(vectors_path)
    axes = []
    with open(manifest_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            spec = AxisSpec(
                axis_id=row["axis_id"],
                left=Pole(row["left"]["seed"], tuple(row["left"]["adjectives"])),
                right=Pole(row["right"]["seed"], tuple(row["right"]["adjectives"])),
            )
            key = axis_storage_key(row["axis_id"], row["method"], row["zscored"])
            vecs = eset.get(key)
            if len(vecs) != 1:
                raise ValueError(f"expected exactly one vector for {key}, got {len(vecs)}")
            axes.append(
                Axis(
                    spec=spec,
                    vector=np.asarray(vecs[0], dtype=np.float64),
                    method=row["method"],
                    zscored=bool(row["zscored"]),
                    left_sources=tuple((a, c) for a, c in row["left_sources"]),
                    right_sources=tuple((a, c) for a, c in row["right_sources"]),
                    backoff=bool(row["backoff"]),
                )
            )
    return axes
