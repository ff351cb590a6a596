"""Choose which contexts represent each pole adjective.

Two selection schemes: probability filtering keeps contexts where a masked
language model rated the adjective's synonyms above its antonyms; the
default scheme is a uniform random sample across a pole.  Context records
arrive as JSON lines produced by the extractor.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .lexicon import AxisSpec, single_wordpiece_pole
from .utils import derive_seed

logger = logging.getLogger(__name__)

MIN_TOKENS = 10   # exclusive lower bound
MAX_TOKENS = 150  # inclusive upper bound
POOL_CAP = 1000
DEFAULT_K = 100


@dataclass(frozen=True)
class ContextRecord:
    """One sentence containing a target adjective, with masked-slot probabilities."""

    context_id: str
    adjective: str
    tokens: tuple[str, ...]
    target_index: int
    syn_probs: dict[str, float] = field(default_factory=dict)
    ant_probs: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.target_index < len(self.tokens):
            raise ValueError(
                f"context {self.context_id}: target_index {self.target_index} "
                f"outside 0..{len(self.tokens) - 1}"
            )
        for name, probs in (("syn", self.syn_probs), ("ant", self.ant_probs)):
            for word, p in probs.items():
                if not 0.0 <= p <= 1.0:
                    raise ValueError(
                        f"context {self.context_id}: {name} probability for {word!r} "
                        f"out of [0,1]: {p}"
                    )


def length_ok(tokens) -> bool:
    """Length screen: strictly more than 10 tokens and at most 150."""
    return MIN_TOKENS < len(tokens) <= MAX_TOKENS


class ContextPool:
    """Per-adjective context lists, length-screened and capped."""

    def __init__(self, cap: int = POOL_CAP):
        self.cap = cap
        self._records: dict[str, list[ContextRecord]] = {}

    def add(self, record: ContextRecord) -> bool:
        """Add a record if it passes the length screen and fits under the cap."""
        if not length_ok(record.tokens):
            return False
        bucket = self._records.setdefault(record.adjective, [])
        if len(bucket) >= self.cap:
            return False
        bucket.append(record)
        return True

    def records_for(self, adjective: str) -> list[ContextRecord]:
        return self._records.get(adjective, [])

    def merged(self, adjectives) -> list[ContextRecord]:
        """Concatenate pools for several adjectives in lexicographic order."""
        out: list[ContextRecord] = []
        for adj in sorted(set(adjectives)):
            out.extend(self._records.get(adj, []))
        return out

    def adjectives(self):
        return self._records.keys()

    def __len__(self) -> int:
        return sum(len(v) for v in self._records.values())


def _prob_mean(probs: dict[str, float]) -> float:
    return sum(probs.values()) / len(probs)


def select_prob_contexts(records: list[ContextRecord], k: int = DEFAULT_K) -> list[ContextRecord]:
    """Filter-sort-truncate by masked-token probabilities.

    Drops records whose mean antonym probability exceeds the mean synonym
    probability (equality is kept), sorts the rest by descending mean
    synonym probability with ties broken by context id, and returns the
    first k.  Records with an empty probability map are excluded.
    """
    scored = []
    for rec in records:
        if not rec.syn_probs or not rec.ant_probs:
            logger.warning("context %s: empty probability map, excluded", rec.context_id)
            continue
        syn_mean = _prob_mean(rec.syn_probs)
        ant_mean = _prob_mean(rec.ant_probs)
        if ant_mean > syn_mean:
            continue
        scored.append((syn_mean, rec))
    scored.sort(key=lambda sr: (-sr[0], sr[1].context_id))
    return [rec for _, rec in scored[:k]]


def select_pole_prob_contexts(
    pool: ContextPool, adjectives, k: int = DEFAULT_K
) -> list[ContextRecord]:
    """Probability selection for a whole pole.

    Each adjective is filtered and sorted on its own, then the survivors
    compete for the pole's k slots by mean synonym probability.
    """
    survivors: list[ContextRecord] = []
    for adj in sorted(set(adjectives)):
        survivors.extend(select_prob_contexts(pool.records_for(adj), k=k))
    return select_prob_contexts(survivors, k=k)


def select_default_contexts(
    pole_pool: list[ContextRecord], k: int = DEFAULT_K, seed: int = 0
) -> list[ContextRecord]:
    """Uniform sample without replacement from a merged pole pool.

    Deterministic given (pool order, k, seed); returns records in pool
    order.  An empty pool cannot represent the pole and is an error.
    """
    if not pole_pool:
        raise ValueError("empty context pool: pole cannot be represented")
    n = len(pole_pool)
    if n <= k:
        return list(pole_pool)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=k, replace=False))
    return [pole_pool[i] for i in chosen]


@dataclass(frozen=True)
class PoleSelection:
    """Contexts chosen to represent one pole of one axis."""

    axis_id: str
    side: str  # "left" | "right"
    method: str  # method actually used after any backoff
    backoff: bool
    contexts: tuple[tuple[str, str], ...]  # (adjective, context_id)


def select_contexts_for_axes(
    specs: list[AxisSpec],
    pool: ContextPool,
    method: str,
    *,
    wp_vocab: set[str] | None = None,
    k: int = DEFAULT_K,
    seed: int = 0,
) -> list[PoleSelection]:
    """Run context selection for every axis under one method.

    method "prob" needs ``wp_vocab``; an axis where either pole has no
    single-wordpiece adjective falls back to the default sampler for both
    of its poles.  Axes with an empty pole pool are skipped with a warning.
    """
    if method not in ("prob", "default"):
        raise ValueError(f"unknown selection method {method!r}")
    if method == "prob" and wp_vocab is None:
        raise ValueError("probability selection requires a wordpiece vocabulary")
    selections = []
    for spec in specs:
        use_prob = method == "prob"
        backoff = False
        if use_prob:
            if not (
                single_wordpiece_pole(spec.left, wp_vocab)
                and single_wordpiece_pole(spec.right, wp_vocab)
            ):
                use_prob = False
                backoff = True
        sides = []
        try:
            for side, pole in (("left", spec.left), ("right", spec.right)):
                if use_prob:
                    chosen = select_pole_prob_contexts(pool, pole.adjectives, k=k)
                    if not chosen:
                        raise ValueError(f"no contexts survived filtering for {side} pole")
                else:
                    merged = pool.merged(pole.adjectives)
                    chosen = select_default_contexts(
                        merged, k=k, seed=derive_seed(seed, "contexts", spec.axis_id, side)
                    )
                sides.append(
                    PoleSelection(
                        axis_id=spec.axis_id,
                        side=side,
                        method="prob" if use_prob else "default",
                        backoff=backoff,
                        contexts=tuple((r.adjective, r.context_id) for r in chosen),
                    )
                )
        except ValueError as exc:
            logger.warning("axis %s: %s; axis skipped", spec.axis_id, exc)
            continue
        selections.extend(sides)
    return selections


def read_context_records(path, pool_cap: int = POOL_CAP) -> ContextPool:
    """Load a JSON-lines context file into a screened, capped pool."""
    pool = ContextPool(cap=pool_cap)
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            pool.add(
                ContextRecord(
                    context_id=str(row["context_id"]),
                    adjective=str(row["adjective"]),
                    tokens=tuple(row["tokens"]),
                    target_index=int(row["target_index"]),
                    syn_probs={str(w): float(p) for w, p in (row.get("syn_probs") or {}).items()},
                    ant_probs={str(w): float(p) for w, p in (row.get("ant_probs") or {}).items()},
                )
            )
    return pool


def write_selections(selections: list[PoleSelection], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sel in selections:
            fh.write(
                json.dumps(
                    {
                        "axis_id": sel.axis_id,
                        "side": sel.side,
                        "method": sel.method,
                        "backoff": sel.backoff,
                        "contexts": [list(c) for c in sel.contexts],
                    },
                    ensure_ascii=False,
                    separators=(",", ":"),
                )
                + "\n"
            )


def read_selections(path) -> list[PoleSelection]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            out.append(
                PoleSelection(
                    axis_id=row["axis_id"],
                    side=row["side"],
                    method=row["method"],
                    backoff=bool(row["backoff"]),
                    contexts=tuple((a, c) for a, c in row["contexts"]),
                )
            )
    return out
