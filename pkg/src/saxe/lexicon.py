"""Compile antonym-pole axis specifications from a lexical database export.

The database is JSON lines, one synset per line:

    {"id": ..., "pos": "a", "lemmas": [...], "similar_to": [...], "antonym_of": ...}

Axes pair antonym-linked synsets; each pole is the seed synset's lemmas
plus the lemmas of synsets one similar-to hop away, filtered down to a
target vocabulary.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

logger = logging.getLogger(__name__)

DEFAULT_MIN_POLE = 3

# y counts as a vowel here so short real adjectives ("dry", "shy") survive
# the no-vowel screen meant for initialisms.
_VOWELS = set("aeiouy")


@dataclass(frozen=True)
class Synset:
    id: str
    lemmas: tuple[str, ...]
    similar_to: tuple[str, ...] = ()
    antonym_of: str | None = None
    pos: str = "a"

    def __post_init__(self):
        if not self.lemmas:
            raise ValueError(f"synset {self.id} has no lemmas")


@dataclass(frozen=True)
class Pole:
    """One side of an axis: a seed synset plus its expanded adjective set."""

    seed_synset: str
    adjectives: tuple[str, ...]

    def __post_init__(self):
        if not self.adjectives:
            raise ValueError(f"pole {self.seed_synset} has no adjectives")
        if len(set(self.adjectives)) != len(self.adjectives):
            raise ValueError(f"pole {self.seed_synset} has duplicate adjectives")
        if any(a != a.lower() for a in self.adjectives):
            raise ValueError(f"pole {self.seed_synset} adjectives must be lowercase")


@dataclass(frozen=True)
class AxisSpec:
    axis_id: str
    left: Pole
    right: Pole

    def __post_init__(self):
        if set(self.left.adjectives) & set(self.right.adjectives):
            raise ValueError(f"axis {self.axis_id} poles overlap")


class SynsetDb:
    """Parsed synset collection with a precomputed acronym index."""

    def __init__(self, synsets: list[Synset]):
        self.synsets: dict[str, Synset] = {}
        for syn in synsets:
            if syn.id in self.synsets:
                raise ValueError(f"duplicate synset id {syn.id}")
            self.synsets[syn.id] = syn
        self.acronyms = frozenset(
            lemma.lower()
            for syn in synsets
            for lemma in syn.lemmas
            if is_acronym(lemma)
        )

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.synsets

    def __getitem__(self, synset_id: str) -> Synset:
        return self.synsets[synset_id]

    def __len__(self) -> int:
        return len(self.synsets)


def is_acronym(lemma: str) -> bool:
    """Initialism screen: fully-uppercase source form, or short with no vowel."""
    alpha = lemma.replace("_", "").replace("-", "")
    if alpha and alpha.isalpha() and alpha.isupper():
        return True
    return len(lemma) <= 3 and not (_VOWELS & set(lemma.lower()))


def parse_synsets(path) -> SynsetDb:
    synsets = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            synsets.append(
                Synset(
                    id=str(row["id"]),
                    lemmas=tuple(str(x) for x in row["lemmas"]),
                    similar_to=tuple(str(x) for x in row.get("similar_to") or ()),
                    antonym_of=row.get("antonym_of") or None,
                    pos=str(row.get("pos", "a")),
                )
            )
    return SynsetDb(synsets)


def load_vocab(path) -> set[str]:
    """Read a vocabulary file: first whitespace token of each non-empty line."""
    vocab = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if parts:
                vocab.add(parts[0])
    return vocab


def expand_pole(seed: Synset, db: SynsetDb) -> Pole:
    """Expand a seed synset into a pole: its lemmas plus one similar-to hop.

    Output order is lexicographic so it never depends on database iteration
    order.  Dangling similar-to ids are skipped with a warning.
    """
    if seed.id not in db:
        raise KeyError(f"seed synset {seed.id} not in database")
    words = {lemma.lower() for lemma in seed.lemmas}
    for sid in seed.similar_to:
        if sid not in db:
            logger.warning("synset %s: dangling similar_to id %s, skipped", seed.id, sid)
            continue
        words.update(lemma.lower() for lemma in db[sid].lemmas)
    return Pole(seed_synset=seed.id, adjectives=tuple(sorted(words)))


def _antonym_pairs(db: SynsetDb) -> list[tuple[str, str]]:
    pairs = set()
    for syn in db.synsets.values():
        if not syn.antonym_of:
            continue
        if syn.antonym_of not in db:
            logger.warning("synset %s: dangling antonym_of id %s, skipped", syn.id, syn.antonym_of)
            continue
        a, b = sorted((syn.id, syn.antonym_of))
        pairs.add((a, b))
    return sorted(pairs)


def build_axes(db: SynsetDb, vocab: set[str], min_pole: int = DEFAULT_MIN_POLE) -> list[AxisSpec]:
    """One axis per antonym-linked synset pair that survives filtering.

    Per pole: expand, drop acronym lemmas, intersect with the vocabulary,
    then strip adjectives shared by both poles.  The axis is kept only if
    both poles still have at least ``min_pole`` adjectives.  Output is
    sorted by axis id and fully deterministic.
    """
    if not vocab:
        raise ValueError("vocabulary is empty")
    axes = []
    for left_id, right_id in _antonym_pairs(db):
        left_raw = expand_pole(db[left_id], db)
        right_raw = expand_pole(db[right_id], db)
        left_words = [a for a in left_raw.adjectives if a not in db.acronyms and a in vocab]
        right_words = [a for a in right_raw.adjectives if a not in db.acronyms and a in vocab]
        shared = set(left_words) & set(right_words)
        if shared:
            logger.warning(
                "axis %s__%s: removing %d shared adjectives from both poles",
                left_id, right_id, len(shared),
            )
            left_words = [a for a in left_words if a not in shared]
            right_words = [a for a in right_words if a not in shared]
        if len(left_words) < min_pole or len(right_words) < min_pole:
            continue
        axes.append(
            AxisSpec(
                axis_id=f"{left_id}__{right_id}",
                left=Pole(seed_synset=left_id, adjectives=tuple(left_words)),
                right=Pole(seed_synset=right_id, adjectives=tuple(right_words)),
            )
        )
    axes.sort(key=lambda ax: ax.axis_id)
    return axes


def single_wordpiece_pole(pole: Pole, wp_vocab: set[str]) -> bool:
    """True iff at least one pole adjective is a single tokenizer wordpiece."""
    return any(adj in wp_vocab for adj in pole.adjectives)


def write_axes(specs: list[AxisSpec], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for spec in specs:
            fh.write(spec_to_json(spec) + "\n")


def spec_to_json(spec: AxisSpec) -> str:
    return json.dumps(
        {
            "axis_id": spec.axis_id,
            "left": {"seed": spec.left.seed_synset, "adjectives": list(spec.left.adjectives)},
            "right": {"seed": spec.right.seed_synset, "adjectives": list(spec.right.adjectives)},
        },
        ensure_ascii=False,
        separators=(",", ":"),
    )


def read_axes(path) -> list[AxisSpec]:
    specs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            specs.append(
                AxisSpec(
                    axis_id=row["axis_id"],
                    left=Pole(row["left"]["seed"], tuple(row["left"]["adjectives"])),
                    right=Pole(row["right"]["seed"], tuple(row["right"]["adjectives"])),
                )
            )
    return specs
