"""Corpus ingestion: documents, the people vocabulary, sampling, rewriting.

Input corpora are JSON lines with {id, created_utc, platform, community,
author, text}.  Tokenization is deliberately simple (lowercase, split on
whitespace, strip edge punctuation); term matching operates on these
tokens for unigrams and space-joined bigrams.
"""

from __future__ import annotations

import json
import logging
import string
from collections import Counter
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .utils import derive_seed
from .wordlists import FEMININE_WORDS, MASCULINE_WORDS

logger = logging.getLogger(__name__)

MIN_VOCAB_COUNT = 500
MIN_PRONOUN_CLUSTERS = 10
BOT_NGRAM = 10
BOT_MAX_REPEATS = 100
RESERVOIR_K = 1000
STRATUM_CAP = 500
FEMININE_THRESHOLD = 0.75

_EDGE_PUNCT = string.punctuation.replace("_", "")


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens, edge punctuation stripped."""
    out = []
    for raw in text.lower().split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


@dataclass(frozen=True)
class Document:
    doc_id: str
    timestamp: int
    platform: str
    community: str
    author: str
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError(f"document {self.doc_id} has no tokens")

    @property
    def month(self) -> str:
        return datetime.fromtimestamp(self.timestamp, tz=timezone.utc).strftime("%Y-%m")

    @property
    def year(self) -> str:
        return self.month[:4]


def parse_documents(path) -> Iterator[Document]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            tokens = tuple(tokenize(str(row["text"])))
            if not tokens:
                logger.warning("%s:%d: document %s has no tokens, skipped",
                               path, lineno, row.get("id"))
                continue
            yield Document(
                doc_id=str(row["id"]),
                timestamp=int(row["created_utc"]),
                platform=str(row["platform"]),
                community=str(row["community"]),
                author=str(row["author"]),
                tokens=tokens,
            )


def dedup_documents(
    docs: Iterable[Document], platforms: frozenset[str] = frozenset({"forum"})
) -> list[Document]:
    """Drop exact token-sequence duplicates within the given platforms."""
    seen: set[tuple[str, ...]] = set()
    out = []
    for doc in docs:
        if doc.platform in platforms:
            key = doc.tokens
            if key in seen:
                logger.warning("dropping duplicate document %s", doc.doc_id)
                continue
            seen.add(key)
        out.append(doc)
    return out


def bot_filter(
    author_docs: Mapping[str, Sequence[Sequence[str]]],
    ngram: int = BOT_NGRAM,
    max_repeats: int = BOT_MAX_REPEATS,
) -> set[str]:
    """Authors who repeat any single n-gram more than ``max_repeats`` times."""
    flagged = set()
    for author, docs in author_docs.items():
        counts: Counter = Counter()
        for tokens in docs:
            for i in range(len(tokens) - ngram + 1):
                counts[tuple(tokens[i : i + ngram])] += 1
        if counts and counts.most_common(1)[0][1] > max_repeats:
            flagged.add(author)
    return flagged


def group_by_author(docs: Iterable[Document]) -> dict[str, list[tuple[str, ...]]]:
    grouped: dict[str, list[tuple[str, ...]]] = {}
    for doc in docs:
        grouped.setdefault(doc.author, []).append(doc.tokens)
    return grouped


def count_document_terms(docs: Iterable[Document]) -> Counter:
    """Unigram and bigram counts, each term counted once per document."""
    counts: Counter = Counter()
    for doc in docs:
        terms = set(doc.tokens)
        terms.update(
            f"{doc.tokens[i]} {doc.tokens[i + 1]}" for i in range(len(doc.tokens) - 1)
        )
        counts.update(terms)
    return counts


def vocab_filter(term_counts: Mapping[str, int], min_count: int = MIN_VOCAB_COUNT) -> dict[str, int]:
    """Keep terms occurring in at least ``min_count`` documents."""
    return {t: c for t, c in sorted(term_counts.items()) if c >= min_count}


@dataclass(frozen=True)
class GenderWordlist:
    feminine: frozenset[str] = FEMININE_WORDS
    masculine: frozenset[str] = MASCULINE_WORDS

    def classify(self, term: str) -> str | None:
        """"fem"/"masc" when the term contains gendered words of one kind only."""
        tokens = term.split()
        fem = any(t in self.feminine for t in tokens)
        masc = any(t in self.masculine for t in tokens)
        if fem and not masc:
            return "fem"
        if masc and not fem:
            return "masc"
        return None

    def contains(self, term: str) -> bool:
        return any(t in self.feminine or t in self.masculine for t in term.split())


class GenderLabeler:
    """Cascaded gender-leaning inference for vocabulary terms.

    Rules fire in order: (1) the semantically gendered wordlist, (2) the
    share of feminine pronoun clusters when enough clusters exist, (3) a
    plural inherits its singular form's label, (4) a bigram inherits its
    head unigram's label when the modifier is not itself gendered.
    """

    def __init__(
        self,
        pronoun_counts: Mapping[str, tuple[int, int]],
        wordlist: GenderWordlist | None = None,
        plural_map: Mapping[str, str] | None = None,
        min_clusters: int = MIN_PRONOUN_CLUSTERS,
        require_each: bool = False,
    ):
        self.pronoun_counts = dict(pronoun_counts)
        self.wordlist = wordlist or GenderWordlist()
        self.plural_map = dict(plural_map or {})
        self.min_clusters = min_clusters
        self.require_each = require_each

    def _wordlist_leaning(self, term: str) -> float | None:
        kind = self.wordlist.classify(term)
        if kind == "fem":
            return 1.0
        if kind == "masc":
            return 0.0
        return None

    def _pronoun_leaning(self, term: str) -> float | None:
        fem, masc = self.pronoun_counts.get(term, (0, 0))
        if self.require_each:
            enough = fem >= self.min_clusters and masc >= self.min_clusters
        else:
            enough = fem + masc >= self.min_clusters
        if not enough or fem + masc == 0:
            return None
        return fem / (fem + masc)

    def _base(self, term: str) -> float | None:
        leaning = self._wordlist_leaning(term)
        if leaning is None:
            leaning = self._pronoun_leaning(term)
        return leaning

    def label(self, term: str) -> tuple[float | None, str]:
        """Return (leaning in [0,1] or None, rule name that fired)."""
        leaning = self._wordlist_leaning(term)
        if leaning is not None:
            return leaning, "wordlist"
        leaning = self._pronoun_leaning(term)
        if leaning is not None:
            return leaning, "pronouns"
        singular = self.plural_map.get(term)
        if singular is not None:
            leaning = self._base(singular)
            if leaning is not None:
                return leaning, "plural_transfer"
        tokens = term.split()
        if len(tokens) == 2:
            modifier, head = tokens
            if not self.wordlist.contains(modifier):
                leaning = self._base(head)
                if leaning is None and head in self.plural_map:
                    leaning = self._base(self.plural_map[head])
                if leaning is not None:
                    return leaning, "bigram_transfer"
        return None, "none"


def gender_leaning(
    term: str,
    counts: Mapping[str, tuple[int, int]],
    wordlist: GenderWordlist | None = None,
    plural_map: Mapping[str, str] | None = None,
    min_clusters: int = MIN_PRONOUN_CLUSTERS,
) -> float | None:
    """Leaning for one term under the default labeling cascade."""
    labeler = GenderLabeler(counts, wordlist=wordlist, plural_map=plural_map,
                            min_clusters=min_clusters)
    leaning, _ = labeler.label(term)
    return leaning


@dataclass(frozen=True)
class VocabTerm:
    surface: str
    total_count: int
    fem_pronoun_clusters: int = 0
    masc_pronoun_clusters: int = 0
    semantically_gendered: str | None = None  # "fem" | "masc"
    gender_leaning: float | None = None
    leaning_source: str = "none"


def build_vocabulary(
    term_counts: Mapping[str, int],
    labeler: GenderLabeler,
    min_count: int = MIN_VOCAB_COUNT,
) -> list[VocabTerm]:
    kept = vocab_filter(term_counts, min_count=min_count)
    out = []
    for surface, count in kept.items():
        fem, masc = labeler.pronoun_counts.get(surface, (0, 0))
        leaning, source = labeler.label(surface)
        out.append(
            VocabTerm(
                surface=surface,
                total_count=count,
                fem_pronoun_clusters=fem,
                masc_pronoun_clusters=masc,
                semantically_gendered=labeler.wordlist.classify(surface),
                gender_leaning=leaning,
                leaning_source=source,
            )
        )
    return out


@dataclass(frozen=True)
class Occurrence:
    doc_id: str
    month: str
    platform: str
    community: str
    tokens: tuple[str, ...]
    span_start: int
    span_len: int
    replaced: bool = False

    def __post_init__(self):
        if not (0 <= self.span_start and self.span_start + self.span_len <= len(self.tokens)
                and self.span_len >= 1):
            raise ValueError(f"occurrence in {self.doc_id}: span outside sentence bounds")

    @property
    def surface(self) -> str:
        return " ".join(self.tokens[self.span_start : self.span_start + self.span_len])

    @property
    def year(self) -> str:
        return self.month[:4]


def extract_occurrences(doc: Document, vocab: set[str]) -> list[Occurrence]:
    """Non-overlapping left-to-right matches of vocab terms, bigrams first."""
    out = []
    i = 0
    n = len(doc.tokens)
    while i < n:
        if i + 1 < n and f"{doc.tokens[i]} {doc.tokens[i + 1]}" in vocab:
            span = 2
        elif doc.tokens[i] in vocab:
            span = 1
        else:
            i += 1
            continue
        out.append(
            Occurrence(
                doc_id=doc.doc_id,
                month=doc.month,
                platform=doc.platform,
                community=doc.community,
                tokens=doc.tokens,
                span_start=i,
                span_len=span,
            )
        )
        i += span
    return out


def reservoir_sample(stream: Iterable, k: int = RESERVOIR_K, seed: int = 0) -> list:
    """Single-pass uniform sample of min(k, len(stream)) items."""
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    rng = np.random.default_rng(seed)
    reservoir: list = []
    for i, item in enumerate(stream):
        if i < k:
            reservoir.append(item)
        else:
            j = int(rng.integers(0, i + 1))
            if j < k:
                reservoir[j] = item
    return reservoir


def stratified_sample(
    occurrences: Iterable[Occurrence],
    cap: int = STRATUM_CAP,
    seed: int = 0,
) -> list[Occurrence]:
    """Independent uniform cap per (platform, community, year) stratum.

    Community stands in for the ideological grouping of its platform.
    Each stratum runs its own reservoir under a seed derived from the
    stratum key, so strata never interact.
    """
    streams: dict[tuple[str, str, str], list[Occurrence]] = {}
    for occ in occurrences:
        streams.setdefault((occ.platform, occ.community, occ.year), []).append(occ)
    out = []
    for key in sorted(streams):
        out.extend(
            reservoir_sample(streams[key], k=cap, seed=derive_seed(seed, "stratum", *key))
        )
    return out


def replace_target(occ: Occurrence, number_lexicon: Mapping[str, str]) -> Occurrence:
    """Rewrite the target span as "person" or "people" by grammatical number.

    Number comes from the lexicon (full surface first, then the head
    token); unknown terms fall back to the trailing-s heuristic.  Bigram
    spans collapse to the single replacement token.
    """
    surface = occ.surface
    head = occ.tokens[occ.span_start + occ.span_len - 1]
    number = number_lexicon.get(surface) or number_lexicon.get(head)
    if number is None:
        number = "plural" if head.endswith("s") else "singular"
    if number not in ("singular", "plural"):
        raise ValueError(f"number lexicon entry for {surface!r} must be singular/plural")
    replacement = "people" if number == "plural" else "person"
    tokens = (
        occ.tokens[: occ.span_start]
        + (replacement,)
        + occ.tokens[occ.span_start + occ.span_len :]
    )
    return replace(occ, tokens=tokens, span_len=1, replaced=True)


def write_vocab_tsv(terms: list[VocabTerm], path) -> None:
    from .utils import fmt_num

    with open(path, "w", encoding="utf-8") as fh:
        fh.write("surface\tcount\tleaning\tsource\n")
        for t in sorted(terms, key=lambda t: t.surface):
            leaning = "" if t.gender_leaning is None else fmt_num(t.gender_leaning)
            fh.write(f"{t.surface}\t{t.total_count}\t{leaning}\t{t.leaning_source}\n")


def read_pronoun_counts(path) -> dict[str, tuple[int, int]]:
    """TSV of (term, feminine clusters, masculine clusters)."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("term\t"):
                continue
            term, fem, masc = line.split("\t")
            out[term] = (int(fem), int(masc))
    return out


def read_two_column_tsv(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            key, value = line.split("\t")
            out[key] = value
    return out
