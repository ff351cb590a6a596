"""Span embedding extraction.

Each request names a pre-tokenized sentence, a target span (word start and
length), and a storage key.  A word's vector is the mean over its subwords
of the concatenated last-four-layer hidden states; multi-word spans average
their word vectors.  Sentences whose subword length exceeds the model limit
are trimmed to a window of words centered on the span.
"""

from __future__ import annotations

import logging

import numpy as np

from .model import Encoder

logger = logging.getLogger(__name__)


def _truncate_around_span(encoder: Encoder, words, start, length):
    """Trim whole words around the span until the subword length fits."""
    lo, hi = 0, len(words)
    lengths = [len(encoder.tokenizer.tokenize(w)) or 1 for w in words]
    total = sum(lengths)
    while total > encoder.max_subwords and (lo < start or hi > start + length):
        left_slack = start - lo
        right_slack = hi - (start + length)
        if left_slack >= right_slack:
            total -= lengths[lo]
            lo += 1
        else:
            hi -= 1
            total -= lengths[hi]
    return list(words[lo:hi]), start - lo


def extract_embedding(encoder: Encoder, words: list[str], start: int, length: int) -> np.ndarray:
    """Vector for one span occurrence; raises if the span has no subwords."""
    if not 0 <= start < len(words) or length < 1 or start + length > len(words):
        raise ValueError(f"span ({start},{length}) outside sentence of {len(words)} words")
    words, start = _truncate_around_span(encoder, words, start, length)
    enc, word_ids = encoder.encode_words(words)
    states = encoder.hidden_concat(enc)
    word_vectors = []
    for w in range(start, start + length):
        positions = [i for i, wid in enumerate(word_ids) if wid == w]
        if not positions:
            raise ValueError(f"span word {words[w]!r} produced no subwords")
        word_vectors.append(states[positions].mean(dim=0))
    span = np.stack([v.numpy() for v in word_vectors]).mean(axis=0)
    return span.astype(np.float32)


def run_embed_requests(encoder: Encoder, requests: list[dict]) -> list[tuple[str, np.ndarray]]:
    """Process embed-mode requests into (key, vector) records.

    Request fields: key, tokens, span = [start, length].
    """
    out = []
    for i, req in enumerate(requests):
        key = str(req["key"])
        words = [str(w) for w in req["tokens"]]
        start, length = (int(x) for x in req["span"])
        try:
            vec = extract_embedding(encoder, words, start, length)
        except ValueError as exc:
            logger.warning("request %d (%s) skipped: %s", i, key, exc)
            continue
        out.append((key, vec))
    return out
