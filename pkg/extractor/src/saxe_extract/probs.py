"""Masked-token probabilities for synonym and antonym candidates.

The target word is replaced by a single mask token and the model's softmax
at that position is read off for every candidate that survives the
single-subword screen.  Records whose candidates are all dropped ship with
empty maps and a drop reason, so downstream selection can log them.
"""

from __future__ import annotations

import logging

import torch

from .model import Encoder

logger = logging.getLogger(__name__)


def screen_candidates(encoder: Encoder, words: list[str]) -> tuple[list[str], list[str]]:
    """Split candidates into (kept single-subword words, dropped words)."""
    kept, dropped = [], []
    for word in words:
        (kept if encoder.is_single_subword(word) else dropped).append(word)
    return kept, dropped


def mask_probabilities(
    encoder: Encoder,
    words: list[str],
    target_index: int,
    candidates: list[str],
) -> dict[str, float]:
    """Softmax probability of each candidate at the masked target position."""
    if not 0 <= target_index < len(words):
        raise ValueError(f"target index {target_index} outside sentence")
    masked = list(words)
    masked[target_index] = encoder.tokenizer.mask_token
    enc, word_ids = encoder.encode_words(masked)
    positions = [i for i, wid in enumerate(word_ids) if wid == target_index]
    if len(positions) != 1:
        raise ValueError(f"mask produced {len(positions)} positions, expected 1")
    logits = encoder.mask_logits(enc, positions[0])
    probs = torch.softmax(logits, dim=-1)
    return {w: float(probs[encoder.token_id(w)]) for w in candidates}


def run_prob_requests(encoder: Encoder, requests: list[dict]) -> list[dict]:
    """Process probability-mode requests into context records.

    Request fields: context_id, adjective, tokens, target_index,
    synonyms, antonyms.
    """
    out = []
    for i, req in enumerate(requests):
        words = [str(w) for w in req["tokens"]]
        target_index = int(req["target_index"])
        syn_kept, syn_dropped = screen_candidates(encoder, [str(w) for w in req["synonyms"]])
        ant_kept, ant_dropped = screen_candidates(encoder, [str(w) for w in req["antonyms"]])
        record = {
            "context_id": str(req["context_id"]),
            "adjective": str(req["adjective"]),
            "tokens": words,
            "target_index": target_index,
            "syn_probs": {},
            "ant_probs": {},
        }
        if syn_dropped or ant_dropped:
            record["dropped_candidates"] = sorted(syn_dropped + ant_dropped)
        if not syn_kept and not ant_kept:
            record["drop_reason"] = "no single-subword candidates"
            logger.warning("request %d (%s): all candidates dropped",
                           i, record["context_id"])
            out.append(record)
            continue
        try:
            kept_probs = mask_probabilities(encoder, words, target_index,
                                            syn_kept + ant_kept)
        except ValueError as exc:
            record["drop_reason"] = str(exc)
            logger.warning("request %d (%s) skipped: %s", i, record["context_id"], exc)
            out.append(record)
            continue
        record["syn_probs"] = {w: kept_probs[w] for w in syn_kept}
        record["ant_probs"] = {w: kept_probs[w] for w in ant_kept}
        out.append(record)
    return out
