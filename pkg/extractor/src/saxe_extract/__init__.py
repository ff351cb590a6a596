"""Contextualized embedding and masked-probability extraction."""

from .extract import extract_embedding, run_embed_requests
from .model import Encoder
from .probs import mask_probabilities, run_prob_requests, screen_candidates
from .saxeio import read_requests, write_context_records, write_vectors

__version__ = "0.1.0"

__all__ = [
    "Encoder", "extract_embedding", "mask_probabilities", "read_requests",
    "run_embed_requests", "run_prob_requests", "screen_candidates",
    "write_context_records", "write_vectors",
]
