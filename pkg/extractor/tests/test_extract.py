"""Span extraction against direct model access as the oracle."""

import numpy as np
import pytest
import torch

from saxe_extract.extract import extract_embedding, run_embed_requests

SENT = "the food was good and the service was really quite fine today".split()


def _direct_states(encoder, words):
    """Oracle path: call the model directly and concatenate the last 4 layers."""
    enc = encoder.tokenizer(words, is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        out = encoder.model(**enc)
    states = torch.cat(out.hidden_states[-4:], dim=-1)[0]
    return states, enc.word_ids(0)


class TestExtractEmbedding:
    def test_dim_is_four_times_hidden(self, encoder):
        vec = extract_embedding(encoder, SENT, 3, 1)
        assert vec.shape == (4 * encoder.hidden_size,)
        assert vec.dtype == np.float32

    def test_single_subword_equals_that_subwords_states(self, encoder):
        vec = extract_embedding(encoder, SENT, 3, 1)  # "good": one wordpiece
        states, word_ids = _direct_states(encoder, SENT)
        positions = [i for i, w in enumerate(word_ids) if w == 3]
        assert len(positions) == 1
        oracle = states[positions[0]].numpy()
        assert np.allclose(vec, oracle, atol=1e-5)

    def test_multi_subword_pooling_matches_external_average(self, encoder):
        words = "the man was playing there today and always".split()
        assert encoder.tokenizer.tokenize("playing") == ["play", "##ing"]
        vec = extract_embedding(encoder, words, 3, 1)
        states, word_ids = _direct_states(encoder, words)
        positions = [i for i, w in enumerate(word_ids) if w == 3]
        assert len(positions) == 2
        oracle = states[positions].mean(dim=0).numpy()
        assert np.allclose(vec, oracle, atol=1e-5)

    def test_bigram_span_averages_word_vectors(self, encoder):
        words = "the good dog was here yesterday and still is".split()
        vec = extract_embedding(encoder, words, 1, 2)  # "good dog"
        one = extract_embedding(encoder, words, 1, 1)
        two = extract_embedding(encoder, words, 2, 1)
        assert np.allclose(vec, (one + two) / 2.0, atol=1e-5)

    def test_long_sentence_truncated_around_span(self, encoder):
        words = ["the"] * 80 + ["good"] + ["dog"] * 80
        vec = extract_embedding(encoder, words, 80, 1)
        assert vec.shape == (encoder.dim,)
        assert np.all(np.isfinite(vec))

    def test_invalid_span_rejected(self, encoder):
        with pytest.raises(ValueError, match="span"):
            extract_embedding(encoder, SENT, 11, 2)


class TestRunRequests:
    def test_records_and_skips(self, encoder, caplog):
        requests = [
            {"key": "good|c1", "tokens": SENT, "span": [3, 1]},
            {"key": "broken", "tokens": SENT, "span": [40, 1]},
        ]
        with caplog.at_level("WARNING"):
            records = run_embed_requests(encoder, requests)
        assert [k for k, _ in records] == ["good|c1"]
        assert any("broken" in r.message for r in caplog.records)

    def test_deterministic_across_reruns(self, encoder):
        requests = [{"key": f"good|c{i}", "tokens": SENT, "span": [3, 1]}
                    for i in range(3)]
        first = run_embed_requests(encoder, requests)
        second = run_embed_requests(encoder, requests)
        for (ka, va), (kb, vb) in zip(first, second):
            assert ka == kb
            assert np.array_equal(va, vb)
