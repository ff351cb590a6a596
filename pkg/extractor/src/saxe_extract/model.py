"""Model wrapper: tokenization alignment and hidden-state access."""

from __future__ import annotations

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

LAYERS_POOLED = 4


class Encoder:
    """A masked language model plus its tokenizer, in inference mode.

    Word representations concatenate the hidden states of the final four
    transformer layers, giving vectors of 4 x hidden width.
    """

    def __init__(self, model_name_or_path: str, device: str = "cpu"):
        self.tokenizer = AutoTokenizer.from_pretrained(model_name_or_path)
        self.model = AutoModelForMaskedLM.from_pretrained(
            model_name_or_path, output_hidden_states=True
        )
        self.model.eval()
        self.device = torch.device(device)
        self.model.to(self.device)
        self.hidden_size = self.model.config.hidden_size
        self.dim = LAYERS_POOLED * self.hidden_size
        if self.model.config.num_hidden_layers < LAYERS_POOLED:
            raise ValueError(
                f"model has {self.model.config.num_hidden_layers} layers; "
                f"need at least {LAYERS_POOLED}"
            )
        limit = getattr(self.model.config, "max_position_embeddings", 512)
        self.max_subwords = limit - self.tokenizer.num_special_tokens_to_add()

    def is_single_subword(self, word: str) -> bool:
        pieces = self.tokenizer.tokenize(word)
        return len(pieces) == 1 and pieces[0] != self.tokenizer.unk_token

    def token_id(self, word: str) -> int:
        return self.tokenizer.convert_tokens_to_ids(self.tokenizer.tokenize(word)[0])

    def encode_words(self, words: list[str]):
        """Tokenize a pre-split sentence; returns (encoding, word_ids)."""
        enc = self.tokenizer(
            words,
            is_split_into_words=True,
            return_tensors="pt",
            truncation=False,
        )
        return enc, enc.word_ids(0)

    @torch.no_grad()
    def hidden_concat(self, enc) -> torch.Tensor:
        """(seq_len, 4*hidden) concatenation of the last four layers."""
        enc = {k: v.to(self.device) for k, v in enc.items()}
        out = self.model(**enc)
        last4 = out.hidden_states[-LAYERS_POOLED:]
        return torch.cat(last4, dim=-1)[0].cpu()

    @torch.no_grad()
    def mask_logits(self, enc, position: int) -> torch.Tensor:
        enc = {k: v.to(self.device) for k, v in enc.items()}
        out = self.model(**enc)
        return out.logits[0, position].cpu()
