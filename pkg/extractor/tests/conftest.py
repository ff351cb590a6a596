"""A tiny local masked LM for contract tests.

Random weights, 4 transformer layers, hidden width 768 (so concatenated
vectors have the production width), and a handcrafted WordPiece vocab where
"playing"/"plays" split into two pieces.  Built once per session; no
network access is needed anywhere in this suite.
"""

from pathlib import Path

import pytest
import torch
from transformers import BertConfig, BertForMaskedLM, BertTokenizerFast

VOCAB = """
[PAD]
[UNK]
[CLS]
[SEP]
[MASK]
the
a
very
really
quite
and
was
is
food
meal
dinner
restaurant
service
dog
cat
man
woman
play
##ing
##s
good
bad
fine
nice
great
awful
terrible
horrible
delicious
inedible
tasted
looked
seemed
today
yesterday
here
there
still
almost
always
never
""".split()


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("tinybert")
    vocab_path = root / "vocab.txt"
    vocab_path.write_text("\n".join(VOCAB) + "\n")
    tokenizer = BertTokenizerFast.from_pretrained(str(root), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=768,
        num_hidden_layers=4,
        num_attention_heads=12,
        intermediate_size=512,
        max_position_embeddings=64,
    )
    torch.manual_seed(20_240_202)
    model = BertForMaskedLM(config)
    model.eval()
    model_dir = root / "model"
    model.save_pretrained(model_dir)
    tokenizer.save_pretrained(model_dir)
    return model_dir


@pytest.fixture(scope="session")
def encoder(tiny_model_dir):
    from saxe_extract.model import Encoder

    return Encoder(str(tiny_model_dir))
