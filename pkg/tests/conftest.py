"""Shared fixtures: a fully populated toy workspace for pipeline runs.

Everything is generated from fixed seeds so two builds of the workspace are
byte-identical.  The z-scoring sample is the context-embedding file itself,
i.e. every stored occurrence (not one vector per word).
"""

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from saxe.lexicon import build_axes, load_vocab, parse_synsets
from saxe.store import EmbeddingSet, context_key

FIXTURES = Path(__file__).parent / "fixtures"

DIM = 16
MONTHS = [f"{y}-{m:02d}" for y in (2010, 2011, 2012) for m in range(1, 13)]

FEM_TERMS = ("wife", "women", "girlfriend", "girls", "accuser", "accusers")
OTHER_TERMS = ("boyfriend", "men")
CATEGORIES = {
    "wife": "spouse", "girlfriend": "spouse", "boyfriend": "spouse",
    "women": "general", "men": "general", "girls": "general",
    "accuser": "legal", "accusers": "legal",
}
# which cluster-ish wave each term's frequency peaks in
TERM_WAVE = {"wife": 0, "women": 0, "girlfriend": 1, "girls": 1,
             "accuser": 2, "accusers": 2}


def _axis_directions(specs, rng):
    out = {}
    for spec in specs:
        u = rng.normal(size=DIM)
        out[spec.axis_id] = u / np.linalg.norm(u)
    return out


def _write_contexts_and_embeddings(ws, specs, rng):
    directions = _axis_directions(specs, rng)
    eset = EmbeddingSet(DIM)
    lines = []
    for spec in specs:
        u = directions[spec.axis_id]
        for sign, pole in ((1.0, spec.left), (-1.0, spec.right)):
            for adj in pole.adjectives:
                for i in range(8):
                    cid = f"c{i:03d}"
                    vec = sign * u + 0.35 * rng.normal(size=DIM)
                    eset.add(context_key(adj, cid), vec)
                    tokens = [f"tok{j}" for j in range(12)]
                    tokens[3] = adj
                    syn = float(rng.uniform(0.2, 0.7))
                    ant = float(max(0.0, syn + rng.uniform(-0.4, 0.25)))
                    lines.append(json.dumps({
                        "context_id": cid, "adjective": adj, "tokens": tokens,
                        "target_index": 3,
                        "syn_probs": {"s1": syn, "s2": round(syn * 0.8, 6)},
                        "ant_probs": {"a1": min(ant, 1.0)},
                    }, sort_keys=True))
    (ws / "fixtures" / "contexts.jsonl").write_text("\n".join(lines) + "\n")
    eset.write(ws / "fixtures" / "context_embeddings.saxe")
    return directions


def _write_targets(ws, directions, rng, terms):
    eset = EmbeddingSet(DIM)
    axis_ids = sorted(directions)
    for term in sorted(terms):
        idx = sum(map(ord, term)) % 3  # stable pseudo-assignment per term
        head = term.split()[-1]
        base = directions[axis_ids[TERM_WAVE.get(head, idx) % len(axis_ids)]]
        vec = (0.8 if idx != 1 else -0.8) * base + 0.4 * rng.normal(size=DIM)
        eset.add(term, vec)
    eset.write(ws / "fixtures" / "targets.saxe")


def _feminine_vocab_terms(doc_rows, pronoun_counts, plural_map):
    """Replicate the vocab stage to learn which terms it will call feminine."""
    from saxe.ingest import (
        Document, GenderLabeler, bot_filter, count_document_terms,
        dedup_documents, group_by_author, tokenize, vocab_filter,
    )

    docs = [
        Document(doc_id=r["id"], timestamp=r["created_utc"], platform=r["platform"],
                 community=r["community"], author=r["author"],
                 tokens=tuple(tokenize(r["text"])))
        for r in doc_rows
    ]
    docs = dedup_documents(docs)
    flagged = bot_filter(group_by_author(docs))
    docs = [d for d in docs if d.author not in flagged]
    kept = vocab_filter(count_document_terms(docs), min_count=2)
    labeler = GenderLabeler(pronoun_counts, plural_map=plural_map)
    out = set()
    for term in kept:
        leaning, _ = labeler.label(term)
        if leaning is not None and leaning > 0.75:
            out.add(term)
    return out


def _write_occurrence_embeddings(ws, directions, rng):
    eset = EmbeddingSet(DIM)
    u = directions[sorted(directions)[0]]
    for group, drift in (("extreme", 1.0), ("general", -0.3)):
        for mi, month in enumerate(MONTHS):
            level = drift * (mi / len(MONTHS))
            for i in range(3):
                vec = level * u + 0.3 * rng.normal(size=DIM)
                eset.add(f"{group}|{month}|{i:03d}", vec)
    eset.write(ws / "fixtures" / "occ_embeddings.saxe")


def _corpus_docs(rng):
    docs = []
    doc_id = 0
    for mi, month in enumerate(MONTHS):
        year, mon = (int(p) for p in month.split("-"))
        ts = int((year - 1970) * 365.25 * 86400 + (mon - 1) * 30.4 * 86400) + 3600
        for d in range(6):
            wave = d % 3
            term = [t for t, w in TERM_WAVE.items() if w == wave][mi % 2]
            peak = 6 + wave * 12
            # term appears more often near its wave's peak month
            strength = np.exp(-0.5 * ((mi - peak) / 4.0) ** 2)
            mention = term if rng.uniform() < 0.25 + 0.7 * strength else "people"
            filler = " ".join(f"w{int(rng.integers(0, 40))}" for _ in range(9))
            text = f"the {mention} said {filler}"
            platform = "forum" if d == 5 else "reddit"
            community = "mg" if d % 2 == 0 else "ic"
            docs.append({
                "id": f"d{doc_id:05d}", "created_utc": ts + d * 3600,
                "platform": platform, "community": community,
                "author": f"u{d}", "text": text,
            })
            doc_id += 1
    # a bot author repeating one 10-gram 101 times over two documents
    phrase = " ".join(f"b{i}" for i in range(10))
    docs.append({"id": "bot1", "created_utc": docs[0]["created_utc"],
                 "platform": "reddit", "community": "mg", "author": "spambot",
                 "text": " ".join([phrase] * 51)})
    docs.append({"id": "bot2", "created_utc": docs[1]["created_utc"],
                 "platform": "reddit", "community": "mg", "author": "spambot",
                 "text": " ".join([phrase] * 51)})
    # an exact duplicate on a forum
    dupe = dict(docs[5])
    dupe["id"] = "dupe1"
    dupe["platform"] = "forum"
    docs[5] = dict(docs[5], platform="forum")
    docs.append(dupe)
    return docs


def build_toy_workspace(root: Path) -> Path:
    """Create a complete toy workspace under root and return the config path."""
    ws = root
    (ws / "fixtures").mkdir(parents=True, exist_ok=True)
    shutil.copy(FIXTURES / "toy_synsets.jsonl", ws / "fixtures" / "synsets.jsonl")
    shutil.copy(FIXTURES / "toy_vocab.txt", ws / "fixtures" / "vocab.txt")

    db = parse_synsets(ws / "fixtures" / "synsets.jsonl")
    vocab = load_vocab(ws / "fixtures" / "vocab.txt")
    specs = build_axes(db, vocab)

    # every adjective is a single wordpiece except the whole left pole of
    # a022__a023, which forces that axis onto the backoff path
    wp = sorted(
        {adj for spec in specs for adj in spec.left.adjectives + spec.right.adjectives}
        - {"ceremonious", "dressed_up", "formal"}
    )
    (ws / "fixtures" / "wordpieces.txt").write_text("\n".join(wp) + "\n")

    rng = np.random.default_rng(20_240_101)
    directions = _write_contexts_and_embeddings(ws, specs, rng)
    _write_occurrence_embeddings(ws, directions, np.random.default_rng(11))

    docs = _corpus_docs(np.random.default_rng(13))
    with open(ws / "fixtures" / "corpus.jsonl", "w") as fh:
        for row in docs:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    pronoun_counts = {"accuser": (8, 2), "witness": (5, 4)}
    plural_map = {"accusers": "accuser", "women": "woman", "girls": "girl",
                  "wives": "wife", "men": "man"}
    feminine = _feminine_vocab_terms(docs, pronoun_counts, plural_map)
    _write_targets(ws, directions, np.random.default_rng(7),
                   feminine | set(FEM_TERMS) | set(OTHER_TERMS))

    (ws / "fixtures" / "categories.tsv").write_text(
        "".join(f"{t}\t{c}\n" for t, c in sorted(CATEGORIES.items()))
    )
    (ws / "fixtures" / "pronouns.tsv").write_text(
        "term\tfem\tmasc\n"
        + "".join(f"{t}\t{f}\t{m}\n" for t, (f, m) in sorted(pronoun_counts.items()))
    )
    (ws / "fixtures" / "plural_map.tsv").write_text(
        "".join(f"{p}\t{s}\n" for p, s in sorted(plural_map.items()))
    )
    (ws / "fixtures" / "number_lexicon.tsv").write_text(
        "wife\tsingular\nwomen\tplural\ngirlfriend\tsingular\ngirls\tplural\n"
        "accuser\tsingular\naccusers\tplural\nboyfriend\tsingular\nmen\tplural\n"
    )

    config = "\n".join([
        "db = fixtures/synsets.jsonl",
        "vocab = fixtures/vocab.txt",
        "wp_vocab = fixtures/wordpieces.txt",
        "contexts = fixtures/contexts.jsonl",
        "embeddings = fixtures/context_embeddings.saxe",
        "targets = fixtures/targets.saxe",
        "categories = fixtures/categories.tsv",
        "corpus = fixtures/corpus.jsonl",
        "pronouns = fixtures/pronouns.tsv",
        "plural_map = fixtures/plural_map.tsv",
        "number_lexicon = fixtures/number_lexicon.tsv",
        "occurrence_embeddings = fixtures/occ_embeddings.saxe",
        "out = out",
        "method = bert-prob",
        "zscored = true",
        "seed = 42",
        "min_pole = 3",
        "context_k = 5",
        "pool_cap = 20",
        "bootstrap = 200",
        "alpha = 0.05",
        "k_clusters = 3",
        "restarts = 5",
        "smoothing = 3",
        "fem_threshold = 0.75",
        "vocab_min = 2",
        "stratum_cap = 50",
        "monthly_cap = 20",
    ]) + "\n"
    conf_path = ws / "toy.conf"
    conf_path.write_text(config)
    return conf_path


@pytest.fixture(scope="session")
def toy_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("toyws")
    return build_toy_workspace(root)


@pytest.fixture(scope="session")
def toy_pipeline(toy_workspace):
    """The toy pipeline, run once per session; yields (config, manifest)."""
    from saxe.config import parse_config
    from saxe.pipeline import run_pipeline

    cfg = parse_config(toy_workspace)
    manifest = run_pipeline(cfg)
    return cfg, manifest
