"""Pipeline stages and the end-to-end runner.

Each stage reads files named in the run configuration, writes its outputs
under ``out/`` (via .partial temporaries renamed on success), and reports
the files it touched.  The runner chains stages and records a manifest of
config hash, seed, and per-file digests; no timestamps are written, so a
rerun with identical inputs is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import axes as axes_mod
from . import consistency as cons
from . import contexts as ctx_mod
from . import ingest as ingest_mod
from . import lexicon as lex_mod
from . import projection as proj_mod
from . import svgplot
from . import timeseries as ts_mod
from .config import RunConfig, config_hash
from .store import EmbeddingSet, compute_zscore_stats, load_stats, mean_pool, save_stats
from .utils import derive_seed

logger = logging.getLogger(__name__)

TIMELINE_TOP_AXES = 3
VARIANT_TOP_AXES = 5


class InputError(Exception):
    """A referenced input file is missing or unreadable (usage error, exit 2)."""


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _require(path: str | None, what: str) -> Path:
    if not path:
        raise InputError(f"no path configured for {what}")
    p = Path(path)
    if not p.exists():
        raise InputError(f"{what} file not found: {p}")
    return p


def _num(value: float) -> str:
    return repr(float(value))


class StageOutputs:
    """Write outputs via .partial names; rename into place only on success."""

    def __init__(self, *finals):
        self.finals = [Path(f) for f in finals]
        self._partial = {f: Path(str(f) + ".partial") for f in self.finals}

    def path(self, final) -> Path:
        return self._partial[Path(final)]

    def commit(self) -> list[Path]:
        for final, partial in self._partial.items():
            partial.replace(final)
        return self.finals


@dataclass
class StageIO:
    name: str
    inputs: list[Path]
    outputs: list[Path]


def _out(cfg: RunConfig, name: str) -> Path:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / name


# ---------------------------------------------------------------- lexicon

def stage_build_lexicon(cfg: RunConfig) -> StageIO:
    db_path = _require(cfg.db, "synset database")
    vocab_path = _require(cfg.vocab, "vocabulary")
    out = StageOutputs(_out(cfg, "axes_specs.jsonl"))
    db = lex_mod.parse_synsets(db_path)
    vocab = lex_mod.load_vocab(vocab_path)
    specs = lex_mod.build_axes(db, vocab, min_pole=cfg.min_pole)
    lex_mod.write_axes(specs, out.path(_out(cfg, "axes_specs.jsonl")))
    return StageIO("build-lexicon", [db_path, vocab_path], out.commit())


# ---------------------------------------------------------------- contexts

def _selection_method(cfg: RunConfig) -> str:
    return "prob" if cfg.method == "bert-prob" else "default"


def stage_select_contexts(cfg: RunConfig, specs_path=None) -> StageIO:
    if cfg.method == "glove":
        raise InputError("select-contexts does not apply to the glove method")
    specs_path = Path(specs_path) if specs_path else _require(
        str(_out(cfg, "axes_specs.jsonl")), "axis specs")
    pool_path = _require(cfg.contexts, "context records")
    inputs = [specs_path, pool_path]
    wp_vocab = None
    if _selection_method(cfg) == "prob":
        wp_path = _require(cfg.wp_vocab, "wordpiece vocabulary")
        wp_vocab = lex_mod.load_vocab(wp_path)
        inputs.append(wp_path)
    specs = lex_mod.read_axes(specs_path)
    pool = ctx_mod.read_context_records(pool_path, pool_cap=cfg.pool_cap)
    selections = ctx_mod.select_contexts_for_axes(
        specs, pool, _selection_method(cfg), wp_vocab=wp_vocab,
        k=cfg.context_k, seed=cfg.seed,
    )
    out = StageOutputs(_out(cfg, "selections.jsonl"))
    ctx_mod.write_selections(selections, out.path(_out(cfg, "selections.jsonl")))
    return StageIO("select-contexts", inputs, out.commit())


# ---------------------------------------------------------------- axes

def _load_or_compute_stats(cfg: RunConfig, embeddings: EmbeddingSet):
    if cfg.stats_sample:
        sample = EmbeddingSet.load(_require(cfg.stats_sample, "z-score sample"))
    else:
        sample = embeddings
    return compute_zscore_stats(sample)


def stage_build_axes(cfg: RunConfig) -> StageIO:
    specs_path = _require(str(_out(cfg, "axes_specs.jsonl")), "axis specs")
    emb_path = _require(cfg.embeddings, "embeddings")
    inputs = [specs_path, emb_path]
    specs = lex_mod.read_axes(specs_path)
    embeddings = EmbeddingSet.load(emb_path)
    stats = _load_or_compute_stats(cfg, embeddings)
    selections = None
    if cfg.method != "glove":
        sel_path = _require(str(_out(cfg, "selections.jsonl")), "context selections")
        selections = ctx_mod.read_selections(sel_path)
        inputs.append(sel_path)
    axes = axes_mod.realize_all(
        specs, embeddings, cfg.method,
        zscored=cfg.zscored, stats=stats if cfg.zscored else None,
        selections=selections, per_adjective_mean=cfg.per_adjective_mean,
    )
    finals = [_out(cfg, "axes.saxe"), _out(cfg, "axes_manifest.jsonl"), _out(cfg, "stats.json")]
    out = StageOutputs(*finals)
    axes_mod.write_axes_bundle(axes, out.path(finals[0]), out.path(finals[1]))
    save_stats(stats, out.path(finals[2]))
    return StageIO("build-axes", inputs, out.commit())


def _load_axes(cfg: RunConfig, axes_path=None, manifest_path=None):
    axes_path = Path(axes_path) if axes_path else _require(str(_out(cfg, "axes.saxe")), "axes")
    manifest_path = (
        Path(manifest_path) if manifest_path
        else _require(str(_out(cfg, "axes_manifest.jsonl")), "axes manifest")
    )
    return axes_mod.load_axes_bundle(axes_path, manifest_path), [axes_path, manifest_path]


def _load_run_stats(cfg: RunConfig):
    stats_path = _require(str(_out(cfg, "stats.json")), "z-score stats")
    return load_stats(stats_path), stats_path


# ---------------------------------------------------------------- validate

def stage_validate(cfg: RunConfig) -> StageIO:
    axes, inputs = _load_axes(cfg)
    emb_path = _require(cfg.embeddings, "embeddings")
    embeddings = EmbeddingSet.load(emb_path)
    inputs.append(emb_path)
    stats = None
    if any(ax.zscored for ax in axes):
        stats, stats_path = _load_run_stats(cfg)
        inputs.append(stats_path)

    def one(axis):
        return cons.axis_consistency(
            axis, embeddings, stats, per_adjective_mean=cfg.per_adjective_mean
        )

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(one, axes))
    else:
        reports = [one(ax) for ax in axes]
    summary = cons.summarize_method(reports, method=cfg.method, zscored=cfg.zscored)
    finals = [_out(cfg, "consistency.tsv"), _out(cfg, "summary.json")]
    out = StageOutputs(*finals)
    cons.write_report_tsv(reports, out.path(finals[0]))
    cons.write_summary_json(summary, out.path(finals[1]))
    return StageIO("validate", inputs, out.commit())


# ---------------------------------------------------------------- project

def _target_vectors(eset: EmbeddingSet) -> tuple[list[str], np.ndarray]:
    keys = sorted(eset.keys())
    mat = np.stack([mean_pool(eset.get(k)) for k in keys])
    return keys, mat


def _score_table(cfg: RunConfig, eset: EmbeddingSet, axes) -> dict[str, dict[str, float]]:
    """target key -> axis id -> cosine score."""
    stats = None
    if any(ax.zscored for ax in axes):
        stats, _ = _load_run_stats(cfg)
    keys, mat = _target_vectors(eset)
    projector = proj_mod.SemanticAxisProjector(axes, stats=stats).fit()
    scores = projector.transform(mat)
    return {
        key: {ax.axis_id: float(scores[i, j]) for j, ax in enumerate(axes)}
        for i, key in enumerate(keys)
    }


def stage_project(cfg: RunConfig) -> StageIO:
    axes, inputs = _load_axes(cfg)
    targets_path = _require(cfg.targets, "target embeddings")
    inputs.append(targets_path)
    table = _score_table(cfg, EmbeddingSet.load(targets_path), axes)
    if any(ax.zscored for ax in axes):
        inputs.append(_out(cfg, "stats.json"))
    final = _out(cfg, "scores.tsv")
    out = StageOutputs(final)
    with open(out.path(final), "w", encoding="utf-8") as fh:
        fh.write("target\taxis_id\tscore\tpole\n")
        for key in sorted(table):
            for axis_id in sorted(table[key]):
                score = table[key][axis_id]
                pole = "left" if score > 0 else "right"
                fh.write(f"{key}\t{axis_id}\t{_num(score)}\t{pole}\n")
    return StageIO("project", inputs, out.commit())


def read_scores_tsv(path) -> dict[str, dict[str, float]]:
    table: dict[str, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("target\t"):
            raise ValueError(f"{path}: not a scores file")
        for line in fh:
            target, axis_id, score, _pole = line.rstrip("\n").split("\t")
            table.setdefault(target, {})[axis_id] = float(score)
    return table


# ---------------------------------------------------------------- contrast

def _contrast_rows(category, results):
    return [
        [
            category, r.axis_id, _num(r.category_mean), _num(r.background_mean),
            _num(r.difference), r.direction, _num(r.p_value),
            _num(r.ci_low), _num(r.ci_high),
        ]
        for r in results
    ]


def stage_contrast(cfg: RunConfig) -> StageIO:
    scores_path = _require(str(_out(cfg, "scores.tsv")), "scores")
    cats_path = _require(cfg.categories, "categories")
    table = read_scores_tsv(scores_path)
    categories = ingest_mod.read_two_column_tsv(cats_path)
    axis_ids = sorted({a for t in table.values() for a in t})
    background = {
        a: [table[t][a] for t in sorted(table) if a in table[t]] for a in axis_ids
    }
    rows = []
    for category in sorted(set(categories.values())):
        members = sorted(t for t, c in categories.items() if c == category and t in table)
        cat_scores = {a: [table[t][a] for t in members] for a in axis_ids}
        results = proj_mod.contrast_experiment(
            cat_scores, background, n_boot=cfg.bootstrap, alpha=cfg.alpha,
            seed=derive_seed(cfg.seed, "contrast", category),
        )
        rows.extend(_contrast_rows(category, results))
    final = _out(cfg, "contrast.tsv")
    out = StageOutputs(final)
    svgplot.write_tsv(
        out.path(final),
        ["category", "axis_id", "category_mean", "background_mean", "difference",
         "direction", "p_value", "ci_low", "ci_high"],
        rows,
    )
    return StageIO("contrast", [scores_path, cats_path], out.commit())


# ---------------------------------------------------------------- ingest

def stage_ingest(cfg: RunConfig) -> StageIO:
    corpus_path = _require(cfg.corpus, "corpus")
    docs = list(ingest_mod.parse_documents(corpus_path))
    n_before = len(docs)
    docs = ingest_mod.dedup_documents(docs)
    n_dupes = n_before - len(docs)
    flagged = ingest_mod.bot_filter(ingest_mod.group_by_author(docs))
    docs = [d for d in docs if d.author not in flagged]
    finals = [_out(cfg, "docs.jsonl"), _out(cfg, "ingest_log.json")]
    out = StageOutputs(*finals)
    with open(out.path(finals[0]), "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(
                json.dumps(
                    {
                        "id": doc.doc_id, "created_utc": doc.timestamp,
                        "platform": doc.platform, "community": doc.community,
                        "author": doc.author, "tokens": list(doc.tokens),
                    },
                    ensure_ascii=False, separators=(",", ":"),
                )
                + "\n"
            )
    log = {
        "documents": len(docs),
        "duplicates_removed": n_dupes,
        "bot_authors": sorted(flagged),
    }
    Path(out.path(finals[1])).write_text(json.dumps(log, sort_keys=True) + "\n", encoding="utf-8")
    return StageIO("ingest", [corpus_path], out.commit())


def read_docs_jsonl(path) -> list[ingest_mod.Document]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            docs.append(
                ingest_mod.Document(
                    doc_id=str(row["id"]), timestamp=int(row["created_utc"]),
                    platform=str(row["platform"]), community=str(row["community"]),
                    author=str(row["author"]), tokens=tuple(row["tokens"]),
                )
            )
    return docs


# ---------------------------------------------------------------- vocab

def stage_vocab(cfg: RunConfig) -> StageIO:
    docs_path = _require(str(_out(cfg, "docs.jsonl")), "ingested documents")
    pronouns_path = _require(cfg.pronouns, "pronoun cluster counts")
    inputs = [docs_path, pronouns_path]
    plural_map = {}
    if cfg.plural_map:
        plural_path = _require(cfg.plural_map, "plural map")
        plural_map = ingest_mod.read_two_column_tsv(plural_path)
        inputs.append(plural_path)
    docs = read_docs_jsonl(docs_path)
    counts = ingest_mod.count_document_terms(docs)
    labeler = ingest_mod.GenderLabeler(
        ingest_mod.read_pronoun_counts(pronouns_path), plural_map=plural_map
    )
    terms = ingest_mod.build_vocabulary(counts, labeler, min_count=cfg.vocab_min)
    final = _out(cfg, "vocabulary.tsv")
    out = StageOutputs(final)
    ingest_mod.write_vocab_tsv(terms, out.path(final))
    return StageIO("vocab", inputs, out.commit())


def read_vocab_tsv(path) -> list[ingest_mod.VocabTerm]:
    terms = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("surface\t"):
            raise ValueError(f"{path}: not a vocabulary file")
        for line in fh:
            surface, count, leaning, source = line.rstrip("\n").split("\t")
            terms.append(
                ingest_mod.VocabTerm(
                    surface=surface, total_count=int(count),
                    gender_leaning=float(leaning) if leaning else None,
                    leaning_source=source,
                )
            )
    return terms


def _feminine_terms(cfg: RunConfig, terms) -> list[str]:
    return sorted(
        t.surface for t in terms
        if t.gender_leaning is not None and t.gender_leaning > cfg.fem_threshold
    )


# ---------------------------------------------------------------- sample

def _occurrence_json(occ: ingest_mod.Occurrence) -> str:
    return json.dumps(
        {
            "doc_id": occ.doc_id, "month": occ.month, "platform": occ.platform,
            "community": occ.community, "tokens": list(occ.tokens),
            "span_start": occ.span_start, "span_len": occ.span_len,
            "replaced": occ.replaced,
        },
        ensure_ascii=False, separators=(",", ":"),
    )


def stage_sample(cfg: RunConfig) -> StageIO:
    docs_path = _require(str(_out(cfg, "docs.jsonl")), "ingested documents")
    vocab_path = _require(str(_out(cfg, "vocabulary.tsv")), "vocabulary")
    inputs = [docs_path, vocab_path]
    number_lexicon = {}
    if cfg.number_lexicon:
        number_path = _require(cfg.number_lexicon, "number lexicon")
        number_lexicon = ingest_mod.read_two_column_tsv(number_path)
        inputs.append(number_path)
    docs = read_docs_jsonl(docs_path)
    feminine = set(_feminine_terms(cfg, read_vocab_tsv(vocab_path)))
    occurrences = [
        occ for doc in docs for occ in ingest_mod.extract_occurrences(doc, feminine)
    ]
    strat = ingest_mod.stratified_sample(
        occurrences, cap=cfg.stratum_cap, seed=derive_seed(cfg.seed, "stratified")
    )
    by_month: dict[str, list[ingest_mod.Occurrence]] = {}
    for occ in occurrences:
        by_month.setdefault(occ.month, []).append(occ)
    replaced = []
    for month in sorted(by_month):
        sampled = ingest_mod.reservoir_sample(
            by_month[month], k=cfg.monthly_cap,
            seed=derive_seed(cfg.seed, "monthly", month),
        )
        replaced.extend(ingest_mod.replace_target(o, number_lexicon) for o in sampled)
    finals = [_out(cfg, "sampled.jsonl"), _out(cfg, "replaced.jsonl")]
    out = StageOutputs(*finals)
    for final, rows in ((finals[0], strat), (finals[1], replaced)):
        with open(out.path(final), "w", encoding="utf-8") as fh:
            for occ in rows:
                fh.write(_occurrence_json(occ) + "\n")
    return StageIO("sample", inputs, out.commit())


# ---------------------------------------------------------------- cluster

def write_series_tsv(series_list, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("term\tmonth\tvalue\n")
        for s in series_list:
            for month, value in zip(s.months, s.values):
                fh.write(f"{s.term}\t{month}\t{_num(value)}\n")


def read_series_tsv(path) -> list[ts_mod.FrequencySeries]:
    per_term: dict[str, dict[str, float]] = {}
    months: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("term\t"):
            raise ValueError(f"{path}: not a series file")
        for line in fh:
            term, month, value = line.rstrip("\n").split("\t")
            per_term.setdefault(term, {})[month] = float(value)
            months.add(month)
    grid = ts_mod.month_range(min(months), max(months))
    return [
        ts_mod.FrequencySeries(
            term=term, months=tuple(grid),
            values=np.array([per_term[term].get(m, 0.0) for m in grid]),
        )
        for term in sorted(per_term)
    ]


def _build_feminine_series(cfg: RunConfig, docs_path, vocab_path):
    docs = read_docs_jsonl(docs_path)
    feminine = _feminine_terms(cfg, read_vocab_tsv(vocab_path))
    totals: dict[str, int] = {}
    doc_counts: dict[str, dict[str, int]] = {t: {} for t in feminine}
    for doc in docs:
        weight = len(doc.tokens) if cfg.freq_denominator == "tokens" else 1
        totals[doc.month] = totals.get(doc.month, 0) + weight
        present = set(doc.tokens)
        present.update(
            f"{doc.tokens[i]} {doc.tokens[i + 1]}" for i in range(len(doc.tokens) - 1)
        )
        for term in feminine:
            if term in present:
                doc_counts[term][doc.month] = doc_counts[term].get(doc.month, 0) + 1
    series = ts_mod.build_series(doc_counts, totals)
    return [ts_mod.smooth(s, kernel=cfg.smoothing) for s in series]


def stage_cluster(cfg: RunConfig) -> StageIO:
    finals = [_out(cfg, "series.tsv"), _out(cfg, "clusters.json")]
    out = StageOutputs(*finals)
    if cfg.series:
        series_path = _require(cfg.series, "frequency series")
        series = read_series_tsv(series_path)
        inputs = [series_path]
        write_series_tsv(series, out.path(finals[0]))
    else:
        docs_path = _require(str(_out(cfg, "docs.jsonl")), "ingested documents")
        vocab_path = _require(str(_out(cfg, "vocabulary.tsv")), "vocabulary")
        inputs = [docs_path, vocab_path]
        series = _build_feminine_series(cfg, docs_path, vocab_path)
        write_series_tsv(series, out.path(finals[0]))
    model = ts_mod.ksc_cluster(
        series, n_clusters=cfg.k_clusters, seed=cfg.seed, restarts=cfg.restarts
    )
    Path(out.path(finals[1])).write_text(model.to_json() + "\n", encoding="utf-8")
    return StageIO("cluster", inputs, out.commit())


# ---------------------------------------------------------------- timeline

def _occurrence_scores(cfg: RunConfig, axes):
    occ_path = _require(cfg.occurrence_embeddings, "occurrence embeddings")
    eset = EmbeddingSet.load(occ_path)
    table = _score_table(cfg, eset, axes)
    parsed = []
    for key in sorted(table):
        parts = key.split("|")
        if len(parts) != 3:
            raise ValueError(
                f"occurrence key {key!r} must look like group|month|index"
            )
        group, month, _ = parts
        parsed.append((group, month, table[key]))
    return occ_path, parsed


def stage_timeline(cfg: RunConfig) -> StageIO:
    axes, inputs = _load_axes(cfg)
    occ_path, parsed = _occurrence_scores(cfg, axes)
    inputs.append(occ_path)
    months = sorted({month for _, month, _ in parsed})
    groups = sorted({group for group, _, _ in parsed})
    axis_ids = sorted({a for _, _, scores in parsed for a in scores})
    cells: dict[tuple[str, str, str], list[float]] = {}
    for group, month, scores in parsed:
        for axis_id, score in scores.items():
            cells.setdefault((group, axis_id, month), []).append(score)

    def month_stats(group, axis_id, month):
        vals = cells.get((group, axis_id, month))
        if not vals:
            return None, None, 0
        arr = np.asarray(vals)
        ci = float(1.96 * arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        return float(arr.mean()), ci, arr.size

    rows = []
    for group in groups:
        for axis_id in axis_ids:
            for month in months:
                mean, ci, n = month_stats(group, axis_id, month)
                if mean is None:
                    continue
                rows.append([group, axis_id, month, _num(mean), _num(ci), str(n)])
    finals = [_out(cfg, "timeline.tsv"), _out(cfg, "timeline.svg"),
              _out(cfg, "timeline_chart.tsv")]
    out = StageOutputs(*finals)
    svgplot.write_tsv(out.path(finals[0]),
                      ["group", "axis_id", "month", "mean", "ci95", "n"], rows)

    # chart the few axes whose monthly means move the most
    spread = {}
    for axis_id in axis_ids:
        means = [
            month_stats(g, axis_id, m)[0]
            for g in groups for m in months
            if month_stats(g, axis_id, m)[0] is not None
        ]
        spread[axis_id] = float(np.var(means)) if means else 0.0
    top = sorted(axis_ids, key=lambda a: (-spread[a], a))[:TIMELINE_TOP_AXES]
    series: dict[str, list[float | None]] = {}
    cis: dict[str, list[float | None]] = {}
    for axis_id in top:
        for group in groups:
            name = f"{axis_id}|{group}"
            series[name] = [month_stats(group, axis_id, m)[0] for m in months]
            cis[name] = [month_stats(group, axis_id, m)[1] for m in months]
    svgplot.line_chart(
        out.path(finals[1]), out.path(finals[2]),
        "mean axis score of sampled contexts by month",
        months, series, ci=cis,
    )
    return StageIO("timeline", inputs, out.commit())


# ---------------------------------------------------------------- variants

def stage_variants(cfg: RunConfig) -> StageIO:
    axes, inputs = _load_axes(cfg)
    occ_path, parsed = _occurrence_scores(cfg, axes)
    inputs.append(occ_path)
    groups = sorted({group for group, _, _ in parsed})
    if len(groups) != 2:
        raise ValueError(f"variant comparison needs exactly 2 groups, got {groups}")
    scores: dict[str, dict[str, list[float]]] = {g: {} for g in groups}
    for group, _, per_axis in parsed:
        for axis_id, score in per_axis.items():
            scores[group].setdefault(axis_id, []).append(score)
    ranking = proj_mod.mean_difference_ranking(scores[groups[0]], scores[groups[1]])
    finals = [_out(cfg, "variants.tsv"), _out(cfg, "variants.svg"),
              _out(cfg, "variants_chart.tsv")]
    out = StageOutputs(*finals)
    svgplot.write_tsv(
        out.path(finals[0]),
        ["axis_id", f"mean_{groups[0]}", f"ci_{groups[0]}",
         f"mean_{groups[1]}", f"ci_{groups[1]}", "difference"],
        [
            [r.axis_id, _num(r.mean_a), _num(r.ci_a), _num(r.mean_b), _num(r.ci_b),
             _num(r.difference)]
            for r in ranking
        ],
    )
    bars = []
    for r in ranking[:VARIANT_TOP_AXES]:
        bars.append((f"{r.axis_id} ({groups[0]})", r.mean_a, r.ci_a))
        bars.append((f"{r.axis_id} ({groups[1]})", r.mean_b, r.ci_b))
    svgplot.bar_chart(
        out.path(finals[1]), out.path(finals[2]),
        "group mean axis scores, largest differences first", bars,
    )
    return StageIO("variants", inputs, out.commit())


# ---------------------------------------------------------------- report

def stage_report(cfg: RunConfig) -> StageIO:
    clusters_path = _require(str(_out(cfg, "clusters.json")), "cluster model")
    scores_path = _require(str(_out(cfg, "scores.tsv")), "scores")
    series_path = _require(str(_out(cfg, "series.tsv")), "frequency series")
    model = ts_mod.ClusterModel.from_json(Path(clusters_path).read_text(encoding="utf-8"))
    table = read_scores_tsv(scores_path)
    series = read_series_tsv(series_path)
    frequencies = {s.term: float(s.values.mean()) for s in series}
    axis_ids = sorted({a for t in table.values() for a in t})
    term_scores = {
        a: {t: table[t][a] for t in model.assignments if t in table} for a in axis_ids
    }
    profile = ts_mod.cluster_axis_profile(model, term_scores, frequencies)
    finals = [_out(cfg, "profile.tsv"), _out(cfg, "profile.svg"),
              _out(cfg, "profile_chart.tsv")]
    out = StageOutputs(*finals)
    svgplot.write_tsv(
        out.path(finals[0]),
        ["cluster", "freq_half", "axis_id", "mean", "ci95", "n_terms"],
        [
            [str(r.cluster), r.freq_half, r.axis_id, _num(r.mean),
             "" if r.ci95 is None else _num(r.ci95), str(r.n_terms)]
            for r in profile
        ],
    )
    bars = [
        (f"c{r.cluster}:{r.freq_half}:{r.axis_id}", r.mean, r.ci95)
        for r in profile
    ]
    svgplot.bar_chart(
        out.path(finals[1]), out.path(finals[2]),
        "mean axis score by cluster and frequency half", bars,
    )
    return StageIO("report", [clusters_path, scores_path, series_path], out.commit())


# ---------------------------------------------------------------- runner

_STAGES = {
    "build-lexicon": stage_build_lexicon,
    "select-contexts": stage_select_contexts,
    "build-axes": stage_build_axes,
    "validate": stage_validate,
    "project": stage_project,
    "contrast": stage_contrast,
    "ingest": stage_ingest,
    "vocab": stage_vocab,
    "sample": stage_sample,
    "cluster": stage_cluster,
    "timeline": stage_timeline,
    "variants": stage_variants,
    "report": stage_report,
}

PIPELINE_ORDER = (
    "build-lexicon", "select-contexts", "build-axes", "validate", "project",
    "contrast", "ingest", "vocab", "sample", "cluster", "timeline",
    "variants", "report",
)


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_pipeline(cfg: RunConfig, stages=None) -> dict:
    """Run stages in order and write a digest manifest under out/.

    Returns the manifest dict.  A failing stage raises StageError after its
    partial outputs are left in place with a .partial suffix.
    """
    names = list(stages) if stages else [
        s for s in PIPELINE_ORDER if not (s == "select-contexts" and cfg.method == "glove")
    ]
    manifest = {
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "stages": [],
    }
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name in names:
        if name not in _STAGES:
            raise InputError(f"unknown stage {name!r}")
        logger.info("running stage %s", name)
        try:
            io = _STAGES[name](cfg)
        except (InputError, StageError):
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        manifest["stages"].append(
            {
                "name": io.name,
                "inputs": {str(p): file_digest(p) for p in sorted(io.inputs)},
                "outputs": {str(p): file_digest(p) for p in sorted(io.outputs)},
            }
        )
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                             encoding="utf-8")
    return manifest
