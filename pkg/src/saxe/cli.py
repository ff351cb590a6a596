"""Command-line interface.

Every subcommand accepts --config (a flat key=value file) and stage flags
that override config values.  Exit codes: 0 success, 1 internal failure,
2 usage or missing-input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import contexts as ctx_mod
from . import lexicon as lex_mod
from . import pipeline as pipe
from . import projection as proj_mod
from .axes import load_axes_bundle
from .config import RunConfig, apply_overrides, parse_config
from .store import EmbeddingSet, load_stats
from .utils import derive_seed

logger = logging.getLogger(__name__)


def _base_config(args) -> RunConfig:
    cfg = parse_config(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("seed", "threads", "method"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if not getattr(args, "out_is_file", False) and getattr(args, "out", None) is not None:
        overrides["out"] = args.out
    for key in ("db", "vocab", "embeddings", "targets", "corpus", "series",
                "min_pole", "alpha", "bootstrap", "k_clusters", "restarts",
                "zscored", "contexts", "categories", "occurrence_embeddings"):
        if hasattr(args, key) and getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    return apply_overrides(cfg, **overrides)


def _add_common(sub, out_is_file: bool = False):
    sub.add_argument("--config", help="flat key=value configuration file")
    sub.add_argument("--seed", type=int, help="root random seed")
    sub.add_argument("--out", help="output file" if out_is_file else "output directory")
    sub.add_argument("--threads", type=int, help="worker threads for per-axis work")
    sub.set_defaults(out_is_file=out_is_file)


def _axes_from_args(args, cfg):
    if getattr(args, "axes", None):
        axes_path = Path(args.axes)
        manifest = Path(args.manifest) if getattr(args, "manifest", None) else \
            axes_path.with_name("axes_manifest.jsonl")
        if not axes_path.exists():
            raise pipe.InputError(f"axes file not found: {axes_path}")
        if not manifest.exists():
            raise pipe.InputError(f"axes manifest not found: {manifest}")
        return load_axes_bundle(axes_path, manifest)
    axes, _ = pipe._load_axes(cfg)
    return axes


def _stats_for(axes, args, cfg):
    if not any(ax.zscored for ax in axes):
        return None
    if getattr(args, "stats", None):
        path = Path(args.stats)
        if not path.exists():
            raise pipe.InputError(f"stats file not found: {path}")
        return load_stats(path)
    if getattr(args, "axes", None):
        sibling = Path(args.axes).with_name("stats.json")
        if sibling.exists():
            return load_stats(sibling)
    stats, _ = pipe._load_run_stats(cfg)
    return stats


def _score_groups(path, axes, cfg, stats):
    eset = EmbeddingSet.load(path)
    keys = sorted(eset.keys())
    from .store import mean_pool
    import numpy as np

    mat = np.stack([mean_pool(eset.get(k)) for k in keys])
    projector = proj_mod.SemanticAxisProjector(axes, stats=stats).fit()
    scores = projector.transform(mat)
    per_axis: dict[str, list[float]] = {}
    for j, ax in enumerate(axes):
        per_axis[ax.axis_id] = [float(v) for v in scores[:, j]]
    return per_axis


# ---------------------------------------------------------------- handlers

def _cmd_build_lexicon(args) -> int:
    cfg = _base_config(args)
    if args.out:
        db = pipe._require(cfg.db, "synset database")
        vocab_path = pipe._require(cfg.vocab, "vocabulary")
        specs = lex_mod.build_axes(
            lex_mod.parse_synsets(db), lex_mod.load_vocab(vocab_path),
            min_pole=cfg.min_pole,
        )
        lex_mod.write_axes(specs, args.out)
        print(f"wrote {len(specs)} axes to {args.out}")
        return 0
    io = pipe.stage_build_lexicon(cfg)
    print(f"wrote {io.outputs[0]}")
    return 0


def _cmd_select_contexts(args) -> int:
    cfg = _base_config(args)
    if args.pool:
        cfg = apply_overrides(cfg, contexts=args.pool)
    if args.selection_method:
        method = "bert-prob" if args.selection_method == "prob" else "bert-default"
        cfg = apply_overrides(cfg, method=method)
    if args.out:
        specs_path = args.axes or str(pipe._out(cfg, "axes_specs.jsonl"))
        specs = lex_mod.read_axes(pipe._require(specs_path, "axis specs"))
        pool = ctx_mod.read_context_records(
            pipe._require(cfg.contexts, "context records"), pool_cap=cfg.pool_cap
        )
        wp_vocab = None
        if pipe._selection_method(cfg) == "prob":
            wp_vocab = lex_mod.load_vocab(pipe._require(cfg.wp_vocab, "wordpiece vocabulary"))
        selections = ctx_mod.select_contexts_for_axes(
            specs, pool, pipe._selection_method(cfg), wp_vocab=wp_vocab,
            k=cfg.context_k, seed=cfg.seed,
        )
        ctx_mod.write_selections(selections, args.out)
        print(f"wrote {args.out}")
        return 0
    io = pipe.stage_select_contexts(cfg, specs_path=args.axes)
    print(f"wrote {io.outputs[0]}")
    return 0


def _cmd_build_axes(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_build_axes(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_validate(args) -> int:
    cfg = _base_config(args)
    if args.axes:
        axes_dir = Path(args.axes).parent
        cfg = apply_overrides(cfg, out=str(Path(args.out or cfg.out)))
        # explicit bundle paths take precedence over staged ones
        axes = _axes_from_args(args, cfg)
        from . import consistency as cons

        embeddings = EmbeddingSet.load(pipe._require(cfg.embeddings, "embeddings"))
        stats = None
        if any(ax.zscored for ax in axes):
            stats_path = Path(args.stats) if args.stats else axes_dir / "stats.json"
            if not stats_path.exists():
                raise pipe.InputError(f"stats file not found: {stats_path}")
            stats = load_stats(stats_path)
        reports = [cons.axis_consistency(ax, embeddings, stats,
                                         per_adjective_mean=cfg.per_adjective_mean)
                   for ax in axes]
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        run_method = ("bert-prob" if any(ax.method == "bert-prob" for ax in axes)
                      else axes[0].method)
        cons.write_report_tsv(reports, out_dir / "consistency.tsv")
        cons.write_summary_json(
            cons.summarize_method(reports, method=run_method, zscored=axes[0].zscored),
            out_dir / "summary.json",
        )
        print(f"wrote {out_dir / 'consistency.tsv'}")
        return 0
    io = pipe.stage_validate(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_project(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_project(cfg)
    print(f"wrote {io.outputs[0]}")
    return 0


def _cmd_contrast(args) -> int:
    cfg = _base_config(args)
    if args.targets_file and args.background:
        axes = _axes_from_args(args, cfg)
        stats = _stats_for(axes, args, cfg)
        cat = _score_groups(args.targets_file, axes, cfg, stats)
        bg = _score_groups(args.background, axes, cfg, stats)
        results = proj_mod.contrast_experiment(
            cat, bg, n_boot=cfg.bootstrap, alpha=cfg.alpha,
            seed=derive_seed(cfg.seed, "contrast", "targets"),
        )
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        from . import svgplot

        svgplot.write_tsv(
            out_dir / "contrast.tsv",
            ["category", "axis_id", "category_mean", "background_mean", "difference",
             "direction", "p_value", "ci_low", "ci_high"],
            pipe._contrast_rows("targets", results),
        )
        print(f"wrote {out_dir / 'contrast.tsv'} ({len(results)} significant axes)")
        return 0
    io = pipe.stage_contrast(cfg)
    print(f"wrote {io.outputs[0]}")
    return 0


def _cmd_variants(args) -> int:
    cfg = _base_config(args)
    if args.targets_file and args.background:
        axes = _axes_from_args(args, cfg)
        stats = _stats_for(axes, args, cfg)
        a = _score_groups(args.targets_file, axes, cfg, stats)
        b = _score_groups(args.background, axes, cfg, stats)
        ranking = proj_mod.mean_difference_ranking(a, b)
        out_dir = Path(cfg.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        from . import svgplot

        svgplot.write_tsv(
            out_dir / "variants.tsv",
            ["axis_id", "mean_a", "ci_a", "mean_b", "ci_b", "difference"],
            [[r.axis_id, repr(r.mean_a), repr(r.ci_a), repr(r.mean_b), repr(r.ci_b),
              repr(r.difference)] for r in ranking],
        )
        print(f"wrote {out_dir / 'variants.tsv'}")
        return 0
    io = pipe.stage_variants(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_ingest(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_ingest(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_vocab(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_vocab(cfg)
    print(f"wrote {io.outputs[0]}")
    return 0


def _cmd_sample(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_sample(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_cluster(args) -> int:
    cfg = _base_config(args)
    if args.k is not None:
        cfg = apply_overrides(cfg, k_clusters=args.k)
    io = pipe.stage_cluster(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_timeline(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_timeline(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_report(args) -> int:
    cfg = _base_config(args)
    io = pipe.stage_report(cfg)
    print(f"wrote {', '.join(str(p) for p in io.outputs)}")
    return 0


def _cmd_run(args) -> int:
    cfg = _base_config(args)
    manifest = pipe.run_pipeline(cfg, stages=args.stages or None)
    print(f"pipeline complete: {len(manifest['stages'])} stages, out={cfg.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saxe",
        description="Build, validate, and apply semantic axes between antonym poles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lexicon", help="compile axis specs from a synset export")
    _add_common(p, out_is_file=True)
    p.add_argument("--db", help="synset database (JSON lines)")
    p.add_argument("--vocab", help="vocabulary file, one word per line")
    p.add_argument("--min-pole", dest="min_pole", type=int)
    p.set_defaults(func=_cmd_build_lexicon)

    p = sub.add_parser("select-contexts", help="choose contexts per axis pole")
    _add_common(p, out_is_file=True)
    p.add_argument("--pool", help="context records (JSON lines)")
    p.add_argument("--axes", help="axis specs file")
    p.add_argument("--method", dest="selection_method", choices=("prob", "default"))
    p.set_defaults(func=_cmd_select_contexts, method=None)

    p = sub.add_parser("build-axes", help="realize axis vectors from embeddings")
    _add_common(p)
    p.add_argument("--embeddings", help="SAXE embedding file")
    p.add_argument("--method", choices=("glove", "bert-default", "bert-prob"))
    p.add_argument("--zscored", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=_cmd_build_axes)

    p = sub.add_parser("validate", help="leave-one-out consistency of built axes")
    _add_common(p)
    p.add_argument("--axes", help="axis vector bundle (SAXE)")
    p.add_argument("--manifest", help="axes manifest (defaults to sibling file)")
    p.add_argument("--embeddings", help="SAXE embedding file")
    p.add_argument("--stats", help="z-score stats JSON")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("project", help="score target embeddings against axes")
    _add_common(p)
    p.add_argument("--axes", help="axis vector bundle (SAXE)")
    p.add_argument("--manifest")
    p.add_argument("--targets", help="target embeddings (SAXE)")
    p.set_defaults(func=_cmd_project)

    for name, helptext, func in (
        ("contrast", "category-vs-background axis shifts", _cmd_contrast),
        ("variants", "mean-difference ranking between two groups", _cmd_variants),
    ):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        p.add_argument("--axes", help="axis vector bundle (SAXE)")
        p.add_argument("--manifest")
        p.add_argument("--stats", help="z-score stats JSON")
        p.add_argument("--targets", dest="targets_file", help="group embeddings (SAXE)")
        p.add_argument("--background", help="background/second group embeddings (SAXE)")
        p.add_argument("--alpha", type=float)
        p.add_argument("--bootstrap", type=int)
        p.add_argument("--categories", help="term-to-category TSV (config mode)")
        p.set_defaults(func=func)

    p = sub.add_parser("ingest", help="parse, dedup, and bot-filter a corpus")
    _add_common(p)
    p.add_argument("--corpus", help="corpus JSON lines")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("vocab", help="build the people vocabulary with gender leanings")
    _add_common(p)
    p.set_defaults(func=_cmd_vocab)

    p = sub.add_parser("sample", help="stratified and monthly occurrence samples")
    _add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("cluster", help="cluster frequency series by shape")
    _add_common(p)
    p.add_argument("--series", help="series TSV (term, month, value)")
    p.add_argument("--k", type=int, help="number of clusters")
    p.add_argument("--restarts", type=int)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("timeline", help="monthly mean axis scores of occurrence embeddings")
    _add_common(p)
    p.add_argument("--occurrence-embeddings", dest="occurrence_embeddings")
    p.set_defaults(func=_cmd_timeline)

    p = sub.add_parser("report", help="cluster-by-axis profile and summary charts")
    _add_common(p)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("run", help="run the full pipeline from a config file")
    _add_common(p)
    p.add_argument("--stages", nargs="*", help="subset of stages to run, in order")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except pipe.InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except pipe.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # internal failure
        logger.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
