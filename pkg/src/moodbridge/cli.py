"""Command-line front-end.

Subcommands wire the library into reproducible experiments:

    synth         generate a synthetic two-modality corpus + resources
    ingest        validate (and optionally rewrite) a feature file
    map-taxonomy  print a text-to-music tag map as TSV
    train         train one strategy, write checkpoint + log
    eval          score a checkpoint, write a JSON report
    suite         train and score several strategies as one grid
    retrieve      ranked music results for text queries
    project       2-D PCA export of the learned embedding spaces

Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure.
Set MOODBRIDGE_LOG=debug|info|warning to control verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import evaluation, models, taxonomy
from .errors import (
    ConfigError,
    DataError,
    MoodBridgeError,
    NumericError,
    ShapeError,
)
from .experiment import (
    ExperimentConfig,
    evaluate_checkpoint,
    run_suite,
    run_training,
    suite_table,
)
from .features import (
    MUSIC,
    TEXT,
    Vocabulary,
    default_synth_spec,
    load_features,
    load_vad_lexicon,
    load_word_embeddings,
    synth_generate,
    synth_vad_lexicon,
    synth_word_embeddings,
    write_features,
    write_vad_lexicon,
    write_word_embeddings,
)
from .retrieval import query as nn_query

log = logging.getLogger("moodbridge")


def _configure_logging():
    level = os.environ.get("MOODBRIDGE_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_synth(args):
    spec = default_synth_spec(
        seed=args.seed, cluster_std=args.cluster_std,
        per_text_tag=args.per_text_tag, per_music_tag=args.per_music_tag)
    corpus = synth_generate(spec, args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = {
        "text_features": os.path.join(args.out_dir, "text.features"),
        "music_features": os.path.join(args.out_dir, "music.features"),
        "embeddings": os.path.join(args.out_dir, "tags.w2v"),
        "lexicon": os.path.join(args.out_dir, "tags.vad"),
        "map_file": os.path.join(args.out_dir, "ground_truth_map.tsv"),
    }
    write_features(corpus.text, paths["text_features"])
    write_features(corpus.music, paths["music_features"])
    write_word_embeddings(synth_word_embeddings(spec), paths["embeddings"])
    write_vad_lexicon(synth_vad_lexicon(spec), paths["lexicon"])
    truth = taxonomy.TaxonomyMap(
        taxonomy.MANUAL, {t: (m,) for t, m in corpus.mapping.items()},
        provenance=f"synthetic ground truth, seed={args.seed}")
    taxonomy.write_map_tsv(truth, paths["map_file"])
    config = ExperimentConfig({
        **paths, "out_dir": os.path.join(args.out_dir, "runs"),
        "seed": str(args.seed),
    })
    config_path = os.path.join(args.out_dir, "experiment.config")
    config.write(config_path)
    print(f"wrote {len(corpus.text)} text / {len(corpus.music)} music records "
          f"to {args.out_dir}")
    print(f"starter config: {config_path}")
    return 0


def cmd_ingest(args):
    table = load_features(args.features, expected_dim=args.expected_dim)
    counts = {}
    for rec in table:
        counts[rec.tag] = counts.get(rec.tag, 0) + 1
    print(f"{args.features}: {len(table)} records, modality={table.modality}, "
          f"dim={table.dim}")
    for tag in sorted(counts):
        print(f"  {tag}\t{counts[tag]}")
    if args.out:
        write_features(table, args.out)
        print(f"normalized copy: {args.out}")
    return 0


def _vocab_from_arg(arg, modality):
    if os.path.exists(arg):
        return Vocabulary.from_table(load_features(arg))
    return Vocabulary.from_tags(modality, [t for t in arg.split(",") if t.strip()])


def cmd_map_taxonomy(args):
    scheme = args.scheme.upper()
    if scheme == taxonomy.MANUAL:
        if args.dataset:
            tax_map = taxonomy.manual_map(args.dataset)
        elif args.map_file:
            tax_map = taxonomy.read_map_tsv(args.map_file)
        else:
            raise ConfigError("manual scheme needs --dataset or --map-file")
    else:
        if not args.text_vocab or not args.music_vocab:
            raise ConfigError(f"{args.scheme} scheme needs --text-vocab and --music-vocab")
        text_vocab = _vocab_from_arg(args.text_vocab, TEXT)
        music_vocab = _vocab_from_arg(args.music_vocab, MUSIC)
        if scheme == taxonomy.VA:
            if not args.lexicon:
                raise ConfigError("va scheme needs --lexicon")
            tax_map = taxonomy.map_va(text_vocab, music_vocab,
                                      load_vad_lexicon(args.lexicon))
        else:
            if not args.embeddings:
                raise ConfigError("w2v scheme needs --embeddings")
            tax_map = taxonomy.map_w2v(text_vocab, music_vocab,
                                       load_word_embeddings(args.embeddings))
    sys.stdout.write(f"# provenance: {tax_map.provenance}\n")
    for tag, targets in tax_map.map.items():
        sys.stdout.write(f"{tax_map.scheme}\t{tag}\t{','.join(targets)}\n")
    if args.diff_table2 and scheme == taxonomy.VA:
        diffs = taxonomy.va_diff_report(load_vad_lexicon(args.lexicon))
        sys.stdout.write("# published-table diff: "
                         + ("none" if not diffs else "; ".join(diffs)) + "\n")
    return 0


def cmd_train(args):
    config = ExperimentConfig.from_file(args.config)
    ckpt, log_path = run_training(config, quiet=not args.verbose)
    print(f"checkpoint: {ckpt}")
    print(f"log: {log_path}")
    return 0


def cmd_eval(args):
    config = ExperimentConfig.from_file(args.config)
    report = evaluate_checkpoint(config, args.checkpoint, scheme=args.scheme)
    out = args.out or os.path.join(
        config.out_dir, f"{report.kind}.{report.scheme.lower()}.report.json")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    print(f"macro P@5 = {report.macro_p5:.4f}  macro MRR = {report.macro_mrr:.4f} "
          f"({report.kind}, scheme {report.scheme})")
    print(f"report: {out}")
    return 0


def cmd_suite(args):
    base = ExperimentConfig.from_file(args.config)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    configs = [base.with_overrides(strategy=s) for s in strategies]
    schemes = [s.strip() for s in args.schemes.split(",")] if args.schemes else None
    names, rows = run_suite(configs, schemes, quiet=not args.verbose)
    table = suite_table(names, rows, digest=base.digest())
    os.makedirs(base.out_dir, exist_ok=True)
    out = args.out or os.path.join(base.out_dir, "suite.tsv")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(table)
    sys.stdout.write(table)
    print(f"grid: {out}")
    return 0


def cmd_retrieve(args):
    params, strategy, _meta = models.load_checkpoint(args.model)
    music = load_features(args.features)
    if args.query_id and args.query_text_file:
        raise ConfigError("use --query-id or --query-text-file, not both")
    if args.query_id:
        queries = [music[args.query_id]]
    elif args.query_text_file:
        queries = list(load_features(args.query_text_file))
    else:
        raise ConfigError("need --query-id or --query-text-file")

    print("rank\tmusic_id\tdistance\ttag")
    if strategy.kind in models.CLASSIFIER_KINDS:
        for q in queries:
            ranked = models.rank_by_classification(
                params, strategy, q, music, with_scores=True)
            for rank, (rec_id, score) in enumerate(ranked[:args.k], start=1):
                print(f"{rank}\t{rec_id}\t{1.0 - score:.6f}\t{music[rec_id].tag}")
    else:
        index = evaluation.music_index(params, strategy, music)
        for q in queries:
            emb = models.embed(params, strategy, q)
            result = nn_query(index, emb, args.k, q.id)
            for rank, (rec_id, dist) in enumerate(result.hits, start=1):
                print(f"{rank}\t{rec_id}\t{dist:.6f}\t{music[rec_id].tag}")
    return 0


def cmd_project(args):
    params, strategy, meta = models.load_checkpoint(args.model)
    text = load_features(args.text_features)
    music = load_features(args.music_features)
    fit_table, other_table = (music, text) if args.fit == "music" else (text, music)
    fit_ids, _, fit_matrix, _ = models.embed_many(params, strategy, fit_table)
    other_ids, _, other_matrix, _ = models.embed_many(params, strategy, other_table)
    others = [(rid, other_table.modality, row)
              for rid, row in zip(other_ids, other_matrix)]
    if strategy.kind == models.METRIC_3BRANCH and args.embeddings:
        embeddings = load_word_embeddings(args.embeddings)
        tags = dict.fromkeys(list(text.tags()) + list(music.tags()))
        for tag in tags:
            emb = models.embed_tag(params, strategy, tag, embeddings)
            others.append((tag, "TAG", emb.values))
    export = evaluation.pca_project(
        list(zip(fit_ids, fit_matrix)), others, fit_kind=fit_table.modality)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(f"# config_digest: {meta.get('config_digest', '')}\n")
        fh.write(export.to_csv())
    if args.raw_out:
        with open(args.raw_out, "w", encoding="utf-8") as fh:
            fh.write("id\tkind\tembedding\n")
            for rid, row in zip(fit_ids, fit_matrix):
                fh.write(f"{rid}\t{fit_table.modality}\t"
                         + ",".join(repr(float(v)) for v in row) + "\n")
            for rid, kind, vec in others:
                fh.write(f"{rid}\t{kind}\t"
                         + ",".join(repr(float(v)) for v in np.asarray(vec)) + "\n")
    print(f"projection: {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="moodbridge",
        description="Emotion-bridged text-to-music retrieval experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--cluster-std", type=float, default=0.05)
    p.add_argument("--per-text-tag", type=int, default=400)
    p.add_argument("--per-music-tag", type=int, default=286)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a feature interchange file")
    p.add_argument("--features", required=True)
    p.add_argument("--expected-dim", type=int, default=None)
    p.add_argument("--out", default=None, help="write a normalized copy here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("map-taxonomy", help="print a tag mapping as TSV")
    p.add_argument("--scheme", required=True, choices=["va", "w2v", "manual"])
    p.add_argument("--text-vocab", help="comma list of tags or a feature file")
    p.add_argument("--music-vocab", help="comma list of tags or a feature file")
    p.add_argument("--lexicon")
    p.add_argument("--embeddings")
    p.add_argument("--dataset", choices=["alm", "isear"])
    p.add_argument("--map-file")
    p.add_argument("--diff-table2", action="store_true",
                   help="also diff the VA map against the published table")
    p.set_defaults(func=cmd_map_taxonomy)

    p = sub.add_parser("train", help="train one strategy from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a trained checkpoint")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--scheme", choices=["va", "w2v", "manual"], default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("suite", help="train + score several strategies")
    p.add_argument("--config", required=True)
    p.add_argument("--strategies", default=",".join(models.ALL_KINDS))
    p.add_argument("--schemes", default=None, help="comma list: va,w2v,manual")
    p.add_argument("--out", default=None)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("retrieve", help="ranked music for a query")
    p.add_argument("--model", required=True, help="checkpoint path")
    p.add_argument("--features", required=True, help="music feature file")
    p.add_argument("--query-id", default=None,
                   help="music record id to use as the query")
    p.add_argument("--query-text-file", default=None,
                   help="pre-featurized text records to query with")
    p.add_argument("--k", type=int, default=5)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("project", help="export a 2-D PCA of the embedding space")
    p.add_argument("--model", required=True)
    p.add_argument("--text-features", required=True)
    p.add_argument("--music-features", required=True)
    p.add_argument("--embeddings", default=None,
                   help="word embeddings (adds TAG rows for 3-branch models)")
    p.add_argument("--fit", choices=["music", "text"], default="music")
    p.add_argument("--out", required=True)
    p.add_argument("--raw-out", default=None,
                   help="also dump raw high-dimensional embeddings as TSV")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NumericError as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return 4
    except (DataError, ShapeError, MoodBridgeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
