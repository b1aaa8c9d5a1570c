"""Command-line pipeline: build, refine, tagbook, detect, eval, describe, synth.

Every command is a thin wrapper over the library; rerunning a command on the
same inputs rewrites byte-identical outputs. Errors exit nonzero with a
single-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from .config import REDUCTION_METHODS, resolve_config
from .corpus import (
    TagVocabulary,
    load_corpus,
    load_corpus_dir,
    read_feature_file,
    save_corpus,
)
from .errors import FormatError, IntegrityError, TagbookError
from .events import (
    LabeledSet,
    RankedList,
    rank_videos,
    read_event_definitions,
    read_judgments,
    save_model,
    train_few_example,
    zero_example_model,
)
from .evaluation import (
    Description,
    GroundTruth,
    average_precision,
    describe_video,
    rouge1_recall,
    write_report,
    write_rouge_curve,
)
from .fileio import atomic_write_text, iter_jsonl, write_json, write_jsonl
from .propagation import (
    HARD_PRIOR_MODES,
    VARIANTS,
    PropagationConfig,
    propagate_batch,
    refine_source,
    save_relevance,
)
from .reduction import pca_fit, pca_project, project_vocabulary, save_pca, select_frequent
from .synth import SynthSpec, synth_corpus

_SAFE_ID = re.compile(r"^[A-Za-z0-9._-]+$")


def _say(args, message: str) -> None:
    if not getattr(args, "quiet", False):
        print(message)


def _check_event_id(event_id: str) -> str:
    if not _SAFE_ID.match(event_id):
        raise ValueError(f"event id {event_id!r} is not filename-safe")
    return event_id


# -- TagVectors file -------------------------------------------------------


def write_tagbooks(path, header: dict, vectors) -> None:
    """Write a TagVectors file: a header line, then one {"id", "vector"} per video."""
    records = [header]
    records += [{"id": video_id, "vector": [float(x) for x in vector]}
                for video_id, vector in vectors]
    write_jsonl(path, records)


def read_tagbooks(path):
    """Read a TagVectors file into (header, [(id, vector), ...])."""
    header = None
    vectors = []
    seen = set()
    for line_no, record in iter_jsonl(path):
        if header is None:
            if "id" in record or "m" not in record:
                raise FormatError(path, line_no, "first line must be the header object")
            header = record
            continue
        video_id = record.get("id")
        if not isinstance(video_id, str) or not video_id:
            raise FormatError(path, line_no, "missing or empty 'id'")
        if video_id in seen:
            raise FormatError(path, line_no, f"duplicate video id {video_id!r}")
        raw = record.get("vector")
        if not isinstance(raw, list) or len(raw) != header["m"]:
            raise FormatError(path, line_no, f"'vector' must hold {header['m']} numbers")
        seen.add(video_id)
        vectors.append((video_id, np.asarray(raw, dtype=np.float64)))
    if header is None:
        raise FormatError(path, 0, "empty TagVectors file")
    return header, vectors


def _ranking_path(out_dir: Path, event_id: str) -> Path:
    return out_dir / "rankings" / f"{event_id}.tsv"


def write_ranking(path, ranked: RankedList) -> None:
    lines = [f"{video_id}\t{score!r}" for video_id, score in ranked.entries]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_ranking(path) -> RankedList:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(path, line_no, "expected 'video_id<TAB>score'")
            try:
                entries.append((parts[0], float(parts[1])))
            except ValueError:
                raise FormatError(path, line_no, f"bad score {parts[1]!r}") from None
    return RankedList(entries=tuple(entries))


# -- subcommands -----------------------------------------------------------


def cmd_build(args) -> None:
    cfg = resolve_config(args.config, {"min_df": args.min_df, "stoplist": args.stoplist})
    corpus = load_corpus(args.features, args.annotations,
                         stoplist_file=cfg.stoplist, min_df=cfg.min_df)
    save_corpus(corpus, args.out)
    _say(args, f"built corpus: {corpus.n_videos} videos, dim {corpus.dim}, "
               f"{corpus.vocabulary.m} tags -> {args.out}")


def cmd_refine(args) -> None:
    cfg = resolve_config(args.config, {"k_r": args.k_r})
    corpus_dir = Path(args.corpus)
    corpus = load_corpus_dir(corpus_dir)
    config = PropagationConfig(variant="refine", k=cfg.propagation.k, k_r=cfg.propagation.k_r)
    matrix = refine_source(corpus, config)
    save_relevance(matrix, corpus, corpus_dir / "relevance.tbrm")
    _say(args, f"refined {corpus.n_videos} source videos with k_r={config.k_r} "
               f"-> {corpus_dir / 'relevance.tbrm'}")


def _reduce_vectors(args, cfg, corpus, vectors):
    """Apply the configured reduction; returns (tag axis names or None, vectors, info)."""
    method = cfg.reduction
    if method == "none":
        return list(corpus.vocabulary.tags), vectors, {"method": "none"}
    if method == "frequent":
        reduced = select_frequent(corpus, cfg.reduction_size)
        projected = [(vid, project_vocabulary(vec, reduced)) for vid, vec in vectors]
        return list(reduced.tags), projected, {"method": "frequent", "size": reduced.m}
    model = pca_fit([vec for _, vec in vectors], cfg.reduction_size)
    if args.pca_out:
        save_pca(model, args.pca_out, vocab_hash=corpus.vocabulary.hash)
    projected = [(vid, pca_project(vec, model)) for vid, vec in vectors]
    return None, projected, {"method": "pca", "size": model.m_reduced}


def cmd_tagbook(args) -> None:
    cfg = resolve_config(args.config, {
        "variant": args.variant,
        "k": args.k,
        "hard_prior_mode": args.hard_prior_mode,
        "reduction": args.reduction,
        "reduction_size": args.reduction_size,
        "threads": args.threads,
    })
    corpus = load_corpus_dir(args.corpus)
    ids, features = read_feature_file(args.features)
    vectors = propagate_batch(corpus, list(zip(ids, features)),
                              cfg.propagation, threads=cfg.threads)
    tags, vectors, reduction_info = _reduce_vectors(args, cfg, corpus, vectors)
    header = {
        "m": len(vectors[0][1]) if vectors else corpus.vocabulary.m,
        "vocab_hash": corpus.vocabulary.hash,
        "tags": tags,
        "variant": cfg.propagation.variant,
        "k": cfg.propagation.k,
        "hard_prior_mode": cfg.propagation.hard_prior_mode,
        "reduction": reduction_info,
    }
    write_tagbooks(args.out, header, vectors)
    _say(args, f"propagated {len(vectors)} videos ({cfg.propagation.variant}, "
               f"k={cfg.propagation.k}) -> {args.out}")


def _tagbook_axes(header) -> TagVocabulary:
    if header.get("tags") is None:
        raise ValueError("these tag vectors have no tag axes (PCA-reduced); "
                         "zero-example detection and description need tag axes")
    return TagVocabulary(header["tags"])


def cmd_detect(args) -> None:
    cfg = resolve_config(args.config, {
        "svm_lambda": args.svm_lambda,
        "svm_epochs": args.svm_epochs,
        "svm_seed": args.svm_seed,
    })
    corpus = load_corpus_dir(args.corpus)
    header, vectors = read_tagbooks(args.tagbooks)
    if header.get("vocab_hash") != corpus.vocabulary.hash:
        raise IntegrityError("tag vectors were built against a different corpus")
    events = read_event_definitions(args.events)
    judgments = read_judgments(args.judgments) if args.judgments else {}
    if args.mode == "few" and not args.judgments:
        raise ValueError("few-example detection requires --judgments")
    by_id = dict(vectors)
    out_dir = Path(args.out)
    per_event = {}
    for event in events:
        event_id = _check_event_id(event["event_id"])
        labels = judgments.get(event_id, {})
        training_ids = {vid for vid, label in labels.items() if label != 0}
        if args.mode == "zero":
            model = zero_example_model(event_id, event["description"],
                                       _tagbook_axes(header), corpus.stoplist)
        else:
            samples = []
            for video_id in sorted(labels):
                label = labels[video_id]
                if label == 0:
                    continue
                if video_id not in by_id:
                    raise ValueError(
                        f"event {event_id!r}: labeled video {video_id!r} has no tag vector"
                    )
                samples.append((video_id, by_id[video_id], label))
            model = train_few_example(event_id, LabeledSet(samples=tuple(samples)), cfg.svm)
        if args.include_training:
            pool = vectors
        else:
            pool = [(vid, vec) for vid, vec in vectors if vid not in training_ids]
        ranked = rank_videos(pool, model)
        save_model(model, out_dir / "models" / f"{event_id}.json", corpus.vocabulary)
        write_ranking(_ranking_path(out_dir, event_id), ranked)
        per_event[event_id] = len(ranked)
    write_json(out_dir / "report.json", {
        "format": "tagbook-detect-report",
        "version": 1,
        "mode": args.mode,
        "events": sorted(per_event),
        "ranked_counts": per_event,
        "include_training": bool(args.include_training),
    })
    _say(args, f"detected {len(per_event)} events ({args.mode}) -> {out_dir}")


def _truths_from_judgments(labels_by_event) -> dict[str, GroundTruth]:
    truths = {}
    for event_id, labels in labels_by_event.items():
        judged = frozenset(vid for vid, label in labels.items() if label != 0)
        positives = frozenset(vid for vid, label in labels.items() if label == 1)
        truths[event_id] = GroundTruth(event_id=event_id, positives=positives, judged=judged)
    return truths


def cmd_eval(args) -> None:
    rankings_dir = Path(args.rankings)
    paths = sorted(rankings_dir.glob("*.tsv"))
    if not paths:
        raise ValueError(f"no .tsv rankings found in {rankings_dir}")
    truths = _truths_from_judgments(read_judgments(args.judgments))
    per_event = {}
    skipped = []
    for path in paths:
        event_id = path.stem
        truth = truths.get(event_id)
        if truth is None or not truth.positives:
            skipped.append(event_id)
            continue
        per_event[event_id] = average_precision(read_ranking(path), truth,
                                                unjudged=args.unjudged)
    if not per_event:
        raise ValueError("no ranking has judged positives; nothing to evaluate")
    for event_id in skipped:
        print(f"warning: skipping {event_id!r}: no judged positives", file=sys.stderr)
    write_report(args.out, per_event, tsv_path=args.per_event_tsv)
    overall = sum(per_event.values()) / len(per_event)
    _say(args, f"evaluated {len(per_event)} events, MAP {overall:.4f} -> {args.out}")


def cmd_describe(args) -> None:
    cfg = resolve_config(args.config, {"kappa": args.kappa, "stoplist": args.stoplist})
    header, vectors = read_tagbooks(args.tagbooks)
    vocabulary = _tagbook_axes(header)
    top_k = min(cfg.kappa, vocabulary.m)
    out_dir = Path(args.out)
    descriptions = [describe_video(vec, vocabulary, top_k, video_id=vid)
                    for vid, vec in vectors]
    write_jsonl(out_dir / "descriptions.jsonl",
                [{"id": d.video, "tags": list(d.tags)} for d in descriptions])
    _say(args, f"described {len(descriptions)} videos (top {top_k} tags) -> {out_dir}")
    if not args.references:
        return
    stoplist = frozenset()
    if cfg.stoplist:
        from .corpus import load_stoplist

        stoplist = load_stoplist(cfg.stoplist)
    references = {}
    for line_no, record in iter_jsonl(args.references):
        if "id" not in record or "caption" not in record:
            raise FormatError(args.references, line_no, "expected {'id', 'caption'}")
        references[record["id"]] = record["caption"]
    with_refs = [d for d in descriptions if d.video in references]
    if not with_refs:
        raise ValueError("no reference caption matches any described video")
    rows = []
    for kappa in range(1, top_k + 1):
        # Top-k nesting lets the smaller descriptions be read off as prefixes.
        recalls = [
            rouge1_recall(Description(video=d.video, tags=d.tags[:kappa]),
                          references[d.video], stoplist)
            for d in with_refs
        ]
        rows.append((kappa, sum(recalls) / len(recalls)))
    write_rouge_curve(out_dir / "rouge.tsv", rows)
    _say(args, f"ROUGE-1 curve over {len(with_refs)} referenced videos -> "
               f"{out_dir / 'rouge.tsv'}")


def cmd_synth(args) -> None:
    spec = SynthSpec(
        n_events=args.events,
        videos_per_event=args.videos_per_event,
        n_background=args.background,
        dim=args.dim,
        vocab_size=args.tags,
        tag_noise=args.tag_noise,
        feature_noise=args.feature_noise,
        seed=args.seed if args.seed is not None else 0,
        signature_size=args.signature_size,
        test_videos_per_event=args.test_videos_per_event,
    )
    if not 1 <= args.train_positives < spec.test_count:
        raise ValueError("--train-positives must leave at least one positive for evaluation")
    data = synth_corpus(spec)
    corpus = data.corpus
    out_dir = Path(args.out)

    def feature_records(pairs):
        rows = [{"dim": spec.dim}]
        rows += [{"id": vid, "feature": [float(x) for x in vec]} for vid, vec in pairs]
        return rows

    write_jsonl(out_dir / "source_features.jsonl",
                feature_records(zip(corpus.ids, corpus.features)))
    write_jsonl(out_dir / "source_annotations.jsonl",
                [{"id": a.video, "tags": sorted(a.tags)} for a in corpus.annotations])
    write_jsonl(out_dir / "test_features.jsonl", feature_records(data.test_videos))
    write_jsonl(out_dir / "events.jsonl",
                [{"event_id": eid, "name": eid, "description": data.descriptions[eid]}
                 for eid in sorted(data.descriptions)])

    # Few-example training split: the first positives of each event by id order,
    # negatives round-robin across the other events' test videos.
    positives_by_event = {t.event_id: sorted(t.positives) for t in data.truths}
    event_ids = sorted(positives_by_event)
    train_rows = []
    train_ids_by_event = {}
    for event_id in event_ids:
        chosen_pos = positives_by_event[event_id][:args.train_positives]
        negatives = []
        j = 0
        while len(negatives) < args.train_negatives:
            grew = False
            for other in event_ids:
                if other == event_id:
                    continue
                pool = positives_by_event[other]
                if j < len(pool):
                    negatives.append(pool[j])
                    grew = True
                    if len(negatives) == args.train_negatives:
                        break
            if not grew:
                break
            j += 1
        train_ids_by_event[event_id] = set(chosen_pos) | set(negatives)
        train_rows += [{"event_id": event_id, "video_id": vid, "label": 1}
                       for vid in chosen_pos]
        train_rows += [{"event_id": event_id, "video_id": vid, "label": -1}
                       for vid in negatives]
    write_jsonl(out_dir / "few_labels.jsonl", train_rows)

    all_test_ids = sorted(vid for vid, _ in data.test_videos)
    judgment_rows = []
    for event_id in event_ids:
        positives = set(positives_by_event[event_id])
        excluded = train_ids_by_event[event_id]
        for vid in all_test_ids:
            if vid in excluded:
                continue
            judgment_rows.append({
                "event_id": event_id,
                "video_id": vid,
                "label": 1 if vid in positives else -1,
            })
    write_jsonl(out_dir / "judgments.jsonl", judgment_rows)
    _say(args, f"synthesized {corpus.n_videos} source + {len(data.test_videos)} test "
               f"videos, {spec.n_events} events -> {out_dir}")


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tagbook",
        description="Tag-propagation video representations and event detection.",
    )
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--seed", type=int, help="seed override for commands that sample")
    parser.add_argument("--threads", type=int, help="worker threads for batch propagation")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("build", help="build and persist a source corpus")
    p.add_argument("--features", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--stoplist")
    p.add_argument("--min-df", dest="min_df", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("refine", help="precompute refined tag relevance for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--k-r", dest="k_r", type=int)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("tagbook", help="propagate tag vectors for test features")
    p.add_argument("--corpus", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--variant", choices=VARIANTS, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--hard-prior-mode", dest="hard_prior_mode", choices=HARD_PRIOR_MODES)
    p.add_argument("--reduction", choices=REDUCTION_METHODS)
    p.add_argument("--reduction-size", dest="reduction_size", type=int)
    p.add_argument("--pca-out", dest="pca_out", help="where to persist a fitted PCA model")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tagbook)

    p = sub.add_parser("detect", help="build event models and rank test videos")
    p.add_argument("--corpus", required=True)
    p.add_argument("--tagbooks", required=True)
    p.add_argument("--events", required=True)
    p.add_argument("--judgments", help="training labels; required for few mode")
    p.add_argument("--mode", choices=("zero", "few"), required=True)
    p.add_argument("--include-training", dest="include_training", action="store_true",
                   help="keep labeled training videos in the rankings")
    p.add_argument("--svm-lambda", dest="svm_lambda", type=float)
    p.add_argument("--svm-epochs", dest="svm_epochs", type=int)
    p.add_argument("--svm-seed", dest="svm_seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="score rankings against judgments (AP / MAP)")
    p.add_argument("--rankings", required=True, help="directory of <event_id>.tsv files")
    p.add_argument("--judgments", required=True)
    p.add_argument("--unjudged", choices=("negative", "exclude"), default="negative")
    p.add_argument("--per-event-tsv", dest="per_event_tsv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("describe", help="emit top-k tags per video, optionally with ROUGE-1")
    p.add_argument("--tagbooks", required=True)
    p.add_argument("--kappa", type=int)
    p.add_argument("--references", help="JSON Lines of {'id', 'caption'}")
    p.add_argument("--stoplist")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("synth", help="generate a synthetic planted-event dataset")
    p.add_argument("--events", type=int, default=10)
    p.add_argument("--videos-per-event", dest="videos_per_event", type=int, default=30)
    p.add_argument("--background", type=int, default=2000)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--tags", type=int, default=400)
    p.add_argument("--tag-noise", dest="tag_noise", type=float, default=0.3)
    p.add_argument("--feature-noise", dest="feature_noise", type=float, default=0.5)
    p.add_argument("--signature-size", dest="signature_size", type=int, default=5)
    p.add_argument("--test-videos-per-event", dest="test_videos_per_event", type=int)
    p.add_argument("--train-positives", dest="train_positives", type=int, default=10)
    p.add_argument("--train-negatives", dest="train_negatives", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 2
    try:
        if args.config:
            resolve_config(args.config)  # reject a bad config before any work starts
        args.func(args)
    except (TagbookError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
