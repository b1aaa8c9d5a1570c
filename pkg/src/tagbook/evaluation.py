"""Ranking metrics and description quality: AP, MAP, top-k tags, ROUGE-1 recall."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import TagVocabulary, tokenize_caption
from .errors import DimensionMismatch, EmptyInput, EmptyReference, NoPositives
from .events import RankedList
from .fileio import atomic_write_text, write_json


@dataclass(frozen=True)
class GroundTruth:
    """Per-event relevance labels: the positive ids, and which ids were judged at all."""

    event_id: str
    positives: frozenset[str]
    judged: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "positives", frozenset(self.positives))
        object.__setattr__(self, "judged", frozenset(self.judged))
        if self.judged and not self.positives <= self.judged:
            raise ValueError("positives must be a subset of the judged set")


@dataclass(frozen=True)
class Description:
    """The top tags generated for one video, most relevant first."""

    video: str
    tags: tuple[str, ...]


def average_precision(ranked: RankedList, truth: GroundTruth, *,
                      unjudged: str = "negative") -> float:
    """Non-interpolated average precision of a ranking against binary relevance.

    Unjudged videos (outside ``truth.judged`` when that set is non-empty) count
    as negatives by default; pass ``unjudged="exclude"`` to drop them from the
    ranking instead.
    """
    if unjudged not in ("negative", "exclude"):
        raise ValueError("unjudged must be 'negative' or 'exclude'")
    if not truth.positives:
        raise NoPositives(f"event {truth.event_id!r} has no positive videos")
    entries = ranked.entries
    if truth.judged and unjudged == "exclude":
        entries = tuple(e for e in entries if e[0] in truth.judged)
    ranked_ids = {video_id for video_id, _ in entries}
    missing = truth.positives - ranked_ids
    if missing:
        raise ValueError(
            f"event {truth.event_id!r}: {len(missing)} positive video(s) missing "
            f"from the ranking, e.g. {sorted(missing)[0]!r}"
        )
    hits = 0
    total = 0.0
    for rank, (video_id, _) in enumerate(entries, start=1):
        if video_id in truth.positives:
            hits += 1
            total += hits / rank
    return total / len(truth.positives)


def mean_average_precision(values) -> float:
    """Arithmetic mean of per-event average precisions."""
    values = list(values)
    if not values:
        raise EmptyInput("cannot average an empty list of AP values")
    return math.fsum(values) / len(values)


def describe_video(vector, vocabulary: TagVocabulary, top_k: int,
                   video_id: str = "") -> Description:
    """The ``top_k`` tags with the highest tag-vector values, ties by ascending tag.

    The output at one ``top_k`` is always a prefix of the output at a larger one.
    """
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != vocabulary.m:
        raise DimensionMismatch(
            f"vector shape {vector.shape} does not match vocabulary size {vocabulary.m}"
        )
    order = sorted(range(vocabulary.m), key=lambda i: (-vector[i], vocabulary.tags[i]))
    kept = order[:top_k]
    return Description(video=video_id, tags=tuple(vocabulary.tags[i] for i in kept))


def rouge1_recall(generated: Description, reference_text: str, stoplist=frozenset()) -> float:
    """Fraction of unique reference tokens recovered among the generated tags.

    The reference is tokenized with the corpus tokenizer and the same stoplist,
    and both sides are treated as sets, so the value is monotone in the number
    of generated tags.
    """
    reference = set(tokenize_caption(reference_text, stoplist))
    if not reference:
        raise EmptyReference("reference description tokenizes to nothing")
    return len(reference & set(generated.tags)) / len(reference)


def write_report(path, per_event: dict[str, float], tsv_path=None) -> None:
    """Evaluation report: one object keyed by event id plus the overall ``map``."""
    if "map" in per_event:
        raise ValueError("'map' cannot be used as an event id in a report")
    report = {event_id: {"ap": float(ap)} for event_id, ap in per_event.items()}
    report["map"] = mean_average_precision(per_event.values())
    write_json(Path(path), report)
    if tsv_path is not None:
        lines = ["event_id\tap"]
        lines += [f"{event_id}\t{float(ap)!r}" for event_id, ap in sorted(per_event.items())]
        atomic_write_text(Path(tsv_path), "\n".join(lines) + "\n")


def write_rouge_curve(path, rows) -> None:
    """TSV of (top-k size, mean ROUGE-1 recall) pairs, ready for plotting."""
    lines = ["kappa\tmean_rouge1_recall"]
    lines += [f"{int(k)}\t{float(recall)!r}" for k, recall in rows]
    atomic_write_text(Path(path), "\n".join(lines) + "\n")
