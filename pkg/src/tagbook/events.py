"""Event models and relevance ranking for zero- and few-example detection.

A zero-example event model is the bag-of-words indicator of an event description
over the tag vocabulary. A few-example model is the primal weight vector of a
linear SVM trained on labeled tag vectors, which by the representer property is
a weighted combination of the training samples. Either way, a test video is
scored by the cosine between its tag vector and the event's.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import TagVocabulary, tokenize_caption
from .errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyModel,
    FormatError,
    IntegrityError,
)
from .fileio import iter_jsonl, read_json, write_json
from .similarity import cosine_similarity


@dataclass(frozen=True)
class EventModel:
    """An event's tag vector plus how it was obtained (``zero`` or ``few``)."""

    event_id: str
    vector: np.ndarray
    mode: str
    training_meta: dict | None = None

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float64)
        if vector.ndim != 1:
            raise DimensionMismatch("event vector must be one-dimensional")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)
        if self.mode not in ("zero", "few"):
            raise ValueError(f"mode must be 'zero' or 'few', got {self.mode!r}")


@dataclass(frozen=True)
class LabeledSet:
    """Labeled (video id, tag vector, +1/-1) samples for one event."""

    samples: tuple[tuple[str, np.ndarray, int], ...]

    def __post_init__(self):
        samples = []
        for video_id, vector, label in self.samples:
            if label not in (1, -1):
                raise ValueError(f"label of {video_id!r} must be +1 or -1, got {label!r}")
            samples.append((str(video_id), np.asarray(vector, dtype=np.float64), int(label)))
        object.__setattr__(self, "samples", tuple(samples))

    @property
    def p(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class RankedList:
    """Videos ordered by descending score, ties broken by ascending video id."""

    entries: tuple[tuple[str, float], ...]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(video_id for video_id, _ in self.entries)


@dataclass(frozen=True)
class SvmConfig:
    """Hyperparameters for the stochastic subgradient linear SVM.

    The solver takes one uniformly drawn sample per step with step size
    1 / (regularization * step), hinge loss, L2 regularization and no bias term.
    ``track_objective`` records the epoch-averaged regularized objective in the
    model's training metadata (costs one full objective evaluation per step).
    """

    regularization: float = 1e-4
    epochs: int = 100
    seed: int = 0
    normalize_inputs: bool = False
    track_objective: bool = True

    def __post_init__(self):
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")


def zero_example_model(event_id: str, description: str, vocabulary: TagVocabulary,
                       stoplist=frozenset()) -> EventModel:
    """Binary tag vector of an event description: 1 where a description token is a tag."""
    tokens = tokenize_caption(description, stoplist)
    vector = np.zeros(vocabulary.m, dtype=np.float64)
    hits = 0
    for token in tokens:
        index = vocabulary.index.get(token)
        if index is not None:
            vector[index] = 1.0
            hits += 1
    if hits == 0:
        raise EmptyModel(
            f"event {event_id!r}: no description token is in the vocabulary"
        )
    return EventModel(event_id=event_id, vector=vector, mode="zero")


def _objective(weights, x, y, regularization) -> float:
    hinge = np.maximum(0.0, 1.0 - y * (x @ weights))
    return 0.5 * regularization * float(weights @ weights) + float(hinge.mean())


def train_few_example(event_id: str, data: LabeledSet, hyper: SvmConfig = SvmConfig()) -> EventModel:
    """Train a linear SVM on labeled tag vectors; the model vector is the primal w.

    Deterministic given (sample order, hyperparameters, seed). Training metadata
    records the hyperparameters, the step count, and, when tracked, the mean
    regularized hinge objective per epoch.
    """
    if data.p == 0:
        raise DegenerateData("labeled set is empty")
    labels = np.array([label for _, _, label in data.samples], dtype=np.float64)
    if np.all(labels > 0) or np.all(labels < 0):
        raise DegenerateData("training needs at least one positive and one negative sample")
    dims = {vector.shape for _, vector, _ in data.samples}
    if len(dims) != 1 or data.samples[0][1].ndim != 1:
        raise DimensionMismatch(f"tag vectors have inconsistent shapes: {sorted(dims)}")
    x = np.vstack([vector for _, vector, _ in data.samples])
    if hyper.normalize_inputs:
        norms = np.linalg.norm(x, axis=1)
        nonzero = norms > 0
        x = x.copy()
        x[nonzero] /= norms[nonzero, None]

    p, m = x.shape
    lam = hyper.regularization
    rng = np.random.default_rng(hyper.seed)
    total_steps = hyper.epochs * p
    picks = rng.integers(0, p, size=total_steps)
    weights = np.zeros(m, dtype=np.float64)
    epoch_objectives = []
    step = 0
    for epoch in range(hyper.epochs):
        epoch_sum = 0.0
        for _ in range(p):
            i = picks[step]
            step += 1
            eta = 1.0 / (lam * step)
            margin = labels[i] * float(x[i] @ weights)
            weights *= 1.0 - eta * lam
            if margin < 1.0:
                weights += (eta * labels[i]) * x[i]
            if hyper.track_objective:
                epoch_sum += _objective(weights, x, labels, lam)
        if hyper.track_objective:
            epoch_objectives.append(epoch_sum / p)

    meta = {
        "regularization": lam,
        "epochs": hyper.epochs,
        "seed": hyper.seed,
        "normalize_inputs": hyper.normalize_inputs,
        "steps": total_steps,
        "p": p,
    }
    if hyper.track_objective:
        meta["epoch_objectives"] = epoch_objectives
    return EventModel(event_id=event_id, vector=weights, mode="few", training_meta=meta)


def score(video_vector, model: EventModel) -> float:
    """Relevance of a video to an event: cosine between the two tag vectors."""
    return cosine_similarity(video_vector, model.vector)


def rank_videos(test, model: EventModel) -> RankedList:
    """Score and sort test ``(video_id, tag_vector)`` pairs, most relevant first."""
    scored = [(video_id, score(vector, model)) for video_id, vector in test]
    scored.sort(key=lambda entry: (-entry[1], entry[0]))
    return RankedList(entries=tuple(scored))


def read_event_definitions(path) -> list[dict]:
    """Read event definitions: JSON Lines of ``{"event_id", "name", "description"}``."""
    events = []
    seen = set()
    for line_no, record in iter_jsonl(path):
        event_id = record.get("event_id")
        if not isinstance(event_id, str) or not event_id:
            raise FormatError(path, line_no, "missing or empty 'event_id'")
        if event_id in seen:
            raise FormatError(path, line_no, f"duplicate event id {event_id!r}")
        if not isinstance(record.get("description"), str):
            raise FormatError(path, line_no, "missing 'description'")
        seen.add(event_id)
        events.append({
            "event_id": event_id,
            "name": record.get("name", event_id),
            "description": record["description"],
        })
    return events


def read_judgments(path) -> dict[str, dict[str, int]]:
    """Read judgments: JSON Lines of ``{"event_id", "video_id", "label": 1|-1|0}``.

    Returns labels nested by event then video. A label of 0 marks a judged-as-
    unjudged video: such videos never enter a labeled training set.
    """
    labels: dict[str, dict[str, int]] = {}
    for line_no, record in iter_jsonl(path):
        event_id = record.get("event_id")
        video_id = record.get("video_id")
        label = record.get("label")
        if not isinstance(event_id, str) or not event_id:
            raise FormatError(path, line_no, "missing or empty 'event_id'")
        if not isinstance(video_id, str) or not video_id:
            raise FormatError(path, line_no, "missing or empty 'video_id'")
        if label not in (1, -1, 0):
            raise FormatError(path, line_no, f"label must be 1, -1 or 0, got {label!r}")
        per_event = labels.setdefault(event_id, {})
        if video_id in per_event:
            raise FormatError(path, line_no,
                              f"duplicate judgment for {event_id!r}/{video_id!r}")
        per_event[video_id] = label
    return labels


def save_model(model: EventModel, path, vocabulary: TagVocabulary | None = None) -> None:
    write_json(Path(path), {
        "format": "tagbook-event-model",
        "version": 1,
        "event_id": model.event_id,
        "mode": model.mode,
        "vector": [float(v) for v in model.vector],
        "training_meta": model.training_meta,
        "vocab_hash": vocabulary.hash if vocabulary is not None else None,
    })


def load_model(path, vocabulary: TagVocabulary | None = None) -> EventModel:
    raw = read_json(path)
    if raw.get("format") != "tagbook-event-model" or raw.get("version") != 1:
        raise IntegrityError(f"{path}: unsupported event model format")
    if vocabulary is not None and raw.get("vocab_hash") not in (None, vocabulary.hash):
        raise IntegrityError(f"{path}: vocabulary hash does not match")
    return EventModel(
        event_id=raw["event_id"],
        vector=np.asarray(raw["vector"], dtype=np.float64),
        mode=raw["mode"],
        training_meta=raw.get("training_meta"),
    )
