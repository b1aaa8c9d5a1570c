"""Source corpus construction: feature ingestion, caption tokenization, tag vocabulary.

A :class:`SourceCorpus` is the socially tagged video collection that every other
module reads from. It pairs one feature vector per video with a set of tags drawn
from a fixed, ordered :class:`TagVocabulary`, and is immutable once built (the one
exception is attaching a precomputed relevance matrix, which may happen once).

File formats accepted by :func:`load_corpus`:

* feature file: JSON Lines, one object per video, either
  ``{"id": ..., "feature": [x1, ..., xd]}`` or frame-level
  ``{"id": ..., "frames": [[...], [...]]}`` (frames are average-pooled at load).
  An optional first line ``{"dim": d}`` declares the dimension; otherwise it is
  inferred from the first record.
* annotation file: JSON Lines, either ``{"id": ..., "caption": "..."}`` (tokenized
  with :func:`tokenize_caption`) or ``{"id": ..., "tags": [...]}`` (pre-tokenized;
  only lowercased and stoplist-filtered).
* stoplist file: plain UTF-8, one lowercase token per line.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyVocabulary,
    FormatError,
    IntegrityError,
    MissingFeature,
    UnknownTag,
    UnknownVideo,
)
from .fileio import iter_jsonl, read_array, read_json, vocabulary_hash, write_array, write_json

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_CORPUS_JSON = "corpus.json"
_FEATURES_NPY = "features.npy"
_RELEVANCE_BIN = "relevance.tbrm"


def tokenize_caption(text: str, stoplist=frozenset()) -> list[str]:
    """Split a caption into unique lowercase tokens.

    Splits on any non-alphanumeric character, lowercases, drops tokens shorter
    than two characters and stoplist members, and keeps the first occurrence of
    each surviving token. Idempotent on its own output joined by spaces.
    """
    seen = set()
    tokens = []
    for token in _TOKEN_RE.findall(text.lower()):
        if len(token) < 2 or token in stoplist or token in seen:
            continue
        seen.add(token)
        tokens.append(token)
    return tokens


def load_stoplist(path) -> frozenset[str]:
    """Read one token per line; tokens are lowercased, blanks skipped."""
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


class TagVocabulary:
    """Ordered list of distinct tags defining the axes of the tag space."""

    def __init__(self, tags):
        tags = tuple(tags)
        seen = set()
        for tag in tags:
            if not isinstance(tag, str) or not tag:
                raise ValueError("vocabulary tags must be non-empty strings")
            if tag != tag.lower():
                raise ValueError(f"vocabulary tag {tag!r} is not lowercase")
            if any(ch.isspace() for ch in tag):
                raise ValueError(f"vocabulary tag {tag!r} contains whitespace")
            if tag in seen:
                raise ValueError(f"duplicate vocabulary tag {tag!r}")
            seen.add(tag)
        self.tags = tags
        self.index = {tag: i for i, tag in enumerate(tags)}

    @property
    def m(self) -> int:
        return len(self.tags)

    @property
    def hash(self) -> str:
        return vocabulary_hash(self.tags)

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __contains__(self, tag):
        return tag in self.index

    def __getitem__(self, i):
        return self.tags[i]

    def __eq__(self, other):
        return isinstance(other, TagVocabulary) and self.tags == other.tags

    def __hash__(self):
        return hash(self.tags)

    def __repr__(self):
        return f"TagVocabulary(m={len(self.tags)})"


@dataclass(frozen=True)
class Annotation:
    """The tag set attached to one video."""

    video: str
    tags: frozenset[str]


def build_vocabulary(annotations, min_df: int = 1) -> TagVocabulary:
    """Collect tags whose document frequency reaches ``min_df``.

    Document frequency counts distinct videos carrying the tag (one annotation
    per video). Tags are ordered by descending document frequency, ties broken
    by ascending lexicographic order, which makes rebuilding deterministic.
    """
    if min_df < 1:
        raise ValueError("min_df must be a positive integer")
    df = Counter()
    for annotation in annotations:
        df.update(set(annotation.tags))
    eligible = [tag for tag, count in df.items() if count >= min_df]
    if not eligible:
        raise EmptyVocabulary(f"no tag reaches document frequency {min_df}")
    eligible.sort(key=lambda tag: (-df[tag], tag))
    return TagVocabulary(eligible)


class SourceCorpus:
    """Immutable socially tagged video collection used as the propagation reservoir.

    Holds one feature vector and one annotation per video, plus derived arrays
    that downstream modules read: unit-normalized features, the binary label
    matrix over the vocabulary, and a tie-breaking rank of each video id.
    Attaching a refined relevance matrix is a one-time operation.
    """

    def __init__(self, ids, features, tag_sets, vocabulary: TagVocabulary,
                 stoplist=frozenset(), min_df: int = 1):
        ids = tuple(str(i) for i in ids)
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise DuplicateId(f"duplicate video id {dupes[0]!r}")
        features = np.array(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != len(ids):
            raise DimensionMismatch(
                f"expected a ({len(ids)}, d) feature matrix, got shape {features.shape}"
            )
        if not np.all(np.isfinite(features)):
            raise ValueError("feature vectors must be finite")
        annotations = []
        for vid, tags in zip(ids, tag_sets):
            tags = frozenset(tags)
            for tag in tags:
                if tag not in vocabulary:
                    raise UnknownTag(f"tag {tag!r} of video {vid!r} is not in the vocabulary")
            annotations.append(Annotation(video=vid, tags=tags))
        if len(annotations) != len(ids):
            raise ValueError("one tag set per video id is required")

        self._ids = ids
        self._features = features
        self._features.setflags(write=False)
        self._annotations = tuple(annotations)
        self._vocabulary = vocabulary
        self._stoplist = frozenset(stoplist)
        self._min_df = int(min_df)
        self._row = {vid: i for i, vid in enumerate(ids)}
        self._refined = None

        norms = np.linalg.norm(features, axis=1)
        unit = np.zeros_like(features)
        nonzero = norms > 0
        unit[nonzero] = features[nonzero] / norms[nonzero, None]
        unit.setflags(write=False)
        self._unit_features = unit

        # Rank of each row's id in ascending id order; used as the similarity tie-break.
        order = np.argsort(np.array(ids))
        rank = np.empty(len(ids), dtype=np.int64)
        rank[order] = np.arange(len(ids))
        rank.setflags(write=False)
        self._id_order_rank = rank

        labels = np.zeros((len(ids), vocabulary.m), dtype=np.float64)
        for i, annotation in enumerate(annotations):
            for tag in annotation.tags:
                labels[i, vocabulary.index[tag]] = 1.0
        labels.setflags(write=False)
        self._labels = labels
        mean = labels.mean(axis=0) if len(ids) else np.zeros(vocabulary.m)
        mean.setflags(write=False)
        self._label_mean = mean

    # -- basic shape -------------------------------------------------------

    @property
    def n_videos(self) -> int:
        return len(self._ids)

    @property
    def dim(self) -> int:
        return self._features.shape[1]

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def vocabulary(self) -> TagVocabulary:
        return self._vocabulary

    @property
    def annotations(self) -> tuple[Annotation, ...]:
        return self._annotations

    @property
    def stoplist(self) -> frozenset[str]:
        return self._stoplist

    @property
    def min_df(self) -> int:
        return self._min_df

    # -- derived arrays (read-only views) ----------------------------------

    @property
    def features(self) -> np.ndarray:
        return self._features

    @property
    def unit_features(self) -> np.ndarray:
        return self._unit_features

    @property
    def label_matrix(self) -> np.ndarray:
        """N x m binary matrix; row v, column t is 1 iff video v carries tag t."""
        return self._labels

    @property
    def label_mean(self) -> np.ndarray:
        """Per-tag mean of the label matrix (document frequency / N)."""
        return self._label_mean

    @property
    def id_order_rank(self) -> np.ndarray:
        return self._id_order_rank

    @property
    def refined(self):
        """The refined relevance matrix, or None before refinement is attached."""
        return self._refined

    # -- per-video access ---------------------------------------------------

    def __contains__(self, video_id) -> bool:
        return video_id in self._row

    def row_of(self, video_id) -> int:
        try:
            return self._row[video_id]
        except KeyError:
            raise UnknownVideo(f"video {video_id!r} is not in the corpus") from None

    def feature(self, video_id) -> np.ndarray:
        return self._features[self.row_of(video_id)]

    def annotation(self, video_id) -> Annotation:
        return self._annotations[self.row_of(video_id)]

    def doc_frequencies(self) -> np.ndarray:
        """Document frequency per vocabulary tag, aligned with vocabulary order."""
        return self._labels.sum(axis=0).astype(np.int64)

    def attach_refinement(self, matrix) -> None:
        """Attach the one-time refined relevance matrix; the corpus stays frozen after."""
        if self._refined is not None:
            raise ValueError("corpus already carries a relevance matrix")
        matrix = np.array(matrix, dtype=np.float64)
        if matrix.shape != (self.n_videos, self.vocabulary.m):
            raise DimensionMismatch(
                f"relevance matrix shape {matrix.shape} does not match "
                f"({self.n_videos}, {self.vocabulary.m})"
            )
        if not np.all(np.isfinite(matrix)):
            raise ValueError("relevance matrix must be finite")
        matrix.setflags(write=False)
        self._refined = matrix

    def __eq__(self, other):
        if not isinstance(other, SourceCorpus):
            return NotImplemented
        same = (
            self._ids == other._ids
            and np.array_equal(self._features, other._features)
            and self._annotations == other._annotations
            and self._vocabulary == other._vocabulary
            and self._stoplist == other._stoplist
            and self._min_df == other._min_df
        )
        if not same:
            return False
        if (self._refined is None) != (other._refined is None):
            return False
        return self._refined is None or np.array_equal(self._refined, other._refined)

    def __repr__(self):
        return f"SourceCorpus(n_videos={self.n_videos}, dim={self.dim}, m={self.vocabulary.m})"


def binary_label(corpus: SourceCorpus, video_id: str, tag: str) -> int:
    """1 iff the video's annotation carries the tag, else 0."""
    if tag not in corpus.vocabulary:
        raise UnknownTag(f"tag {tag!r} is not in the vocabulary")
    return int(tag in corpus.annotation(video_id).tags)


def _normalize_tags(raw_tags, stoplist):
    tags = set()
    for tag in raw_tags:
        tag = str(tag).lower()
        if not tag or tag in stoplist:
            continue
        tags.add(tag)
    return tags


def build_corpus(entries, *, min_df: int = 1, stoplist=frozenset(),
                 vocabulary: TagVocabulary | None = None) -> SourceCorpus:
    """Build a frozen corpus from in-memory ``(id, feature, tags)`` triples.

    Tags are lowercased and stoplist-filtered but not re-tokenized. When an
    explicit vocabulary is supplied, tags outside it are dropped instead of
    rebuilding the vocabulary; this supports working with a truncated tag space.
    Videos whose tag set ends up empty are kept: they still act as similarity
    neighbors and still count toward the corpus-frequency prior.
    """
    stoplist = frozenset(stoplist)
    ids, features, tag_sets = [], [], []
    for video_id, feature, raw_tags in entries:
        ids.append(str(video_id))
        features.append(np.asarray(feature, dtype=np.float64))
        tag_sets.append(_normalize_tags(raw_tags, stoplist))
    if not ids:
        raise ValueError("a corpus requires at least one video")
    dims = {f.shape for f in features}
    if len(dims) != 1 or features[0].ndim != 1:
        raise DimensionMismatch(f"feature vectors have inconsistent shapes: {sorted(dims)}")
    if vocabulary is None:
        annotations = [Annotation(video=v, tags=frozenset(t)) for v, t in zip(ids, tag_sets)]
        vocabulary = build_vocabulary(annotations, min_df=min_df)
    # Tags outside the vocabulary (below min_df, or outside an explicit one) are
    # dropped; the videos themselves stay, possibly tagless.
    tag_sets = [{t for t in tags if t in vocabulary} for tags in tag_sets]
    return SourceCorpus(ids, np.vstack(features), tag_sets, vocabulary,
                        stoplist=stoplist, min_df=min_df)


def _parse_feature_record(path, line_no, record, dim):
    """Return (id, vector, dim) for one feature-file record, validating shape."""
    from .similarity import average_pool_frames  # deferred: similarity has no runtime dependency on corpus

    video_id = record.get("id")
    if not isinstance(video_id, str) or not video_id:
        raise FormatError(path, line_no, "missing or empty 'id'")
    has_feature = "feature" in record
    has_frames = "frames" in record
    if has_feature == has_frames:
        raise FormatError(path, line_no, "expected exactly one of 'feature' or 'frames'")
    if has_feature:
        raw = record["feature"]
        if not isinstance(raw, list) or not raw:
            raise FormatError(path, line_no, "'feature' must be a non-empty array of numbers")
        try:
            vector = np.asarray(raw, dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(path, line_no, "'feature' must be a non-empty array of numbers") from None
        if vector.ndim != 1:
            raise FormatError(path, line_no, "'feature' must be a flat array")
    else:
        raw = record["frames"]
        if not isinstance(raw, list) or not raw:
            raise FormatError(path, line_no, "'frames' must be a non-empty array of arrays")
        try:
            frames = np.asarray(raw, dtype=np.float64)
        except (TypeError, ValueError):
            raise FormatError(path, line_no, "'frames' rows must be numeric and equally sized") from None
        if frames.ndim != 2:
            raise FormatError(path, line_no, "'frames' rows must be numeric and equally sized")
        vector = average_pool_frames(frames)
    if not np.all(np.isfinite(vector)):
        raise FormatError(path, line_no, "feature values must be finite")
    if dim is None:
        dim = vector.shape[0]
    elif vector.shape[0] != dim:
        raise DimensionMismatch(
            f"{path}:{line_no}: expected dimension {dim}, got {vector.shape[0]}"
        )
    return video_id, vector, dim


def read_feature_file(path):
    """Read a feature file into aligned (ids, vectors); frame records are pooled."""
    dim = None
    ids, vectors = [], []
    seen = set()
    for line_no, record in iter_jsonl(path):
        if line_no == 1 and "id" not in record:
            if set(record) != {"dim"} or not isinstance(record["dim"], int) or record["dim"] < 1:
                raise FormatError(path, line_no, "header must be {\"dim\": positive integer}")
            dim = record["dim"]
            continue
        video_id, vector, dim = _parse_feature_record(path, line_no, record, dim)
        if video_id in seen:
            raise DuplicateId(f"{path}:{line_no}: duplicate video id {video_id!r}")
        seen.add(video_id)
        ids.append(video_id)
        vectors.append(vector)
    if not ids:
        raise FormatError(path, 0, "feature file contains no videos")
    return ids, vectors


def _read_annotation_file(path, known_ids, stoplist):
    tags_by_id = {}
    for line_no, record in iter_jsonl(path):
        video_id = record.get("id")
        if not isinstance(video_id, str) or not video_id:
            raise FormatError(path, line_no, "missing or empty 'id'")
        if video_id not in known_ids:
            raise MissingFeature(f"{path}:{line_no}: no feature vector for video {video_id!r}")
        if video_id in tags_by_id:
            raise DuplicateId(f"{path}:{line_no}: duplicate annotation for video {video_id!r}")
        has_caption = "caption" in record
        has_tags = "tags" in record
        if has_caption == has_tags:
            raise FormatError(path, line_no, "expected exactly one of 'caption' or 'tags'")
        if has_caption:
            if not isinstance(record["caption"], str):
                raise FormatError(path, line_no, "'caption' must be a string")
            tags = set(tokenize_caption(record["caption"], stoplist))
        else:
            raw = record["tags"]
            if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
                raise FormatError(path, line_no, "'tags' must be an array of strings")
            for tag in raw:
                if not tag.strip() or any(ch.isspace() for ch in tag):
                    raise FormatError(path, line_no, f"tag {tag!r} is empty or contains whitespace")
            tags = _normalize_tags(raw, stoplist)
        tags_by_id[video_id] = tags
    return tags_by_id


def load_corpus(feature_file, annotation_file, stoplist_file=None, min_df: int = 1) -> SourceCorpus:
    """Load and freeze a corpus from feature and annotation files.

    Frame-level feature records are average-pooled. Videos without an annotation
    line, or whose tags are all filtered away, are kept with an empty tag set.
    """
    stoplist = load_stoplist(stoplist_file) if stoplist_file else frozenset()
    ids, vectors = read_feature_file(feature_file)
    tags_by_id = _read_annotation_file(annotation_file, set(ids), stoplist)
    entries = [(vid, vec, tags_by_id.get(vid, set())) for vid, vec in zip(ids, vectors)]
    return build_corpus(entries, min_df=min_df, stoplist=stoplist)


def save_corpus(corpus: SourceCorpus, out_dir) -> None:
    """Persist a corpus as ``corpus.json`` + ``features.npy`` under ``out_dir``."""
    out_dir = Path(out_dir)
    meta = {
        "format": "tagbook-corpus",
        "version": 1,
        "dim": corpus.dim,
        "min_df": corpus.min_df,
        "stoplist": sorted(corpus.stoplist),
        "ids": list(corpus.ids),
        "annotations": [sorted(a.tags) for a in corpus.annotations],
        "vocabulary": list(corpus.vocabulary.tags),
        "vocab_hash": corpus.vocabulary.hash,
    }
    write_json(out_dir / _CORPUS_JSON, meta)
    write_array(out_dir / _FEATURES_NPY, corpus.features)


def load_corpus_dir(corpus_dir) -> SourceCorpus:
    """Load a persisted corpus; attaches the relevance matrix when one is present."""
    corpus_dir = Path(corpus_dir)
    meta_path = corpus_dir / _CORPUS_JSON
    if not meta_path.exists():
        raise FileNotFoundError(f"{meta_path} does not exist; not a corpus directory")
    meta = read_json(meta_path)
    if meta.get("format") != "tagbook-corpus" or meta.get("version") != 1:
        raise IntegrityError(f"{meta_path}: unsupported corpus format")
    vocabulary = TagVocabulary(meta["vocabulary"])
    if vocabulary.hash != meta["vocab_hash"]:
        raise IntegrityError(f"{meta_path}: vocabulary hash mismatch")
    features = read_array(corpus_dir / _FEATURES_NPY)
    corpus = SourceCorpus(
        meta["ids"],
        features,
        [set(tags) for tags in meta["annotations"]],
        vocabulary,
        stoplist=frozenset(meta.get("stoplist", [])),
        min_df=meta.get("min_df", 1),
    )
    relevance_path = corpus_dir / _RELEVANCE_BIN
    if relevance_path.exists():
        from .propagation import load_relevance

        corpus.attach_refinement(load_relevance(relevance_path, corpus=corpus))
    return corpus
