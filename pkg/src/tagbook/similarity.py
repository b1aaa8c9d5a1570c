"""Video-level visual similarity: frame pooling, cosine, exact k-nearest neighbors.

All operations are pure functions over an immutable corpus and are safe for
concurrent use. Search is exact (full scan); neighbor order is made total by
breaking similarity ties on ascending video id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import DimensionMismatch, EmptyInput

if TYPE_CHECKING:
    from .corpus import SourceCorpus


@dataclass(frozen=True)
class NeighborList:
    """Neighbors ordered by descending similarity, ties by ascending video id."""

    entries: tuple[tuple[str, float], ...]
    k: int

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def ids(self) -> tuple[str, ...]:
        return tuple(video_id for video_id, _ in self.entries)

    def similarities(self) -> tuple[float, ...]:
        return tuple(sim for _, sim in self.entries)


def average_pool_frames(frames) -> np.ndarray:
    """Component-wise mean of frame-level vectors."""
    frames = list(np.asarray(f, dtype=np.float64) for f in frames)
    if not frames:
        raise EmptyInput("cannot pool an empty frame list")
    dims = {f.shape for f in frames}
    if len(dims) != 1 or frames[0].ndim != 1:
        raise DimensionMismatch(f"frames have inconsistent shapes: {sorted(dims)}")
    return np.mean(np.vstack(frames), axis=0)


def cosine_similarity(x, y) -> float:
    """Cosine of the angle between two vectors; 0.0 when either has zero norm."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"cannot compare shapes {x.shape} and {y.shape}")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x, y) / (nx * ny))


def similarity_vector(corpus: SourceCorpus, query) -> np.ndarray:
    """Cosine similarity of the query to every corpus video, in corpus order."""
    query = np.asarray(query, dtype=np.float64)
    if query.ndim != 1 or query.shape[0] != corpus.dim:
        raise DimensionMismatch(
            f"query shape {query.shape} does not match corpus dimension {corpus.dim}"
        )
    norm = np.linalg.norm(query)
    if norm == 0.0:
        return np.zeros(corpus.n_videos)
    return corpus.unit_features @ (query / norm)


def all_similarities(corpus: SourceCorpus, query) -> list[tuple[str, float]]:
    """(video id, similarity) for every corpus video, unsorted."""
    sims = similarity_vector(corpus, query)
    return list(zip(corpus.ids, (float(s) for s in sims)))


def knn(corpus: SourceCorpus, query, k: int, exclude: str | None = None) -> NeighborList:
    """Exact top-k corpus videos by cosine similarity to the query.

    Ties are broken by ascending video id, so the ranking is a total order and
    ``knn(k)`` is always a prefix of ``knn(k + 1)``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    sims = similarity_vector(corpus, query)
    order = np.lexsort((corpus.id_order_rank, -sims))
    skip = corpus.row_of(exclude) if exclude is not None and exclude in corpus else None
    entries = []
    for row in order:
        if row == skip:
            continue
        entries.append((corpus.ids[row], float(sims[row])))
        if len(entries) == k:
            break
    return NeighborList(entries=tuple(entries), k=k)
