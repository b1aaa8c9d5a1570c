"""Tag propagation: turn visual neighbors into tag-vector representations.

A video's tag vector is built in two terms. The first averages, over the query's
top-k source neighbors, a per-neighbor weight times a per-neighbor tag relevance.
The second subtracts a corpus-frequency prior computed the same way over all N
source videos, which stops globally frequent tags from dominating. Three variants
differ in how weight and relevance are chosen:

* ``hard``   - weight 1 for neighbors ranked within k (0 otherwise), raw binary labels.
* ``soft``   - weight is the cosine similarity itself, raw binary labels.
* ``refine`` - similarity weights, with binary labels replaced by a refined
  relevance matrix precomputed once over the source set by the same
  neighbor-voting scheme (:func:`refine_source`).

Under hard weights, a literal reading of the prior zeroes out every video
outside the top k; ``hard_prior_mode="full_set"`` instead weighs all N videos
equally so the prior becomes plain tag frequency. Both are supported; literal
is the default.

Summation order is fixed (neighbor-rank order for the first term, corpus order
for the prior), so identical inputs produce bitwise-identical outputs and
parallel batch execution cannot change results.
"""

from __future__ import annotations

import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import SourceCorpus
from .errors import DimensionMismatch, IntegrityError, MissingRefinement
from .fileio import atomic_write_bytes, read_json, write_json
from .similarity import similarity_vector

VARIANTS = ("hard", "soft", "refine")
HARD_PRIOR_MODES = ("literal", "full_set")

_RELEVANCE_MAGIC = b"TBRM"
_RELEVANCE_VERSION = 1

# Elements per similarity-matrix block inside refine_source; bounds peak memory.
_BLOCK_ELEMENTS = 20_000_000


@dataclass(frozen=True)
class PropagationConfig:
    """Neighborhood sizes and assignment variant for tag propagation.

    ``k`` is the number of test-time neighbors, ``k_r`` the number of neighbors
    used during source-set refinement; both default to 500 and are clamped (with
    a warning) when they exceed what the corpus can supply.
    """

    variant: str
    k: int = 500
    k_r: int = 500
    hard_prior_mode: str = "literal"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.hard_prior_mode not in HARD_PRIOR_MODES:
            raise ValueError(
                f"hard_prior_mode must be one of {HARD_PRIOR_MODES}, got {self.hard_prior_mode!r}"
            )
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.k_r < 1:
            raise ValueError("k_r must be at least 1")


def neighbor_weight(variant: str, rank: int, similarity: float, k: int) -> float:
    """Weight of the rank-th neighbor inside the top-k propagation sum."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if rank < 1:
        raise ValueError("rank is 1-based")
    if rank > k:
        return 0.0
    return 1.0 if variant == "hard" else float(similarity)


def _clamp(value: int, limit: int, name: str) -> int:
    if value > limit:
        warnings.warn(f"{name}={value} exceeds {limit} available videos; clamping",
                      stacklevel=3)
        return limit
    return value


def refine_source(corpus: SourceCorpus, config: PropagationConfig) -> np.ndarray:
    """Neighbor-voted tag relevance for every source video, as an N x m matrix.

    For each source video the binary labels of its ``k_r`` nearest neighbors
    (the video itself excluded) are similarity-weighted and averaged, and the
    similarity-weighted label average over the entire source set, self included,
    is subtracted. Entries may be negative; deterministic given corpus and config.
    """
    n = corpus.n_videos
    m = corpus.vocabulary.m
    if n < 2:
        raise ValueError("refinement needs at least two source videos")
    k_r = _clamp(config.k_r, n - 1, "k_r")
    labels = corpus.label_matrix
    unit = corpus.unit_features
    id_rank = corpus.id_order_rank
    relevance = np.empty((n, m), dtype=np.float64)
    # Row-block the N x N similarity matrix to bound memory on larger corpora.
    block = max(1, _BLOCK_ELEMENTS // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims_block = unit[start:stop] @ unit.T
        priors = (sims_block @ labels) / n
        for offset in range(stop - start):
            i = start + offset
            sims = sims_block[offset]
            selection = sims.copy()
            selection[i] = -np.inf  # never choose the video as its own neighbor
            order = np.lexsort((id_rank, -selection))
            top = order[:k_r]
            relevance[i] = (sims[top] @ labels[top]) / k_r - priors[offset]
    return relevance


def propagate(corpus: SourceCorpus, query, config: PropagationConfig) -> np.ndarray:
    """Tag vector of a query feature vector under the configured variant."""
    n = corpus.n_videos
    if config.variant == "refine":
        relevance = corpus.refined
        if relevance is None:
            raise MissingRefinement(
                "variant 'refine' needs a relevance matrix; run refine_source first"
            )
    else:
        relevance = corpus.label_matrix
    sims = similarity_vector(corpus, query)
    k = _clamp(config.k, n, "k")
    order = np.lexsort((corpus.id_order_rank, -sims))
    top = order[:k]
    if config.variant == "hard":
        counts = relevance[top].sum(axis=0)
        if config.hard_prior_mode == "literal":
            # Prior reuses the binary rank weight, so only top-k videos contribute;
            # with k = N the two terms cancel exactly.
            return (1.0 / k - 1.0 / n) * counts
        return counts / k - corpus.label_mean
    return (sims[top] @ relevance[top]) / k - (sims @ relevance) / n


def propagate_batch(corpus: SourceCorpus, queries, config: PropagationConfig,
                    threads: int = 1) -> list[tuple[str, np.ndarray]]:
    """Propagate a sequence of ``(video_id, feature)`` queries, order preserved.

    Element-wise identical to independent :func:`propagate` calls; a thread pool
    only distributes whole queries, so parallel runs are bit-identical to
    sequential ones. Fails on the first offending query.
    """
    queries = list(queries)

    def one(item):
        video_id, feature = item
        try:
            return video_id, propagate(corpus, feature, config)
        except (DimensionMismatch, MissingRefinement) as exc:
            raise type(exc)(f"query {video_id!r}: {exc}") from exc

    if threads <= 1:
        return [one(item) for item in queries]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, queries))


def save_relevance(matrix, corpus: SourceCorpus, path) -> None:
    """Write a relevance matrix with a JSON sidecar naming its corpus.

    Binary layout, little-endian: magic ``TBRM``, format version u32, N u64,
    m u64, then N*m float32 values in video-major order. The sidecar pairs the
    file with its corpus via the id list and vocabulary hash.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape != (corpus.n_videos, corpus.vocabulary.m):
        raise DimensionMismatch(
            f"relevance shape {matrix.shape} does not match corpus "
            f"({corpus.n_videos}, {corpus.vocabulary.m})"
        )
    path = Path(path)
    header = _RELEVANCE_MAGIC + struct.pack("<I", _RELEVANCE_VERSION)
    header += struct.pack("<QQ", matrix.shape[0], matrix.shape[1])
    payload = np.ascontiguousarray(matrix, dtype="<f4").tobytes()
    atomic_write_bytes(path, header + payload)
    write_json(path.with_suffix(".json"), {
        "format": "tagbook-relevance",
        "version": _RELEVANCE_VERSION,
        "n_videos": matrix.shape[0],
        "m": matrix.shape[1],
        "video_ids": list(corpus.ids),
        "vocab_hash": corpus.vocabulary.hash,
    })


def load_relevance(path, corpus: SourceCorpus | None = None) -> np.ndarray:
    """Read a relevance matrix; verifies the sidecar against ``corpus`` when given."""
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _RELEVANCE_MAGIC:
        raise IntegrityError(f"{path}: not a relevance matrix file")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != _RELEVANCE_VERSION:
        raise IntegrityError(f"{path}: unsupported format version {version}")
    n, m = struct.unpack_from("<QQ", blob, 8)
    expected = 24 + 4 * n * m
    if len(blob) != expected:
        raise IntegrityError(f"{path}: expected {expected} bytes, found {len(blob)}")
    matrix = np.frombuffer(blob, dtype="<f4", offset=24).reshape(n, m).astype(np.float64)
    if corpus is not None:
        sidecar_path = path.with_suffix(".json")
        if not sidecar_path.exists():
            raise IntegrityError(f"{sidecar_path}: sidecar missing, cannot verify corpus match")
        sidecar = read_json(sidecar_path)
        if sidecar.get("video_ids") != list(corpus.ids):
            raise IntegrityError(f"{path}: video ids do not match the corpus")
        if sidecar.get("vocab_hash") != corpus.vocabulary.hash:
            raise IntegrityError(f"{path}: vocabulary hash does not match the corpus")
        if (n, m) != (corpus.n_videos, corpus.vocabulary.m):
            raise IntegrityError(f"{path}: matrix shape does not match the corpus")
    return matrix
