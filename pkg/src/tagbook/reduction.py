"""Tag-vector dimensionality reduction: frequent-tag truncation and PCA.

Frequent-tag truncation keeps the coordinates of the most frequent source-set
tags; it is coordinate-wise, so for the hard and soft variants it commutes with
propagation on a pre-truncated vocabulary. PCA projects mean-centered tag
vectors onto the top principal axes; fitting is usage-agnostic (per event or
global). Around 2000 kept tags is the recommended working size for few-example
detection, 2500 when only one example is available.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import SourceCorpus, TagVocabulary
from .errors import DimensionMismatch, InsufficientData, IntegrityError, SizeTooLarge
from .fileio import atomic_write_bytes, read_json, write_json

_PCA_MAGIC = b"TBPC"
_PCA_VERSION = 1


@dataclass(frozen=True)
class ReducedVocabulary:
    """Indices of kept tags, in parent vocabulary order (a stable projection)."""

    selected: tuple[int, ...]
    tags: tuple[str, ...]
    parent_m: int
    parent_hash: str

    @property
    def m(self) -> int:
        return len(self.selected)


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal principal axes and their explained variances."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        components = np.asarray(self.components, dtype=np.float64)
        explained = np.asarray(self.explained_variance, dtype=np.float64)
        if components.ndim != 2 or mean.ndim != 1 or components.shape[1] != mean.shape[0]:
            raise DimensionMismatch("components must be (m', m) with a length-m mean")
        if explained.shape != (components.shape[0],):
            raise DimensionMismatch("one explained variance per component is required")
        for array in (mean, components, explained):
            array.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "explained_variance", explained)

    @property
    def m(self) -> int:
        return self.mean.shape[0]

    @property
    def m_reduced(self) -> int:
        return self.components.shape[0]


def select_frequent(corpus: SourceCorpus, target_size: int) -> ReducedVocabulary:
    """Keep the ``target_size`` tags with the highest document frequency.

    Frequency ties are broken by ascending tag order; the returned indices are
    sorted so projected vectors keep the parent vocabulary's coordinate order.
    Selections nest: the tags kept at one size are kept at every larger size.
    """
    vocabulary = corpus.vocabulary
    if target_size < 1:
        raise ValueError("target size must be at least 1")
    if target_size > vocabulary.m:
        raise SizeTooLarge(
            f"cannot keep {target_size} of {vocabulary.m} vocabulary tags"
        )
    df = corpus.doc_frequencies()
    by_frequency = sorted(range(vocabulary.m), key=lambda i: (-df[i], vocabulary.tags[i]))
    selected = tuple(sorted(by_frequency[:target_size]))
    return ReducedVocabulary(
        selected=selected,
        tags=tuple(vocabulary.tags[i] for i in selected),
        parent_m=vocabulary.m,
        parent_hash=vocabulary.hash,
    )


def project_vocabulary(vector, reduced: ReducedVocabulary) -> np.ndarray:
    """Copy the selected coordinates, in selection order, without renormalizing."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != reduced.parent_m:
        raise DimensionMismatch(
            f"vector shape {vector.shape} does not match parent size {reduced.parent_m}"
        )
    return vector[list(reduced.selected)]


def pca_fit(vectors, target_size: int) -> PcaModel:
    """Fit PCA on a vector collection and keep the top ``target_size`` axes.

    Uses the SVD of the mean-centered data; explained variances are the
    corresponding eigenvalues of the sample covariance. Sign convention for
    reproducibility: the entry of largest magnitude in each component is made
    positive.
    """
    x = np.array([np.asarray(v, dtype=np.float64) for v in vectors])
    if x.ndim != 2:
        raise DimensionMismatch("vectors must share one dimension")
    count, m = x.shape
    if count < 2:
        raise InsufficientData("PCA needs at least two vectors")
    if target_size < 1:
        raise ValueError("target size must be at least 1")
    if target_size > m:
        raise SizeTooLarge(f"cannot keep {target_size} of {m} dimensions")
    if target_size > count - 1:
        raise InsufficientData(
            f"{count} vectors support at most {count - 1} components, requested {target_size}"
        )
    mean = x.mean(axis=0)
    _, singular_values, vt = np.linalg.svd(x - mean, full_matrices=False)
    components = vt[:target_size].copy()
    for row in components:
        peak = np.argmax(np.abs(row))
        if row[peak] < 0:
            row *= -1.0
    explained = (singular_values[:target_size] ** 2) / (count - 1)
    return PcaModel(mean=mean, components=components, explained_variance=explained)


def pca_project(vector, model: PcaModel) -> np.ndarray:
    """Coordinates of ``vector - mean`` along the principal axes."""
    vector = np.asarray(vector, dtype=np.float64)
    if vector.ndim != 1 or vector.shape[0] != model.m:
        raise DimensionMismatch(
            f"vector shape {vector.shape} does not match model dimension {model.m}"
        )
    return model.components @ (vector - model.mean)


def save_reduced_vocabulary(reduced: ReducedVocabulary, path) -> None:
    write_json(Path(path), {
        "format": "tagbook-reduced-vocab",
        "version": 1,
        "parent_hash": reduced.parent_hash,
        "parent_m": reduced.parent_m,
        "selected": list(reduced.selected),
        "tags": list(reduced.tags),
    })


def load_reduced_vocabulary(path, vocabulary: TagVocabulary | None = None) -> ReducedVocabulary:
    raw = read_json(path)
    if raw.get("format") != "tagbook-reduced-vocab" or raw.get("version") != 1:
        raise IntegrityError(f"{path}: unsupported reduced vocabulary format")
    reduced = ReducedVocabulary(
        selected=tuple(raw["selected"]),
        tags=tuple(raw["tags"]),
        parent_m=raw["parent_m"],
        parent_hash=raw["parent_hash"],
    )
    if vocabulary is not None:
        if vocabulary.hash != reduced.parent_hash or vocabulary.m != reduced.parent_m:
            raise IntegrityError(f"{path}: parent vocabulary does not match")
        if any(vocabulary.tags[i] != t for i, t in zip(reduced.selected, reduced.tags)):
            raise IntegrityError(f"{path}: selected tags disagree with the vocabulary")
    return reduced


def save_pca(model: PcaModel, path, vocab_hash: str | None = None) -> None:
    """Write a PCA model in the same binary layout family as the relevance matrix.

    Little-endian: magic ``TBPC``, format version u32, rows (m') u64, cols (m)
    u64, then the mean (m values), components (m' x m, row-major) and explained
    variances (m' values) as float64. The sidecar records shapes and dtype.
    """
    path = Path(path)
    header = _PCA_MAGIC + struct.pack("<I", _PCA_VERSION)
    header += struct.pack("<QQ", model.m_reduced, model.m)
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes()
        for arr in (model.mean, model.components, model.explained_variance)
    )
    atomic_write_bytes(path, header + payload)
    write_json(path.with_suffix(".json"), {
        "format": "tagbook-pca",
        "version": _PCA_VERSION,
        "rows": model.m_reduced,
        "cols": model.m,
        "dtype": "<f8",
        "vocab_hash": vocab_hash,
    })


def load_pca(path) -> PcaModel:
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _PCA_MAGIC:
        raise IntegrityError(f"{path}: not a PCA model file")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != _PCA_VERSION:
        raise IntegrityError(f"{path}: unsupported format version {version}")
    rows, cols = struct.unpack_from("<QQ", blob, 8)
    expected = 24 + 8 * (cols + rows * cols + rows)
    if len(blob) != expected:
        raise IntegrityError(f"{path}: expected {expected} bytes, found {len(blob)}")
    flat = np.frombuffer(blob, dtype="<f8", offset=24)
    mean = flat[:cols].copy()
    components = flat[cols:cols + rows * cols].reshape(rows, cols).copy()
    explained = flat[cols + rows * cols:].copy()
    return PcaModel(mean=mean, components=components, explained_variance=explained)
