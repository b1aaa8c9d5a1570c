"""Synthetic planted-event datasets for desk-scale pipeline evaluation.

Each synthetic event is a cluster: a unit-norm center in feature space paired
with a disjoint signature tag set. Source and test videos are drawn around the
centers with Gaussian feature noise; source annotations carry the signature tags
with per-tag drop probability ``tag_noise`` plus randomly drawn distractor tags.
Background videos have unstructured features and random tags, supplying realistic
neighbor clutter and a non-trivial tag-frequency prior. Everything is a pure
function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import SourceCorpus, build_corpus
from .evaluation import GroundTruth


@dataclass(frozen=True)
class SynthSpec:
    """Knobs of the generator.

    ``feature_noise`` is the per-component standard deviation of the Gaussian
    noise added to a unit-norm cluster center (total noise norm grows as
    ``feature_noise * sqrt(dim)``). ``tag_noise`` both drops signature tags and
    controls how many distractor tags are mixed in (binomial, with
    ``distractor_rate`` scaling the count). A ``confusion_ratio`` fraction of
    distractors is drawn from other events' signatures, modeling
    plausible-but-wrong event tags; the rest are uniform over the remaining
    vocabulary. An ``outlier_fraction`` of source videos get their noise
    inflated by ``outlier_scale``, modeling videos whose tags do not match
    their visual content.
    """

    n_events: int = 10
    videos_per_event: int = 30
    n_background: int = 2000
    dim: int = 8
    vocab_size: int = 400
    tag_noise: float = 0.3
    feature_noise: float = 0.5
    seed: int = 0
    signature_size: int = 5
    test_videos_per_event: int | None = None
    test_background: int = 0
    background_tags_per_video: int = 10
    distractor_rate: float = 3.0
    confusion_ratio: float = 0.7
    outlier_fraction: float = 0.3
    outlier_scale: float = 6.0

    def __post_init__(self):
        for name in ("n_events", "videos_per_event", "n_background", "dim",
                     "vocab_size", "signature_size", "background_tags_per_video"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.tag_noise <= 1.0:
            raise ValueError("tag_noise must be in [0, 1]")
        if self.feature_noise < 0.0:
            raise ValueError("feature_noise must be non-negative")
        if self.n_events * self.signature_size > self.vocab_size:
            raise ValueError("vocab_size too small for disjoint event signatures")
        if self.background_tags_per_video > self.vocab_size:
            raise ValueError("background_tags_per_video cannot exceed vocab_size")
        if self.test_videos_per_event is not None and self.test_videos_per_event < 1:
            raise ValueError("test_videos_per_event must be positive")
        if self.test_background < 0:
            raise ValueError("test_background must be non-negative")
        if self.distractor_rate < 0.0:
            raise ValueError("distractor_rate must be non-negative")
        if not 0.0 <= self.confusion_ratio <= 1.0:
            raise ValueError("confusion_ratio must be in [0, 1]")
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must be in [0, 1]")
        if self.outlier_scale < 1.0:
            raise ValueError("outlier_scale must be at least 1")

    @property
    def test_count(self) -> int:
        return self.test_videos_per_event or self.videos_per_event


@dataclass(frozen=True)
class SynthDataset:
    """A generated corpus plus everything needed to evaluate detection on it."""

    corpus: SourceCorpus
    test_videos: tuple[tuple[str, np.ndarray], ...]
    truths: tuple[GroundTruth, ...]
    descriptions: dict[str, str]

    def event_ids(self) -> tuple[str, ...]:
        return tuple(truth.event_id for truth in self.truths)


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        vector = vector.copy()
        vector[0] = 1.0
        return vector
    return vector / norm


def synth_corpus(spec: SynthSpec) -> SynthDataset:
    """Generate a planted-event source corpus, test set, ground truth and descriptions."""
    rng = np.random.default_rng(spec.seed)
    tags = [f"tag{i:04d}" for i in range(spec.vocab_size)]
    shuffled = rng.permutation(spec.vocab_size)
    signatures = []
    for event in range(spec.n_events):
        chosen = shuffled[event * spec.signature_size:(event + 1) * spec.signature_size]
        signatures.append(sorted(tags[i] for i in chosen))

    centers = np.vstack([_unit(rng.normal(size=spec.dim)) for _ in range(spec.n_events)])
    noise_scale = spec.feature_noise

    def noisy(center: np.ndarray) -> np.ndarray:
        return center + noise_scale * rng.normal(size=spec.dim)

    def noisy_source(center: np.ndarray) -> np.ndarray:
        # Scale-mixture noise: an outlier_fraction of source videos sit visually
        # far from their event, modeling tags that do not match the content.
        scale = noise_scale
        if spec.feature_noise > 0.0 and rng.random() < spec.outlier_fraction:
            scale = noise_scale * spec.outlier_scale
        return center + scale * rng.normal(size=spec.dim)

    entries = []
    for event in range(spec.n_events):
        signature = signatures[event]
        foreign_signatures = sorted(
            {t for other in range(spec.n_events) if other != event
             for t in signatures[other]}
        )
        plain = [t for t in tags
                 if t not in set(signature) and t not in set(foreign_signatures)]
        draw_count = round(spec.distractor_rate * spec.signature_size)
        for j in range(spec.videos_per_event):
            video_id = f"src-e{event:02d}-{j:04d}"
            kept = [t for t in signature if rng.random() >= spec.tag_noise]
            extra_count = int(rng.binomial(draw_count, spec.tag_noise))
            extras = set()
            for _ in range(extra_count):
                if foreign_signatures and (not plain or rng.random() < spec.confusion_ratio):
                    pool = foreign_signatures
                elif plain:
                    pool = plain
                else:
                    break
                extras.add(pool[int(rng.integers(len(pool)))])
            entries.append((video_id, noisy_source(centers[event]), kept + sorted(extras)))
    for j in range(spec.n_background):
        video_id = f"bg-{j:05d}"
        feature = _unit(rng.normal(size=spec.dim))
        chosen = list(rng.choice(tags, size=spec.background_tags_per_video, replace=False))
        entries.append((video_id, feature, chosen))
    corpus = build_corpus(entries, min_df=1)

    test_videos = []
    positives_by_event = []
    for event in range(spec.n_events):
        positives = []
        for j in range(spec.test_count):
            video_id = f"test-e{event:02d}-{j:04d}"
            test_videos.append((video_id, noisy(centers[event])))
            positives.append(video_id)
        positives_by_event.append(positives)
    for j in range(spec.test_background):
        test_videos.append((f"test-bg-{j:05d}", _unit(rng.normal(size=spec.dim))))
    all_test_ids = frozenset(video_id for video_id, _ in test_videos)

    truths = tuple(
        GroundTruth(
            event_id=f"e{event:02d}",
            positives=frozenset(positives_by_event[event]),
            judged=all_test_ids,
        )
        for event in range(spec.n_events)
    )
    descriptions = {f"e{event:02d}": " ".join(signatures[event])
                    for event in range(spec.n_events)}
    return SynthDataset(
        corpus=corpus,
        test_videos=tuple(test_videos),
        truths=truths,
        descriptions=descriptions,
    )
