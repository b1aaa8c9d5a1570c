import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tagbook import build_corpus


def make_random_corpus(rng, n_videos, m_tags, dim, tags_per_video=3,
                       allow_tagless=True):
    """A corpus with random features and random tag sets over a fixed pool.

    Also returns the raw (ids, features, label rows) used to build it, in the
    plain-Python layout the oracles consume.
    """
    pool = [f"t{i:03d}" for i in range(m_tags)]
    ids = [f"v{i:04d}" for i in range(n_videos)]
    features = rng.normal(size=(n_videos, dim))
    entries = []
    for i in range(n_videos):
        low = 0 if allow_tagless else 1
        count = int(rng.integers(low, min(tags_per_video, m_tags) + 1))
        if i == 0:
            count = max(count, 1)  # at least one tag overall, so the vocabulary is non-empty
        tags = list(rng.choice(pool, size=count, replace=False)) if count else []
        entries.append((ids[i], features[i], tags))
    corpus = build_corpus(entries)
    vocab = corpus.vocabulary
    labels = [[1.0 if tag in corpus.annotation(vid).tags else 0.0 for tag in vocab.tags]
              for vid in ids]
    return corpus, ids, [list(map(float, f)) for f in features], labels


@pytest.fixture
def rng():
    return np.random.default_rng(42)
