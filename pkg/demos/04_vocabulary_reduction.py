"""Shrinking tag vectors: frequent-tag truncation and PCA.

Frequent-tag truncation keeps the coordinates of the most frequent source tags
(around 2000 is a good working size at full scale; 2500 with a single example).
PCA needs vectors to fit on, which makes it unusable when an event arrives as
text only. Run:  python demos/04_vocabulary_reduction.py
"""

import numpy as np

from tagbook import (
    PropagationConfig,
    SynthSpec,
    pca_fit,
    pca_project,
    project_vocabulary,
    propagate_batch,
    select_frequent,
    synth_corpus,
)

data = synth_corpus(SynthSpec(n_events=4, videos_per_event=15, n_background=200,
                              dim=8, vocab_size=120, tag_noise=0.2,
                              feature_noise=0.4, seed=9))
corpus = data.corpus
tagbooks = propagate_batch(corpus, data.test_videos,
                           PropagationConfig(variant="soft", k=60))
vectors = [vec for _, vec in tagbooks]
print(f"full tag vectors: length {corpus.vocabulary.m}")

# Frequent-tag selections nest: each size keeps a subset of the next size up.
for size in (10, 30, 60):
    reduced = select_frequent(corpus, size)
    projected = project_vocabulary(vectors[0], reduced)
    print(f"  keep {size:>3} most frequent tags -> vector length {len(projected)}; "
          f"first kept tags: {list(reduced.tags[:4])}")

smaller = set(select_frequent(corpus, 10).tags)
larger = set(select_frequent(corpus, 30).tags)
print("nesting holds:", smaller <= larger)

# PCA: mean-centered projection onto the top principal axes. Fitting here uses
# the test tag vectors themselves; any vector collection works.
model = pca_fit(vectors, 12)
projected = np.vstack([pca_project(v, model) for v in vectors])
print(f"\nPCA to 12 axes: projected shape {projected.shape}")
print("explained variance (non-increasing):",
      np.round(model.explained_variance[:5], 5))

# At full rank the projection is lossless.
full = pca_fit(vectors[:40], min(len(vectors[:40]) - 1, corpus.vocabulary.m))
vector = vectors[0]
reconstructed = full.mean + pca_project(vector, full) @ full.components
print("full-rank reconstruction error:",
      f"{np.max(np.abs(reconstructed - vector)):.2e}")
