"""Tag propagation on planted clusters: the hard / soft / refine variants.

A video's tag vector averages its neighbors' tag relevances and subtracts a
corpus-frequency prior, so globally common tags do not drown out specific ones.
Run:  python demos/02_tag_propagation.py
"""

import numpy as np

from tagbook import (
    PropagationConfig,
    SynthSpec,
    describe_video,
    propagate,
    refine_source,
    synth_corpus,
)

# A small synthetic world: 4 events with disjoint signature tag sets, plus
# background videos with random tags. Tag noise drops some signature tags and
# mixes in distractors; feature noise blurs the clusters.
data = synth_corpus(SynthSpec(n_events=4, videos_per_event=20, n_background=300,
                              dim=8, vocab_size=80, signature_size=4,
                              tag_noise=0.3, feature_noise=0.4, seed=5))
corpus = data.corpus
print(f"corpus: {corpus.n_videos} videos, vocabulary of {corpus.vocabulary.m} tags")
print("event e00 signature:", data.descriptions["e00"])

# Source-set refinement replaces each source video's binary labels with
# similarity-weighted neighbor votes (self excluded), minus the same vote taken
# over the whole source set. It runs once and is reused by every query.
corpus.attach_refinement(refine_source(corpus, PropagationConfig(variant="refine", k_r=30)))

query_id, query = data.test_videos[0]  # a test video of event e00
print(f"\nquery {query_id}; top tags per variant (k = 40):")
for variant in ("hard", "soft", "refine"):
    vector = propagate(corpus, query, PropagationConfig(variant=variant, k=40, k_r=30))
    top = describe_video(vector, corpus.vocabulary, 6, video_id=query_id)
    print(f"  {variant:>6}: {list(top.tags)}")

# With hard weights and the literal prior, k = N makes both terms identical,
# so the tag vector collapses to exactly zero.
n = corpus.n_videos
zero = propagate(corpus, query, PropagationConfig(variant="hard", k=n))
print(f"\nhard variant with k = N = {n}: all-zero vector? {bool(np.all(zero == 0.0))}")

# Soft weights keep the similarity value; the same weight appears in the prior
# term over all N videos, which is what keeps frequent tags in check. Entries
# can go negative: below-prior relevance is meaningful and is never clipped.
soft = propagate(corpus, query, PropagationConfig(variant="soft", k=40))
print(f"soft vector range: [{soft.min():+.4f}, {soft.max():+.4f}], "
      f"{int((soft < 0).sum())} of {soft.size} entries below the prior")
