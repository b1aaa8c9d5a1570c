"""Build a tiny corpus by hand and look around: tokens, vocabulary, neighbors.

Run:  python demos/01_corpus_and_neighbors.py
"""

import numpy as np

from tagbook import (
    all_similarities,
    binary_label,
    build_corpus,
    cosine_similarity,
    knn,
    tokenize_caption,
)

# Captions become tag sets: lowercase, split on anything non-alphanumeric,
# drop one-character tokens and stoplist words, keep first occurrences.
stoplist = {"at", "the", "a", "of"}
captions = {
    "v-dogshow": "Dog show at the park: agility course!",
    "v-parade": "The parade of dogs downtown",
    "v-cooking": "Cooking a three-course dinner",
}
for video_id, caption in captions.items():
    print(f"{video_id}: {tokenize_caption(caption, stoplist)}")

# Features here are tiny made-up visual embeddings. In practice you would load
# them from a feature file with load_corpus(...).
corpus = build_corpus(
    [
        ("v-dogshow", np.array([0.9, 0.1, 0.0]), tokenize_caption(captions["v-dogshow"], stoplist)),
        ("v-parade", np.array([0.7, 0.3, 0.1]), tokenize_caption(captions["v-parade"], stoplist)),
        ("v-cooking", np.array([0.0, 0.2, 0.9]), tokenize_caption(captions["v-cooking"], stoplist)),
    ],
    stoplist=stoplist,
)
print("\nvocabulary (by document frequency, ties alphabetical):")
print(" ", list(corpus.vocabulary.tags))
print("binary label (v-dogshow, 'dog') =", binary_label(corpus, "v-dogshow", "dog"))

# Cosine similarity drives everything downstream; zero-norm vectors score 0.
query = np.array([0.8, 0.2, 0.05])
print("\ncosine(query, v-dogshow) =", round(cosine_similarity(query, corpus.feature("v-dogshow")), 4))
print("all similarities:", [(v, round(s, 4)) for v, s in all_similarities(corpus, query)])

# Exact k-nearest neighbors, ties broken by ascending video id.
neighbors = knn(corpus, query, k=2)
print("top-2 neighbors:", [(v, round(s, 4)) for v, s in neighbors])
