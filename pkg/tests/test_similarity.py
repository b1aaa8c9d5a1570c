import numpy as np
import pytest

from conftest import make_random_corpus
from oracles import knn_oracle
from tagbook import (
    all_similarities,
    average_pool_frames,
    build_corpus,
    cosine_similarity,
    knn,
)
from tagbook.errors import DimensionMismatch, EmptyInput


class TestAveragePoolFrames:
    def test_single_frame_is_identity(self):
        x = np.array([3.0, -1.0, 2.0])
        np.testing.assert_array_equal(average_pool_frames([x]), x)

    def test_symmetric_pair(self):
        np.testing.assert_array_equal(
            average_pool_frames([[1.0, 0.0], [0.0, 1.0]]), [0.5, 0.5]
        )

    def test_three_frames(self):
        np.testing.assert_array_equal(
            average_pool_frames([[2.0, 4.0], [4.0, 8.0], [0.0, 0.0]]), [2.0, 4.0]
        )

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            average_pool_frames([])

    def test_ragged_frames(self):
        with pytest.raises(DimensionMismatch):
            average_pool_frames([[1.0, 2.0], [1.0]])

    def test_permutation_invariant(self, rng):
        for _ in range(30):
            frames = rng.normal(size=(int(rng.integers(1, 8)), 5))
            shuffled = frames[rng.permutation(len(frames))]
            np.testing.assert_allclose(
                average_pool_frames(frames), average_pool_frames(shuffled), atol=1e-12
            )


class TestCosineSimilarity:
    def test_identical_vectors(self):
        x = np.array([1.0, 2.0, -3.0])
        assert cosine_similarity(x, x) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_45_degrees(self):
        assert cosine_similarity([1.0, 0.0], [1.0, 1.0]) == pytest.approx(1 / np.sqrt(2))

    def test_zero_norm_convention(self):
        assert cosine_similarity([0.0, 0.0], [1.0, 2.0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine_similarity([1.0], [1.0, 2.0])

    def test_symmetry_and_scale_invariance(self, rng):
        for _ in range(100):
            x = rng.normal(size=6)
            y = rng.normal(size=6)
            alpha, beta = rng.uniform(0.1, 10.0, size=2)
            assert cosine_similarity(x, y) == pytest.approx(cosine_similarity(y, x), abs=1e-12)
            assert cosine_similarity(alpha * x, beta * y) == pytest.approx(
                cosine_similarity(x, y), abs=1e-10
            )

    def test_bounded(self, rng):
        for _ in range(200):
            x = rng.normal(size=4)
            y = rng.normal(size=4)
            assert -1.0 - 1e-12 <= cosine_similarity(x, y) <= 1.0 + 1e-12


class TestKnn:
    def test_k_at_least_n_returns_full_ordering(self):
        corpus = build_corpus([
            ("v1", [1.0, 0.0], {"a"}),
            ("v2", [0.0, 1.0], {"a"}),
            ("v3", [1.0, 1.0], {"a"}),
        ])
        result = knn(corpus, [1.0, 0.0], k=10)
        assert result.ids() == ("v1", "v3", "v2")
        assert len(result) == 3

    def test_self_is_nearest(self):
        corpus = build_corpus([
            ("v1", [1.0, 0.0], {"a"}),
            ("v2", [0.3, 1.0], {"a"}),
        ])
        result = knn(corpus, [1.0, 0.0], k=1)
        assert result.entries == (("v1", 1.0),)

    def test_exclude(self):
        corpus = build_corpus([
            ("v1", [1.0, 0.0], {"a"}),
            ("v2", [0.3, 1.0], {"a"}),
        ])
        assert knn(corpus, [1.0, 0.0], k=1, exclude="v1").ids() == ("v2",)

    def test_tie_break_is_ascending_id(self):
        corpus = build_corpus([
            ("vb", [1.0, 0.0], {"a"}),
            ("va", [2.0, 0.0], {"a"}),
            ("vc", [0.5, 0.0], {"a"}),
        ])
        # All three are collinear: similarity ties at 1.0, order falls back to id.
        assert knn(corpus, [3.0, 0.0], k=3).ids() == ("va", "vb", "vc")

    def test_matches_brute_force_oracle(self, rng):
        for trial in range(15):
            n = int(rng.integers(2, 200))
            corpus, ids, features, _ = make_random_corpus(rng, n, 6, 5)
            query = rng.normal(size=5)
            k = int(rng.integers(1, n + 1))
            expected = knn_oracle(ids, features, list(map(float, query)), k)
            got = knn(corpus, query, k=k)
            assert got.ids() == tuple(vid for vid, _ in expected)
            for (_, sim_got), (_, sim_want) in zip(got.entries, expected):
                assert sim_got == pytest.approx(sim_want, abs=1e-12)

    def test_prefix_property(self, rng):
        corpus, _, _, _ = make_random_corpus(rng, 40, 6, 4)
        query = rng.normal(size=4)
        previous = knn(corpus, query, k=1).ids()
        for k in range(2, 15):
            current = knn(corpus, query, k=k).ids()
            assert current[:len(previous)] == previous
            previous = current

    def test_similarities_non_increasing(self, rng):
        corpus, _, _, _ = make_random_corpus(rng, 50, 6, 4)
        sims = knn(corpus, rng.normal(size=4), k=50).similarities()
        assert all(a >= b for a, b in zip(sims, sims[1:]))

    def test_dimension_mismatch(self):
        corpus = build_corpus([("v1", [1.0, 0.0], {"a"})])
        with pytest.raises(DimensionMismatch):
            knn(corpus, [1.0, 0.0, 0.0], k=1)


class TestAllSimilarities:
    def test_singleton(self):
        corpus = build_corpus([("v1", [1.0, 1.0], {"a"})])
        assert all_similarities(corpus, [1.0, 1.0]) == [("v1", pytest.approx(1.0))]

    def test_orthogonal_query(self):
        corpus = build_corpus([
            ("v1", [1.0, 0.0, 0.0], {"a"}),
            ("v2", [0.0, 1.0, 0.0], {"a"}),
        ])
        assert [s for _, s in all_similarities(corpus, [0.0, 0.0, 1.0])] == [0.0, 0.0]

    def test_agrees_with_pairwise_cosine(self, rng):
        corpus, ids, _, _ = make_random_corpus(rng, 30, 6, 5)
        query = rng.normal(size=5)
        pairs = all_similarities(corpus, query)
        assert [vid for vid, _ in pairs] == list(ids)
        for vid, sim in pairs:
            assert sim == pytest.approx(
                cosine_similarity(query, corpus.feature(vid)), abs=1e-12
            )
