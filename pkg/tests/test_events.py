import numpy as np
import pytest

from tagbook import (
    EventModel,
    LabeledSet,
    SvmConfig,
    load_model,
    rank_videos,
    save_model,
    score,
    train_few_example,
    zero_example_model,
)
from tagbook.corpus import TagVocabulary
from tagbook.errors import DegenerateData, DimensionMismatch, EmptyModel, IntegrityError
from tagbook.events import read_event_definitions, read_judgments


def separable_set(rng, p=20, m=10, margin=0.5):
    """Labels from a planted hyperplane with a guaranteed margin (both classes present)."""
    w_star = rng.normal(size=m)
    w_star /= np.linalg.norm(w_star)
    while True:
        samples = []
        while len(samples) < p:
            x = rng.normal(size=m)
            projection = float(w_star @ x)
            if abs(projection) < margin:
                continue
            samples.append((f"v{len(samples):03d}", x, 1 if projection > 0 else -1))
        if len({label for _, _, label in samples}) == 2:
            return LabeledSet(samples=tuple(samples))


class TestZeroExampleModel:
    vocabulary = TagVocabulary(["dog", "show", "cat"])

    def test_description_tokens_become_ones(self):
        model = zero_example_model("e1", "Dog show highlights", self.vocabulary)
        np.testing.assert_array_equal(model.vector, [1.0, 1.0, 0.0])
        assert model.mode == "zero"

    def test_no_vocabulary_overlap(self):
        with pytest.raises(EmptyModel):
            zero_example_model("e1", "quantum finance", self.vocabulary)

    def test_repetition_does_not_weight(self):
        model = zero_example_model("e1", "dog dog dog", self.vocabulary)
        np.testing.assert_array_equal(model.vector, [1.0, 0.0, 0.0])

    def test_stoplist_applies(self):
        model = zero_example_model("e1", "the dog", self.vocabulary, stoplist={"the"})
        np.testing.assert_array_equal(model.vector, [1.0, 0.0, 0.0])

    def test_permutation_equivariant(self, rng):
        tags = ["dog", "show", "cat", "park", "leash"]
        description = "dog park leash highlights"
        base = zero_example_model("e", description, TagVocabulary(tags))
        for _ in range(10):
            perm = rng.permutation(len(tags))
            permuted_vocab = TagVocabulary([tags[i] for i in perm])
            permuted = zero_example_model("e", description, permuted_vocab)
            np.testing.assert_array_equal(permuted.vector, base.vector[perm])


class TestTrainFewExample:
    def test_two_point_sign_pattern(self):
        data = LabeledSet(samples=(
            ("p", np.array([1.0, 0.0]), 1),
            ("n", np.array([0.0, 1.0]), -1),
        ))
        model = train_few_example("e", data, SvmConfig(regularization=0.01, epochs=200))
        assert model.vector[0] > 0 > model.vector[1]
        assert model.mode == "few"

    def test_all_positive_is_degenerate(self):
        data = LabeledSet(samples=(("a", np.ones(3), 1), ("b", np.ones(3), 1)))
        with pytest.raises(DegenerateData):
            train_few_example("e", data)

    def test_bad_label_rejected(self):
        with pytest.raises(ValueError):
            LabeledSet(samples=(("a", np.ones(3), 2),))

    def test_ragged_vectors_rejected(self):
        data = LabeledSet(samples=(("a", np.ones(3), 1), ("b", np.ones(4), -1)))
        with pytest.raises(DimensionMismatch):
            train_few_example("e", data)

    def test_separable_sets_reach_perfect_training_accuracy(self, rng):
        for trial in range(10):
            data = separable_set(np.random.default_rng(100 + trial))
            model = train_few_example("e", data, SvmConfig(seed=trial))
            x = np.vstack([vector for _, vector, _ in data.samples])
            y = np.array([label for _, _, label in data.samples])
            assert np.all(np.sign(x @ model.vector) == y)

    def test_deterministic_given_seed(self, rng):
        data = separable_set(rng)
        first = train_few_example("e", data, SvmConfig(seed=3))
        second = train_few_example("e", data, SvmConfig(seed=3))
        np.testing.assert_array_equal(first.vector, second.vector)
        assert first.training_meta == second.training_meta

    def test_objective_running_average_non_increasing(self, rng):
        for trial in range(5):
            data = separable_set(np.random.default_rng(200 + trial))
            model = train_few_example("e", data, SvmConfig(seed=trial))
            epoch_objectives = np.array(model.training_meta["epoch_objectives"])
            running = np.cumsum(epoch_objectives) / np.arange(1, len(epoch_objectives) + 1)
            # After the first epoch the running average must not rise.
            assert np.all(np.diff(running[1:]) <= 1e-6)

    def test_weights_stay_in_sample_span(self, rng):
        # Samples live in a 3-dimensional subspace of a 10-dimensional tag space;
        # subgradient updates are combinations of samples, so w must stay inside.
        basis = np.linalg.qr(rng.normal(size=(10, 3)))[0].T
        samples = []
        for i in range(12):
            coeffs = rng.normal(size=3)
            samples.append((f"v{i}", coeffs @ basis, 1 if i % 2 == 0 else -1))
        model = train_few_example("e", LabeledSet(samples=tuple(samples)),
                                  SvmConfig(regularization=0.01, epochs=50))
        reconstructed = (model.vector @ basis.T) @ basis
        np.testing.assert_allclose(model.vector, reconstructed, atol=1e-9)

    def test_normalize_inputs_changes_model(self, rng):
        data = separable_set(rng)
        raw = train_few_example("e", data, SvmConfig(seed=0))
        normalized = train_few_example("e", data, SvmConfig(seed=0, normalize_inputs=True))
        assert not np.allclose(raw.vector, normalized.vector)

    def test_track_objective_off_skips_trace(self, rng):
        data = separable_set(rng)
        model = train_few_example("e", data, SvmConfig(track_objective=False))
        assert "epoch_objectives" not in model.training_meta

    def test_meta_records_hyperparameters(self, rng):
        data = separable_set(rng)
        hyper = SvmConfig(regularization=0.02, epochs=7, seed=9)
        meta = train_few_example("e", data, hyper).training_meta
        assert meta["regularization"] == 0.02
        assert meta["epochs"] == 7
        assert meta["seed"] == 9
        assert meta["steps"] == 7 * data.p


class TestScore:
    def test_identical_vectors(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 2.0]), mode="zero")
        assert score([1.0, 2.0], model) == pytest.approx(1.0)

    def test_orthogonal(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0]), mode="zero")
        assert score([0.0, 1.0], model) == 0.0

    def test_partial_overlap(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0, 0.0]), mode="zero")
        assert score([1.0, 1.0, 0.0], model) == pytest.approx(1 / np.sqrt(2))

    def test_dimension_mismatch(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0]), mode="zero")
        with pytest.raises(DimensionMismatch):
            score([1.0, 0.0, 0.0], model)


class TestRankVideos:
    def test_singleton(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0]), mode="zero")
        ranked = rank_videos([("v1", np.array([1.0, 0.0]))], model)
        assert ranked.ids() == ("v1",)

    def test_orders_by_score(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0]), mode="zero")
        ranked = rank_videos([
            ("low", np.array([0.1, 1.0])),
            ("high", np.array([1.0, 0.1])),
        ], model)
        assert ranked.ids() == ("high", "low")

    def test_ties_break_on_ascending_id(self):
        model = EventModel(event_id="e", vector=np.array([1.0, 0.0]), mode="zero")
        ranked = rank_videos([
            ("vb", np.array([2.0, 0.0])),
            ("va", np.array([1.0, 0.0])),
        ], model)
        assert ranked.ids() == ("va", "vb")

    def test_agrees_with_score_then_sort(self, rng):
        model = EventModel(event_id="e", vector=rng.normal(size=6), mode="zero")
        test = [(f"v{i:02d}", rng.normal(size=6)) for i in range(50)]
        ranked = rank_videos(test, model)
        expected = sorted(((vid, score(vec, model)) for vid, vec in test),
                          key=lambda entry: (-entry[1], entry[0]))
        assert list(ranked.entries) == expected

    def test_scaling_model_vector_changes_nothing(self, rng):
        vector = rng.normal(size=5)
        test = [(f"v{i}", rng.normal(size=5)) for i in range(20)]
        base = rank_videos(test, EventModel(event_id="e", vector=vector, mode="few"))
        scaled = rank_videos(test, EventModel(event_id="e", vector=2.5 * vector, mode="few"))
        assert base.ids() == scaled.ids()
        for (_, a), (_, b) in zip(base.entries, scaled.entries):
            assert a == pytest.approx(b, abs=1e-12)

    def test_separable_positives_rank_first(self, rng):
        data = separable_set(rng, p=16, m=8)
        model = train_few_example("e", data, SvmConfig(regularization=0.01, epochs=200))
        x = np.vstack([vector for _, vector, _ in data.samples])
        # Equal-norm vectors make the cosine ranking agree with the margin ranking.
        x = x / np.linalg.norm(x, axis=1, keepdims=True)
        margins = x @ model.vector
        labels = np.array([label for _, _, label in data.samples])
        assert margins[labels == 1].min() > margins[labels == -1].max()
        ranked = rank_videos(
            [(f"v{i:03d}", x[i]) for i in range(len(labels))], model
        )
        top = ranked.ids()[:int((labels == 1).sum())]
        positives = {f"v{i:03d}" for i in np.flatnonzero(labels == 1)}
        assert set(top) == positives


class TestModelPersistence:
    def test_round_trip(self, rng, tmp_path):
        data = separable_set(rng)
        vocabulary = TagVocabulary([f"t{i}x" for i in range(10)])
        model = train_few_example("e7", data, SvmConfig(epochs=5))
        save_model(model, tmp_path / "model.json", vocabulary)
        loaded = load_model(tmp_path / "model.json", vocabulary)
        assert loaded.event_id == model.event_id
        assert loaded.mode == model.mode
        np.testing.assert_array_equal(loaded.vector, model.vector)
        assert loaded.training_meta == model.training_meta

    def test_vocabulary_mismatch_rejected(self, rng, tmp_path):
        model = EventModel(event_id="e", vector=np.zeros(3), mode="zero")
        save_model(model, tmp_path / "model.json", TagVocabulary(["aa", "bb", "cc"]))
        with pytest.raises(IntegrityError):
            load_model(tmp_path / "model.json", TagVocabulary(["aa", "bb", "dd"]))


class TestEventFileReaders:
    def test_event_definitions(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text(
            '{"event_id": "e1", "name": "Dog show", "description": "dog show"}\n'
            '{"event_id": "e2", "description": "parade"}\n'
        )
        events = read_event_definitions(path)
        assert [e["event_id"] for e in events] == ["e1", "e2"]
        assert events[1]["name"] == "e2"

    def test_duplicate_event_rejected(self, tmp_path):
        path = tmp_path / "events.jsonl"
        path.write_text(
            '{"event_id": "e1", "description": "a"}\n'
            '{"event_id": "e1", "description": "b"}\n'
        )
        with pytest.raises(Exception, match="duplicate"):
            read_event_definitions(path)

    def test_judgments(self, tmp_path):
        path = tmp_path / "judgments.jsonl"
        path.write_text(
            '{"event_id": "e1", "video_id": "v1", "label": 1}\n'
            '{"event_id": "e1", "video_id": "v2", "label": -1}\n'
            '{"event_id": "e1", "video_id": "v3", "label": 0}\n'
        )
        labels = read_judgments(path)
        assert labels == {"e1": {"v1": 1, "v2": -1, "v3": 0}}

    def test_bad_label_rejected(self, tmp_path):
        path = tmp_path / "judgments.jsonl"
        path.write_text('{"event_id": "e1", "video_id": "v1", "label": 5}\n')
        with pytest.raises(Exception, match="label"):
            read_judgments(path)
