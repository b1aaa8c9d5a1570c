import json

import pytest

from tagbook import load_corpus_dir
from tagbook.cli import main, read_ranking, read_tagbooks
from tagbook.config import parse_config_file, resolve_config


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def synth_dir(tmp_path):
    data = tmp_path / "data"
    code = run("--quiet", "synth", "--events", 3, "--videos-per-event", 5,
               "--background", 40, "--dim", 6, "--tags", 40, "--signature-size", 3,
               "--train-positives", 2, "--train-negatives", 4, "--out", data)
    assert code == 0
    return data


@pytest.fixture
def corpus_dir(synth_dir, tmp_path):
    out = tmp_path / "corpus"
    assert run("--quiet", "build", "--features", synth_dir / "source_features.jsonl",
               "--annotations", synth_dir / "source_annotations.jsonl", "--out", out) == 0
    return out


class TestSynthCommand:
    def test_outputs_exist(self, synth_dir):
        for name in ("source_features.jsonl", "source_annotations.jsonl",
                     "test_features.jsonl", "events.jsonl", "judgments.jsonl",
                     "few_labels.jsonl"):
            assert (synth_dir / name).exists()

    def test_feature_file_has_header(self, synth_dir):
        first = json.loads((synth_dir / "source_features.jsonl").read_text().splitlines()[0])
        assert first == {"dim": 6}

    def test_training_ids_not_in_eval_judgments(self, synth_dir):
        train = [json.loads(line) for line in (synth_dir / "few_labels.jsonl").read_text().splitlines()]
        judged = [json.loads(line) for line in (synth_dir / "judgments.jsonl").read_text().splitlines()]
        trained = {(r["event_id"], r["video_id"]) for r in train}
        assert all((r["event_id"], r["video_id"]) not in trained for r in judged)


class TestBuildCommand:
    def test_builds_loadable_corpus(self, corpus_dir):
        corpus = load_corpus_dir(corpus_dir)
        assert corpus.n_videos == 3 * 5 + 40
        assert corpus.dim == 6

    def test_frame_level_features_pool_to_same_corpus(self, tmp_path):
        flat = tmp_path / "flat.jsonl"
        frames = tmp_path / "frames.jsonl"
        annotations = tmp_path / "ann.jsonl"
        flat.write_text(
            '{"id": "v1", "feature": [1.0, 3.0]}\n{"id": "v2", "feature": [2.0, 2.0]}\n')
        frames.write_text(
            '{"id": "v1", "frames": [[0.0, 2.0], [2.0, 4.0]]}\n'
            '{"id": "v2", "frames": [[2.0, 2.0]]}\n')
        annotations.write_text('{"id": "v1", "tags": ["dog"]}\n{"id": "v2", "tags": ["cat"]}\n')
        assert run("--quiet", "build", "--features", flat, "--annotations", annotations,
                   "--out", tmp_path / "a") == 0
        assert run("--quiet", "build", "--features", frames, "--annotations", annotations,
                   "--out", tmp_path / "b") == 0
        assert load_corpus_dir(tmp_path / "a") == load_corpus_dir(tmp_path / "b")

    def test_malformed_line_fails_with_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"id": "v1", "feature": [1.0]}\n{broken\n')
        annotations = tmp_path / "ann.jsonl"
        annotations.write_text('{"id": "v1", "tags": ["dog"]}\n')
        assert run("build", "--features", bad, "--annotations", annotations,
                   "--out", tmp_path / "out") == 1
        err = capsys.readouterr().err
        assert err.startswith("error: ")
        assert "2" in err and "bad.jsonl" in err
        assert err.count("\n") == 1

    def test_missing_file_fails(self, tmp_path, capsys):
        assert run("build", "--features", tmp_path / "nope.jsonl",
                   "--annotations", tmp_path / "nope2.jsonl", "--out", tmp_path / "o") == 1


class TestPipeline:
    def test_refine_tagbook_detect_eval_describe(self, synth_dir, corpus_dir, tmp_path):
        assert run("--quiet", "refine", "--corpus", corpus_dir, "--k-r", 8) == 0
        assert (corpus_dir / "relevance.tbrm").exists()
        assert (corpus_dir / "relevance.json").exists()

        tagbooks = tmp_path / "tagbooks.jsonl"
        assert run("--quiet", "tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "refine", "--k", 15, "--out", tagbooks) == 0
        header, vectors = read_tagbooks(tagbooks)
        assert header["variant"] == "refine"
        assert len(vectors) == 15

        zero_dir = tmp_path / "zero"
        assert run("--quiet", "detect", "--corpus", corpus_dir, "--tagbooks", tagbooks,
                   "--events", synth_dir / "events.jsonl", "--mode", "zero",
                   "--out", zero_dir) == 0
        ranking = read_ranking(zero_dir / "rankings" / "e00.tsv")
        assert len(ranking) == 15  # zero mode with no judgments ranks everything

        few_dir = tmp_path / "few"
        assert run("--quiet", "detect", "--corpus", corpus_dir, "--tagbooks", tagbooks,
                   "--events", synth_dir / "events.jsonl",
                   "--judgments", synth_dir / "few_labels.jsonl", "--mode", "few",
                   "--svm-epochs", 40, "--out", few_dir) == 0
        ranking = read_ranking(few_dir / "rankings" / "e00.tsv")
        assert len(ranking) == 15 - 6  # 2 positives + 4 negatives excluded

        report_path = tmp_path / "report.json"
        assert run("--quiet", "eval", "--rankings", zero_dir / "rankings",
                   "--judgments", synth_dir / "judgments.jsonl",
                   "--out", report_path) == 0
        report = json.loads(report_path.read_text())
        assert set(report) == {"e00", "e01", "e02", "map"}
        assert 0.0 <= report["map"] <= 1.0

        described = tmp_path / "described"
        assert run("--quiet", "describe", "--tagbooks", tagbooks, "--kappa", 5,
                   "--out", described) == 0
        rows = [json.loads(line) for line in
                (described / "descriptions.jsonl").read_text().splitlines()]
        assert len(rows) == 15
        assert all(len(r["tags"]) == 5 for r in rows)

    def test_few_mode_requires_judgments(self, synth_dir, corpus_dir, tmp_path, capsys):
        tagbooks = tmp_path / "tagbooks.jsonl"
        assert run("--quiet", "tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "soft", "--k", 15, "--out", tagbooks) == 0
        assert run("detect", "--corpus", corpus_dir, "--tagbooks", tagbooks,
                   "--events", synth_dir / "events.jsonl", "--mode", "few",
                   "--out", tmp_path / "out") == 1
        assert "judgments" in capsys.readouterr().err

    def test_refine_variant_requires_relevance(self, synth_dir, corpus_dir, tmp_path, capsys):
        assert run("tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "refine", "--out", tmp_path / "t.jsonl") == 1
        assert "refine" in capsys.readouterr().err

    def test_cli_matches_in_process_pipeline(self, synth_dir, corpus_dir, tmp_path):
        from tagbook import (PropagationConfig, propagate_batch, rank_videos,
                             zero_example_model)
        from tagbook.corpus import read_feature_file as read_features

        tagbooks = tmp_path / "tagbooks.jsonl"
        assert run("--quiet", "tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "soft", "--k", 15, "--out", tagbooks) == 0
        zero_dir = tmp_path / "zero"
        assert run("--quiet", "detect", "--corpus", corpus_dir, "--tagbooks", tagbooks,
                   "--events", synth_dir / "events.jsonl", "--mode", "zero",
                   "--out", zero_dir) == 0

        corpus = load_corpus_dir(corpus_dir)
        ids, feats = read_features(synth_dir / "test_features.jsonl")
        vectors = propagate_batch(corpus, list(zip(ids, feats)),
                                  PropagationConfig(variant="soft", k=15))
        events = [json.loads(line) for line in
                  (synth_dir / "events.jsonl").read_text().splitlines()]
        for event in events:
            model = zero_example_model(event["event_id"], event["description"],
                                       corpus.vocabulary, corpus.stoplist)
            expected = rank_videos(vectors, model)
            from_file = read_ranking(zero_dir / "rankings" / f"{event['event_id']}.tsv")
            assert from_file.entries == expected.entries

    def test_reduction_frequent(self, synth_dir, corpus_dir, tmp_path):
        tagbooks = tmp_path / "tagbooks.jsonl"
        assert run("--quiet", "tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "soft", "--k", 15,
                   "--reduction", "frequent", "--reduction-size", 10,
                   "--out", tagbooks) == 0
        header, vectors = read_tagbooks(tagbooks)
        assert header["m"] == 10
        assert len(header["tags"]) == 10

    def test_reduction_pca(self, synth_dir, corpus_dir, tmp_path, capsys):
        tagbooks = tmp_path / "tagbooks.jsonl"
        assert run("--quiet", "tagbook", "--corpus", corpus_dir,
                   "--features", synth_dir / "test_features.jsonl",
                   "--variant", "soft", "--k", 15,
                   "--reduction", "pca", "--reduction-size", 5,
                   "--pca-out", tmp_path / "pca.tbpc", "--out", tagbooks) == 0
        header, vectors = read_tagbooks(tagbooks)
        assert header["m"] == 5
        assert header["tags"] is None
        assert (tmp_path / "pca.tbpc").exists()
        # No tag axes: describing PCA-reduced vectors must fail cleanly.
        assert run("describe", "--tagbooks", tagbooks, "--kappa", 3,
                   "--out", tmp_path / "d") == 1
        assert "tag axes" in capsys.readouterr().err


class TestConfigFile:
    def test_parse_types(self, tmp_path):
        cfg = tmp_path / "tagbook.cfg"
        cfg.write_text(
            "# propagation\nk = 40\nvariant = \"hard\"\nsvm_lambda = 0.5\n"
            "normalize_inputs = true\nstoplist = 'stop.txt'\n")
        values = parse_config_file(cfg)
        assert values == {"k": 40, "variant": "hard", "svm_lambda": 0.5,
                          "normalize_inputs": True, "stoplist": "stop.txt"}

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "tagbook.cfg"
        cfg.write_text("mystery = 1\n")
        with pytest.raises(Exception, match="mystery"):
            parse_config_file(cfg)

    def test_flags_beat_file_beats_defaults(self, tmp_path):
        cfg = tmp_path / "tagbook.cfg"
        cfg.write_text("k = 40\nkappa = 9\n")
        resolved = resolve_config(cfg, {"k": 7})
        assert resolved.propagation.k == 7      # flag wins
        assert resolved.kappa == 9              # file beats default
        assert resolved.propagation.k_r == 500  # default

    def test_invalid_value_rejected_before_running(self, tmp_path, capsys):
        cfg = tmp_path / "tagbook.cfg"
        cfg.write_text("variant = \"fuzzy\"\n")
        assert run("--config", cfg, "synth", "--out", tmp_path / "d") == 1
        assert "variant" in capsys.readouterr().err

    def test_config_feeds_commands(self, synth_dir, tmp_path):
        cfg = tmp_path / "tagbook.cfg"
        cfg.write_text("min_df = 2\n")
        out = tmp_path / "corpus"
        assert run("--quiet", "--config", cfg, "build",
                   "--features", synth_dir / "source_features.jsonl",
                   "--annotations", synth_dir / "source_annotations.jsonl",
                   "--out", out) == 0
        assert load_corpus_dir(out).min_df == 2


class TestUsage:
    def test_no_command_prints_help(self, capsys):
        assert run() == 2
        assert "command" in capsys.readouterr().out

    def test_quiet_suppresses_progress(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "corpus"
        assert run("--quiet", "build", "--features", synth_dir / "source_features.jsonl",
                   "--annotations", synth_dir / "source_annotations.jsonl",
                   "--out", out) == 0
        assert capsys.readouterr().out == ""
