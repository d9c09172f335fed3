"""Config files, the training loop, determinism, and suite grids."""

import os

import numpy as np
import pytest

from moodbridge.errors import ConfigError
from moodbridge.experiment import (
    ExperimentConfig,
    evaluate_checkpoint,
    load_experiment,
    run_suite,
    run_training,
    suite_table,
    train,
)
from moodbridge.features import (
    default_synth_spec,
    synth_generate,
    synth_vad_lexicon,
    synth_word_embeddings,
    write_features,
    write_vad_lexicon,
    write_word_embeddings,
)
from moodbridge.models import load_checkpoint
from moodbridge.taxonomy import MANUAL, TaxonomyMap, write_map_tsv


@pytest.fixture(scope="module")
def small_corpus_dir(tmp_path_factory):
    """A small synthetic corpus shared by the tests in this module."""
    d = tmp_path_factory.mktemp("corpus")
    spec = default_synth_spec(seed=5, per_text_tag=20, per_music_tag=15)
    corpus = synth_generate(spec, seed=5)
    write_features(corpus.text, d / "text.features")
    write_features(corpus.music, d / "music.features")
    write_word_embeddings(synth_word_embeddings(spec), d / "tags.w2v")
    write_vad_lexicon(synth_vad_lexicon(spec), d / "tags.vad")
    truth = TaxonomyMap(MANUAL, {t: (m,) for t, m in corpus.mapping.items()},
                        provenance="synthetic ground truth")
    write_map_tsv(truth, d / "map.tsv")
    return d


def base_config(d, out, **overrides):
    values = {
        "text_features": str(d / "text.features"),
        "music_features": str(d / "music.features"),
        "embeddings": str(d / "tags.w2v"),
        "lexicon": str(d / "tags.vad"),
        "map_file": str(d / "map.tsv"),
        "out_dir": str(out),
        "scheme": "w2v",
        "seed": "7",
        "max_epochs": "3",
        "patience": "10",
        "hidden": "32,32",
        "embedding_dim": "16",
    }
    values.update({k: str(v) for k, v in overrides.items()})
    return ExperimentConfig(values)


class TestConfigFiles:
    def test_parse_with_comments(self, tmp_path):
        path = tmp_path / "exp.config"
        path.write_text("# a comment\n"
                        "strategy = metric_2branch   # inline comment\n"
                        "seed = 3\n"
                        "\n"
                        "lr = 0.001\n")
        cfg = ExperimentConfig.from_file(path)
        assert cfg.strategy == "metric_2branch"
        assert cfg.seed == 3
        assert cfg.lr == pytest.approx(0.001)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            ExperimentConfig({"learning_rate": "0.1"})

    def test_bad_number_rejected(self):
        cfg = ExperimentConfig({"lr": "fast"})
        with pytest.raises(ConfigError, match="not a number"):
            cfg.lr

    def test_nonpositive_lr_rejected(self):
        cfg = ExperimentConfig({"lr": "0"})
        with pytest.raises(ConfigError):
            cfg.lr

    def test_ratio_sum_enforced(self):
        cfg = ExperimentConfig({"split_ratios": "0.8,0.3,0.1"})
        with pytest.raises(ConfigError, match="summing to 1"):
            cfg.split_ratios

    def test_digest_ignores_formatting(self, tmp_path):
        p1 = tmp_path / "a.config"
        p2 = tmp_path / "b.config"
        p1.write_text("seed = 3\nlr=0.001\n")
        p2.write_text("# different layout\nlr =   0.001\nseed=3\n")
        assert (ExperimentConfig.from_file(p1).digest()
                == ExperimentConfig.from_file(p2).digest())

    def test_digest_changes_with_values(self):
        a = ExperimentConfig({"seed": "3"})
        b = ExperimentConfig({"seed": "4"})
        assert a.digest() != b.digest()

    def test_write_read_round_trip(self, tmp_path):
        cfg = ExperimentConfig({"seed": "11", "strategy": "va_regression"})
        path = tmp_path / "rt.config"
        cfg.write(path)
        assert ExperimentConfig.from_file(path).values == cfg.values

    def test_missing_file_path_rejected(self, tmp_path):
        cfg = ExperimentConfig({"text_features": str(tmp_path / "nope.features")})
        with pytest.raises(ConfigError, match="not found"):
            load_experiment(cfg)


class TestTrain:
    def test_zero_epochs_keeps_initial_params(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out", max_epochs=0)
        result = train(cfg)
        assert result.best_epoch == 0
        assert result.log == []
        # params equal a fresh initialization with the same seed
        exp = load_experiment(cfg)
        from moodbridge.models import init_model
        fresh = init_model(exp.strategy, exp.text.dim, exp.music.dim,
                           exp.text_vocab, exp.music_vocab,
                           exp.embeddings.dim)
        for name, mlp in fresh.branches.items():
            for w1, w2 in zip(mlp.weights, result.params.branches[name].weights):
                assert np.array_equal(w1, w2)

    def test_validation_improves_over_epoch_zero(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out",
                          strategy="metric_3branch", max_epochs=4)
        result = train(cfg)
        epoch0 = result.log[0]["val_macro_mrr"]
        assert result.best_val_mrr > epoch0

    def test_determinism_byte_identical_artifacts(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out",
                          strategy="metric_2branch", max_epochs=2)
        outputs = []
        for _ in range(2):
            ckpt, log_path = run_training(cfg)
            report = evaluate_checkpoint(cfg, ckpt)
            outputs.append((open(ckpt, "rb").read(),
                            open(log_path, "rb").read(),
                            report.to_json()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == outputs[1][1]
        assert outputs[0][2] == outputs[1][2]

    def test_checkpoint_carries_config_digest(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out", max_epochs=1)
        ckpt, _ = run_training(cfg)
        _, _, meta = load_checkpoint(ckpt)
        assert meta["config_digest"] == cfg.digest()

    def test_early_stopping_respects_patience(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out",
                          strategy="metric_2branch", max_epochs=30, patience=2)
        result = train(cfg)
        last_epoch = result.log[-1]["epoch"]
        assert last_epoch <= result.best_epoch + 2


class TestSuite:
    def test_single_config_single_row(self, small_corpus_dir, tmp_path):
        cfg = base_config(small_corpus_dir, tmp_path / "out",
                          strategy="va_regression", max_epochs=2)
        schemes, rows = run_suite([cfg], schemes=["w2v"])
        assert len(rows) == 1
        assert rows[0][0] == "va_regression"

    def test_grid_cells_in_range(self, small_corpus_dir, tmp_path):
        configs = [base_config(small_corpus_dir, tmp_path / "out",
                               strategy=s, max_epochs=2)
                   for s in ("classifier", "metric_2branch")]
        schemes, rows = run_suite(configs, schemes=["va", "w2v", "manual"])
        assert len(rows) == 2
        for _, cells in rows:
            for scheme in schemes:
                p5, mrr = cells[scheme]
                assert 0.0 <= p5 <= 1.0 and 0.0 <= mrr <= 1.0

    def test_incompatible_configs_rejected(self, small_corpus_dir, tmp_path):
        a = base_config(small_corpus_dir, tmp_path / "out")
        b = base_config(small_corpus_dir, tmp_path / "out", split_seed="99")
        with pytest.raises(ConfigError, match="disagree"):
            run_suite([a, b])

    def test_table_format(self):
        table = suite_table(["W2V"], [("classifier", {"W2V": (0.0, 0.0)})],
                            digest="abc123")
        lines = table.strip().splitlines()
        assert lines[0] == "# config_digest: abc123"
        assert lines[1] == "strategy\tw2v_p5\tw2v_mrr"
        assert lines[2] == "classifier\t0.0000\t0.0000"
