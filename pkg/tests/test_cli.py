import csv
import json
from pathlib import Path

import pytest
from filelock import FileLock

from conftest import SMALL
from newsdowngrade.cli import COMMANDS, load_run_config, main
from newsdowngrade.errors import ConfigError

FAST_CONFIG = {
    "generator": SMALL,
    "pipeline": {
        "lexicon_lda": {"n_topics": 10, "iterations": 20, "burn_in": 5, "samples": 2},
        "doc2vec": {"dim": 16, "epochs": 2, "infer_steps": 3},
    },
    "k_grid": [2, 4],
    "topic_iterations": 20,
    "n_seeds": 3,
}


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli")
    config = out / "config.json"
    config.write_text(json.dumps(FAST_CONFIG))
    assert main(["synth", "--config", str(config), "--out-dir", str(out)]) == 0
    return out, config


def run(workdir, *args):
    out, config = workdir
    return main([*args, "--config", str(config), "--out-dir", str(out)])


class TestCommands:
    def test_synth_outputs(self, workdir):
        out, _ = workdir
        for name in ("articles.jsonl", "ratings.csv", "benchmark.csv", "vectors.vec", "truth_manifest.json",
                     "manifest_synth.json", "run_info_synth.json"):
            assert (out / name).exists(), name

    def test_preprocess_and_label(self, workdir):
        out, _ = workdir
        assert run(workdir, "preprocess") == 0
        stats = json.loads((out / "preprocess_stats.json").read_text())
        assert stats["documents_out"] > 0
        assert run(workdir, "label") == 0
        labels = _rows(out / "labels.csv")
        assert labels[0] == ["pid", "date", "current_notch", "worst_future_notch", "label"]
        assert len(labels) - 1 == SMALL["n_companies"] * SMALL["n_days"]

    @pytest.mark.parametrize("flag,name,width", [("lexicon-lda", "lexicon_lda", 17),
                                                 ("doc2vec", "doc2vec", 16),
                                                 ("wordvec-avg", "wordvec_average", 50)])
    def test_featurize(self, workdir, flag, name, width):
        out, _ = workdir
        assert run(workdir, "featurize", "--approach", flag) == 0
        header = _rows(out / f"features_{name}.csv")[0]
        assert header[:3] == ["pid", "date", "label"] and len(header) - 3 == width

    def test_train_then_evaluate(self, workdir, capsys):
        out, _ = workdir
        assert run(workdir, "train") == 0
        assert (out / "model_news_wordvec_average.json").exists()
        assert run(workdir, "evaluate") == 0
        train = json.loads((out / "metrics_news.json").read_text())
        ev = json.loads((out / "metrics_eval_news.json").read_text())
        assert ev == train

    def test_evaluate_perfect_fixture(self, workdir, tmp_path, capsys):
        scores = tmp_path / "scores_perfect.csv"
        scores.write_text("pid,date,score,label\na,2019-01-01,0.9,1\nb,2019-01-01,0.8,1\n"
                          "c,2019-01-01,0.2,0\nd,2019-01-01,0.1,0\n")
        assert main(["evaluate", "--scores", str(scores), "--out-dir", str(tmp_path)]) == 0
        assert "AUC 1.0000" in capsys.readouterr().out
        assert json.loads((tmp_path / "metrics_eval_perfect.json").read_text())["auc"] == 1.0

    def test_stack(self, workdir):
        out, _ = workdir
        assert run(workdir, "stack") == 0
        assert len(_rows(out / "stacked_features.csv")[0]) == 3 + 10
        assert [r[0] for r in _rows(out / "auc_comparison.csv")[1:]] == ["benchmark", "news", "final"]
        for name in ("auc_comparison.svg", "gains.svg", "gains_final.csv", "gains_benchmark.csv"):
            assert (out / name).exists()

    def test_robustness_twenty_seeds(self, workdir):
        out, _ = workdir
        assert run(workdir, "robustness", "--seeds", "20") == 0
        hist = _rows(out / "robustness_histogram.csv")
        assert hist[0] == ["bin_left", "bin_right", "count"]
        assert sum(int(r[2]) for r in hist[1:]) == 20
        assert len(_rows(out / "robustness_gains.csv")) == 21
        assert json.loads((out / "manifest_robustness.json").read_text())["seeds"]["robustness"] == list(range(20))

    def test_report(self, workdir):
        out, _ = workdir
        assert run(workdir, "report") == 0
        data = json.loads((out / "inspection.json").read_text())
        assert set(data) == {"summary", "true_positives", "false_negatives"}
        assert "TRUE POSITIVES" in (out / "inspection.txt").read_text()

    def test_topics_select(self, workdir):
        out, _ = workdir
        assert run(workdir, "topics-select") == 0
        assert [r[0] for r in _rows(out / "coherence.csv")[1:]] == ["2", "4"]
        assert (out / "coherence.svg").read_text().startswith("<?xml")

    def test_every_command_writes_manifest(self, workdir):
        out, _ = workdir
        done = {p.stem.replace("manifest_", "") for p in out.glob("manifest_*.json")}
        assert done == set(COMMANDS)

    def test_manifest_has_no_clock(self, workdir):
        out, _ = workdir
        m = json.loads((out / "manifest_stack.json").read_text())
        assert set(m) == {"command", "config", "seeds", "artifacts", "metrics"}
        assert "started_utc" in json.loads((out / "run_info_stack.json").read_text())


class TestErrors:
    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"pipeline": {"colour": 1}}))
        assert main(["label", "--config", str(cfg), "--out-dir", str(tmp_path), "--json-errors"]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["exit_code"] == 1 and err["error"] == "ConfigError"

    def test_bad_flag_value(self, tmp_path, capsys):
        assert main(["train", "--approach", "bert", "--out-dir", str(tmp_path)]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_inputs(self, tmp_path):
        assert main(["label", "--out-dir", str(tmp_path)]) == 1

    def test_locked_out_dir(self, tmp_path, capsys):
        with FileLock(str(tmp_path / ".newsdowngrade.lock")):
            assert main(["label", "--out-dir", str(tmp_path), "--json-errors"]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "OutDirLocked"

    def test_single_class_scores_is_validation_error(self, tmp_path):
        scores = tmp_path / "s.csv"
        scores.write_text("pid,date,score,label\na,2019-01-01,0.9,0\nb,2019-01-01,0.8,0\n")
        assert main(["evaluate", "--scores", str(scores), "--out-dir", str(tmp_path)]) == 1

    def test_runtime_failure_exit_two(self, tmp_path, monkeypatch, capsys):
        import newsdowngrade.cli as cli
        from newsdowngrade.errors import NonFinite

        def boom(ctx):
            raise NonFinite("loss diverged")

        monkeypatch.setitem(cli.HANDLERS, "train", boom)
        assert main(["train", "--out-dir", str(tmp_path), "--json-errors"]) == 2
        assert json.loads(capsys.readouterr().err)["error"] == "NonFinite"


class TestRunConfig:
    def test_seed_override(self, tmp_path):
        cfg = load_run_config(None, {"seed": 7, "approach": "doc2vec", "seeds": 4, "threshold": 0.3})
        assert cfg.pipeline.seed == cfg.generator.seed == 7
        assert cfg.pipeline.approach == "doc2vec" and cfg.n_seeds == 4 and cfg.pipeline.threshold == 0.3

    def test_rejects(self, tmp_path):
        bad = tmp_path / "c.json"
        bad.write_text("[1]")
        with pytest.raises(ConfigError):
            load_run_config(bad)
        bad.write_text("{nope")
        with pytest.raises(ConfigError):
            load_run_config(bad)
        with pytest.raises(ConfigError):
            load_run_config(None, {"seeds": 0})
