import json

import numpy as np
import pytest

import newsdowngrade.pipeline as pl
from newsdowngrade.classifier import Dataset
from newsdowngrade.corpus import CleanDocument
from newsdowngrade.errors import ConfigError, JoinKeyMismatch, SingleClass, ValidationError
from newsdowngrade.lexicon import LEXICON_ORDER, Lexicon
from newsdowngrade.pipeline import (
    ApproachConfig,
    PipelineInputs,
    featurize_embedding,
    featurize_lexicon_lda,
    load_inputs,
    run_pipeline,
    split_keys,
    stack,
    train_benchmark,
    train_news_model,
)
from newsdowngrade.embeddings import WordVectorTable
from newsdowngrade.topics import train_lda

FAST = {
    "lexicon_lda": {"n_topics": 10, "iterations": 20, "burn_in": 5, "samples": 2},
    "doc2vec": {"dim": 100, "epochs": 2, "infer_steps": 3},
}


def cfg(approach="wordvec_average", seed=0, **extra):
    return ApproachConfig.from_dict({"approach": approach, "seed": seed, **FAST, **extra})


@pytest.fixture(scope="module")
def inputs(small_bundle_dir):
    return load_inputs(small_bundle_dir)


class SpyFeaturizer:
    """Wraps a featurizer and logs which keys each call sees."""

    def __init__(self, inner, log):
        self.inner, self.log = inner, log

    @property
    def feature_names(self):
        return self.inner.feature_names

    def fit(self, docs):
        self.log.append(("fit", {d.key for d in docs}))
        self.inner.fit(docs)
        return self

    def transform(self, docs):
        self.log.append(("transform", {d.key for d in docs}))
        return self.inner.transform(docs)


class TestConfig:
    def test_aliases(self):
        assert ApproachConfig(approach="lexicon-lda").approach == "lexicon_lda"
        assert ApproachConfig(approach="wordvec-avg").approach == "wordvec_average"

    def test_unknown_approach(self):
        with pytest.raises(ConfigError):
            ApproachConfig(approach="bert")

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigError, match="colour"):
            ApproachConfig.from_dict({"doc2vec": {"colour": 1}})

    def test_round_trip(self):
        c = cfg("doc2vec", seed=4)
        assert ApproachConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c
        assert c.with_seed(9).seed == 9 and c.with_seed(9).doc2vec == c.doc2vec

    def test_derive_seed(self):
        assert pl.derive_seed(0, "a") == pl.derive_seed(0, "a")
        assert pl.derive_seed(0, "a") != pl.derive_seed(0, "b")
        assert pl.derive_seed(0, "a") != pl.derive_seed(1, "a")


class TestSplit:
    def test_partition(self):
        keys = [(f"p{i}", None) for i in range(50)]
        labels = {k: i % 5 == 0 for i, k in enumerate(keys)}
        s = split_keys(keys, labels, pl.SplitConfig(0.8), seed=1)
        assert s.train.isdisjoint(s.holdout) and s.train | s.holdout == set(keys)
        assert len(s.train) == 40
        assert split_keys(keys, labels, pl.SplitConfig(0.8), seed=1) == s

    def test_stratified(self):
        keys = [(f"p{i:02d}", None) for i in range(50)]
        labels = {k: int(i < 10) for i, k in enumerate(keys)}
        s = split_keys(keys, labels, pl.SplitConfig(0.8, stratify=True), seed=2)
        assert sum(labels[k] for k in s.holdout) == 2


class TestFeaturize:
    def _lexicons(self):
        return {n: Lexicon(n, frozenset({"gain"}), frozenset({"loss"})) for n in LEXICON_ORDER}

    def _lda(self):
        corpus = [[f"w{i % 30}", f"w{(i * 7) % 30}"] * 5 for i in range(60)]
        return train_lda(corpus, 10, iterations=5)

    def test_seventeen_features(self):
        doc = CleanDocument("p", None, ["gain", "w1", "w2"], 1, 2)
        v = featurize_lexicon_lda(doc, self._lexicons(), self._lda())
        assert v.shape == (17,)
        assert v[-2] == 2.0

    def test_downgrade_variant(self):
        doc = CleanDocument("p", None, ["rating", "downgraded"], 1, 1)
        assert featurize_lexicon_lda(doc, self._lexicons(), self._lda())[-1] == 1.0
        doc = CleanDocument("p", None, ["downgrades"], 1, 1)
        assert featurize_lexicon_lda(doc, self._lexicons(), self._lda())[-1] == 1.0

    def test_empty_doc(self):
        v = featurize_lexicon_lda(CleanDocument("p", None, [], 0, 3), self._lexicons(), self._lda())
        assert np.array_equal(v[:5], np.zeros(5))
        assert np.allclose(v[5:15], 0.1)
        assert v[15:].tolist() == [3.0, 0.0]

    def test_wordvec_dim(self):
        table = WordVectorTable(["a", "b"], np.ones((2, 300)))
        v = featurize_embedding(CleanDocument("p", None, ["a", "x"], 1, 1), table)
        assert v.shape == (300,)

    def test_doc2vec_dim_and_determinism(self, inputs):
        f = pl.Doc2VecFeaturizer(pl.Doc2VecConfig(dim=100, epochs=1, infer_steps=3), seed=0)
        f.fit(inputs.documents[:40])
        doc = inputs.documents[0]
        a = featurize_embedding(doc, f.model, infer_steps=3, seed=5)
        b = featurize_embedding(doc, f.model, infer_steps=3, seed=5)
        assert a.shape == (100,) and np.array_equal(a, b)


class TestNewsModel:
    @pytest.mark.parametrize("approach,width", [("lexicon_lda", 17), ("doc2vec", 100), ("wordvec_average", 50)])
    def test_feature_counts(self, inputs, approach, width):
        run = train_news_model(inputs, cfg(approach))
        assert len(run.model.feature_names) == width
        assert set(run.train_keys).isdisjoint(run.holdout_keys)

    @pytest.mark.parametrize("approach", ["lexicon_lda", "doc2vec"])
    def test_no_leakage(self, inputs, approach, monkeypatch):
        config = cfg(approach)
        labels = inputs.labels
        split = split_keys(labels.keys(), labels, config.split, config.seed)
        log = []
        real_smote, real_fit = pl.smote, pl.fit
        monkeypatch.setattr(pl, "smote", lambda d, c: log.append(("smote", set(d.keys))) or real_smote(d, c))
        monkeypatch.setattr(pl, "fit", lambda d, *a: log.append(("classifier", {k for k in d.keys if k})) or real_fit(d, *a))
        spy = SpyFeaturizer(pl.make_featurizer(config, inputs), log)
        train_news_model(inputs, config, split, featurizer=spy)
        first_holdout = next(i for i, (_, keys) in enumerate(log) if keys & split.holdout)
        assert [name for name, _ in log] == ["fit", "transform", "smote", "classifier", "transform"]
        assert first_holdout == len(log) - 1
        assert log[-1][1] <= split.holdout

    def test_single_class_holdout_surfaces(self, inputs):
        labels = inputs.labels
        negatives = sorted(k for k, y in labels.items() if y == 0)
        split = pl.Split(frozenset(labels) - frozenset(negatives[:30]), frozenset(negatives[:30]))
        run = train_news_model(inputs, cfg(), split)
        with pytest.raises(SingleClass):
            run.auc

    def test_missing_label(self, inputs):
        extra = CleanDocument("nobody", inputs.documents[0].date, ["x"], 1, 1)
        bad = PipelineInputs(inputs.documents + [extra], inputs.benchmark, inputs.lexicons, inputs.word_vectors)
        with pytest.raises(JoinKeyMismatch):
            train_news_model(bad, cfg())


class TestBenchmark:
    def test_constant_features_chance(self, inputs):
        b = inputs.benchmark
        const = Dataset(np.ones_like(b.X), b.y, b.feature_names, b.keys)
        assert train_benchmark(const, cfg()).auc == 0.5

    def test_planted_band(self, inputs):
        assert 0.65 <= train_benchmark(inputs.benchmark, cfg()).auc <= 0.95

    def test_needs_nine(self, inputs):
        b = inputs.benchmark
        with pytest.raises(ValidationError):
            train_benchmark(Dataset(b.X[:, :8], b.y, b.feature_names[:8], b.keys), cfg())


@pytest.fixture(scope="module")
def result(inputs):
    return run_pipeline(inputs, cfg())


class TestStack:
    def test_ten_columns(self, result):
        assert result.stacked.dataset.X.shape[1] == 10
        assert result.stacked.dataset.feature_names[-1] == pl.NEWS_PROB

    def test_fill(self, result, inputs):
        docs = inputs.doc_index
        ds = result.stacked.dataset
        no_news = [i for i, k in enumerate(ds.keys) if k not in docs]
        assert no_news and result.stacked.filled_rows == len(no_news)
        assert np.all(ds.X[no_news, -1] == 0.5)

    def test_out_of_fold(self, result, inputs):
        scored_all = []
        for fold in result.stacked.folds:
            assert set(fold["fit_keys"]).isdisjoint(fold["scored_keys"])
            scored_all += fold["scored_keys"]
        assert len(scored_all) == len(set(scored_all))
        train_with_news = {k for k in result.split.train if k in inputs.doc_index}
        assert set(scored_all) == train_with_news
        assert set(scored_all).isdisjoint(result.split.holdout)

    def test_fair_comparison(self, result):
        assert set(result.benchmark.holdout_keys) == set(result.final.holdout_keys)

    def test_drop_mode(self, inputs):
        config = cfg(missing_news="drop")
        labels = inputs.labels
        split = split_keys(labels.keys(), labels, config.split, config.seed)
        news = train_news_model(inputs, config, split)
        res = stack(inputs, news, config, split)
        assert res.filled_rows == 0 and len(res.dataset) == len(inputs.documents)

    def test_metrics(self, result):
        m = result.metrics()
        assert m["auc_gain"] == pytest.approx(m["final"]["auc"] - m["benchmark"]["auc"])

    def test_deterministic(self, inputs, result):
        again = run_pipeline(inputs, cfg())
        assert again.metrics() == result.metrics()
        assert np.array_equal(again.stacked.dataset.X, result.stacked.dataset.X)


def test_manifest_has_no_timestamps(tmp_path):
    art = tmp_path / "a.csv"
    art.write_text("x\n")
    m = pl.write_manifest(tmp_path / "m.json", "cmd", {"a": np.int64(1)}, {"seed": 3}, {"a": art}, {"auc": np.float64(0.5)})
    assert m["artifacts"]["a"]["file"] == "a.csv"
    assert json.loads((tmp_path / "m.json").read_text())["config"] == {"a": 1}
