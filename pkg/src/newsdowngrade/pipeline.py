"""End-to-end wiring: documents -> features -> classifier for the three news
approaches, the quantitative benchmark, and the stacked final model."""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

import numpy as np

from .classifier import Dataset, SmoteConfig, fit, predict_proba, read_dataset_csv, smote
from .corpus import CleanConfig, load_alias_table, load_stopwords, preprocess_articles, read_articles_jsonl, stem
from .embeddings import doc_embedding_average, infer_doc_vector, load_vec_file, train_doc2vec_dm
from .errors import ConfigError, JoinKeyMismatch, ValidationError
from .evaluation import ScoredSet, auc, classification_report
from .lexicon import LEXICON_ORDER, load_lexicons, score_all
from .ratings import build_label_table, read_ratings_csv
from .topics import infer_topic_mixture, train_lda

APPROACHES = ("lexicon_lda", "doc2vec", "wordvec_average")
APPROACH_ALIASES = {"lexicon-lda": "lexicon_lda", "wordvec-avg": "wordvec_average",
                    "wordvec": "wordvec_average"}
NEWS_PROB = "news_prob"
DOWNGRADE_STEM = stem("downgrade")
N_BENCHMARK_FEATURES = 9


def normalize_approach(name):
    name = APPROACH_ALIASES.get(name, name)
    if name not in APPROACHES:
        raise ConfigError(f"unknown approach {name!r}; choose from {APPROACHES}")
    return name


def derive_seed(seed, tag):
    """Independent 32-bit seed for one pipeline stage."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(tag.encode("utf-8"))])
    return int(ss.generate_state(1)[0])


def _key_seed(seed, key):
    pid, date = key
    return derive_seed(seed, f"{pid}|{date}")


# -- configuration ---------------------------------------------------------------


@dataclass
class SplitConfig:
    train_fraction: float = 0.8
    stratify: bool = False

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must be in (0, 1)")


@dataclass
class LexiconLdaConfig:
    n_topics: int = 10
    alpha: float | None = None
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 50
    samples: int = 10
    stemming: bool = True


@dataclass
class Doc2VecConfig:
    dim: int = 100
    window: int = 5
    epochs: int = 20
    negative: int = 5
    initial_lr: float = 0.025
    min_lr: float = 1e-4
    min_count: int = 1
    infer_steps: int = 20
    stemming: bool = True


@dataclass
class ClassifierConfig:
    l2: float = 0.01
    max_epochs: int = 5000
    tolerance: float = 1e-6


@dataclass
class SmoteSettings:
    k_neighbors: int = 5
    target_minority_ratio: float = 1.0
    enabled: bool = True


@dataclass
class ApproachConfig:
    approach: str = "wordvec_average"
    seed: int = 0
    lexicon_lda: LexiconLdaConfig = field(default_factory=LexiconLdaConfig)
    doc2vec: Doc2VecConfig = field(default_factory=Doc2VecConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    smote: SmoteSettings = field(default_factory=SmoteSettings)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    stack_folds: int = 5
    missing_news: str = "fill"
    missing_news_fill: float = 0.5
    threshold: float = 0.5

    def __post_init__(self):
        self.approach = normalize_approach(self.approach)
        if self.missing_news not in ("fill", "drop"):
            raise ConfigError("missing_news must be 'fill' or 'drop'")
        if self.stack_folds < 2:
            raise ConfigError("stack_folds must be >= 2")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return _build(cls, data)

    def with_seed(self, seed):
        return ApproachConfig.from_dict({**self.to_dict(), "seed": int(seed)})


def _build(cls, data):
    """Recursively build a config dataclass, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f"{cls.__name__} expects a mapping")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {unknown}")
    kwargs = {}
    for name, value in data.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else None
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value)
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# -- inputs ------------------------------------------------------------------------


@dataclass
class PipelineInputs:
    documents: list
    benchmark: Dataset
    lexicons: dict
    word_vectors: object = None

    @property
    def doc_index(self):
        return {d.key: d for d in self.documents}

    @property
    def labels(self):
        return dict(zip(self.benchmark.keys, self.benchmark.y.tolist()))


def preprocess_bundle(data_dir):
    """Clean the bundle's articles into company-day documents."""
    data_dir = Path(data_dir)
    pre_path = data_dir / "preprocess.json"
    patterns = ()
    if pre_path.exists():
        patterns = tuple(json.loads(pre_path.read_text(encoding="utf-8")).get("boilerplate_patterns", ()))
    stop_path = data_dir / "stopwords.txt"
    stopwords = load_stopwords(stop_path if stop_path.exists() else None)
    return preprocess_articles(
        read_articles_jsonl(data_dir / "articles.jsonl"),
        load_alias_table(data_dir / "aliases.json"),
        stopwords,
        CleanConfig(boilerplate_patterns=patterns),
    )


def read_bundle_labels(data_dir):
    """Labels from the rating timelines for every benchmark company-day."""
    data_dir = Path(data_dir)
    bench = read_dataset_csv(data_dir / "benchmark.csv")
    if bench.keys is None:
        raise ValidationError("benchmark.csv needs pid and date columns")
    return build_label_table(read_ratings_csv(data_dir / "ratings.csv"), bench.keys)


def load_inputs(data_dir, need_vectors=True):
    """Read a bundle directory (synthgen layout) into :class:`PipelineInputs`.

    Labels are recomputed from the rating timelines for every benchmark
    key; documents without a benchmark row are an error.
    """
    data_dir = Path(data_dir)
    documents, _ = preprocess_bundle(data_dir)
    bench = read_dataset_csv(data_dir / "benchmark.csv")
    if bench.keys is None:
        raise ValidationError("benchmark.csv needs pid and date columns")
    labels = build_label_table(read_ratings_csv(data_dir / "ratings.csv"), bench.keys)
    ordered = [(lab.pid, lab.date) for lab in labels]
    order = {k: i for i, k in enumerate(bench.keys)}
    bench = Dataset(bench.X[[order[k] for k in ordered]], [lab.label for lab in labels],
                    bench.feature_names, ordered)
    missing = [d.key for d in documents if d.key not in order]
    if missing:
        raise JoinKeyMismatch(f"{len(missing)} documents have no benchmark row, e.g. {missing[0]}")
    vectors = load_vec_file(data_dir / "vectors.vec") if need_vectors else None
    return PipelineInputs(documents, bench, load_lexicons(data_dir / "lexicons"), vectors)


# -- split ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Split:
    train: frozenset
    holdout: frozenset


def split_keys(keys, labels, config, seed):
    """Random row-level train/holdout split of (pid, date) keys."""
    keys = sorted(keys)
    rng = np.random.default_rng(derive_seed(seed, "split"))
    if config.stratify:
        train = []
        for cls in (0, 1):
            group = [k for k in keys if labels[k] == cls]
            perm = rng.permutation(len(group))
            n_train = int(round(config.train_fraction * len(group)))
            train += [group[i] for i in perm[:n_train]]
    else:
        perm = rng.permutation(len(keys))
        n_train = int(round(config.train_fraction * len(keys)))
        train = [keys[i] for i in perm[:n_train]]
    train = frozenset(train)
    return Split(train, frozenset(keys) - train)


# -- featurizers -----------------------------------------------------------------------


def _stemmed(tokens, stemming):
    return [stem(t) for t in tokens] if stemming else list(tokens)


def stemmed_corpus(documents, stemming=True):
    return [_stemmed(d.tokens, stemming) for d in documents]


def has_downgrade_variant(tokens):
    return int(any(stem(t) == DOWNGRADE_STEM for t in tokens))


def featurize_lexicon_lda(doc, lexicons, lda_model, stemming=True, burn_in=50, samples=10, seed=0):
    """5 lexicon scores, K topic proportions, article count, downgrade flag."""
    sentiments = score_all(doc.tokens, lexicons)
    mixture = infer_topic_mixture(
        lda_model, _stemmed(doc.tokens, stemming), burn_in, _key_seed(seed, doc.key), samples
    )
    counts = np.array([float(doc.articles_merged), float(has_downgrade_variant(doc.tokens))])
    return np.concatenate([sentiments, mixture, counts])


def featurize_embedding(doc, backend, stemming=True, infer_steps=20, seed=0):
    """Document vector from a Doc2Vec model or a word-vector table."""
    if hasattr(backend, "word_in"):
        tokens = _stemmed(doc.tokens, stemming)
        return infer_doc_vector(backend, tokens, infer_steps, _key_seed(seed, doc.key)).vector
    return doc_embedding_average(backend, doc.tokens).vector.astype(np.float64)


class LexiconLdaFeaturizer:
    def __init__(self, lexicons, config=None, seed=0):
        self.lexicons = lexicons
        self.config = config or LexiconLdaConfig()
        self.seed = seed
        self.model = None

    @property
    def feature_names(self):
        k = self.config.n_topics
        return ([f"sent_{n}" for n in LEXICON_ORDER] + [f"topic_{i}" for i in range(k)]
                + ["n_articles", "has_downgrade"])

    def fit(self, docs):
        cfg = self.config
        corpus = [_stemmed(d.tokens, cfg.stemming) for d in docs]
        self.model = train_lda(corpus, cfg.n_topics, cfg.alpha, cfg.beta, cfg.iterations,
                               derive_seed(self.seed, "lda"))
        return self

    def transform(self, docs):
        cfg = self.config
        rows = [featurize_lexicon_lda(d, self.lexicons, self.model, cfg.stemming, cfg.burn_in,
                                      cfg.samples, derive_seed(self.seed, "lda-infer")) for d in docs]
        return np.asarray(rows).reshape(len(docs), len(self.feature_names))


class Doc2VecFeaturizer:
    def __init__(self, config=None, seed=0):
        self.config = config or Doc2VecConfig()
        self.seed = seed
        self.model = None

    @property
    def feature_names(self):
        return [f"d2v_{i}" for i in range(self.config.dim)]

    def fit(self, docs):
        cfg = self.config
        corpus = [_stemmed(d.tokens, cfg.stemming) for d in docs]
        self.model = train_doc2vec_dm(corpus, cfg.dim, cfg.window, cfg.epochs, cfg.negative,
                                      cfg.initial_lr, cfg.min_lr, derive_seed(self.seed, "doc2vec"),
                                      cfg.min_count)
        return self

    def transform(self, docs):
        cfg = self.config
        rows = [featurize_embedding(d, self.model, cfg.stemming, cfg.infer_steps,
                                    derive_seed(self.seed, "d2v-infer")) for d in docs]
        return np.asarray(rows).reshape(len(docs), cfg.dim)


class WordVecFeaturizer:
    def __init__(self, table):
        if table is None:
            raise ConfigError("wordvec_average needs a word-vector table")
        self.table = table

    @property
    def feature_names(self):
        return [f"wv_{i}" for i in range(self.table.dim)]

    def fit(self, docs):
        return self

    def transform(self, docs):
        rows = [featurize_embedding(d, self.table) for d in docs]
        return np.asarray(rows).reshape(len(docs), self.table.dim)


def make_featurizer(config, inputs, seed=None):
    seed = config.seed if seed is None else seed
    if config.approach == "lexicon_lda":
        return LexiconLdaFeaturizer(inputs.lexicons, config.lexicon_lda, seed)
    if config.approach == "doc2vec":
        return Doc2VecFeaturizer(config.doc2vec, seed)
    return WordVecFeaturizer(inputs.word_vectors)


# -- training ------------------------------------------------------------------------


def fit_classifier(train, config, seed):
    """SMOTE (training rows only) followed by the logistic fit."""
    if config.smote.enabled:
        sm = SmoteConfig(config.smote.k_neighbors, config.smote.target_minority_ratio,
                         derive_seed(seed, "smote"))
        train = smote(train, sm)
    c = config.classifier
    return fit(train, c.l2, c.max_epochs, c.tolerance, seed)


def _score(model, dataset):
    return ScoredSet(list(dataset.keys), predict_proba(model, dataset), dataset.y)


@dataclass
class ModelRun:
    model: object
    holdout: ScoredSet
    train_keys: list
    holdout_keys: list
    featurizer: object = None

    @property
    def auc(self):
        return auc(self.holdout)


def dataset_from_docs(docs, featurizer, labels):
    X = featurizer.transform(docs)
    return Dataset(X, [labels[d.key] for d in docs], featurizer.feature_names, [d.key for d in docs])


def train_news_model(inputs, config, split=None, featurizer=None):
    """Train one news approach on the training split and score the holdout.

    Featurizer artifacts (LDA, Doc2Vec) see training documents only.
    """
    labels = inputs.labels
    missing = [d.key for d in inputs.documents if d.key not in labels]
    if missing:
        raise JoinKeyMismatch(f"no label for document {missing[0]}")
    if split is None:
        split = split_keys(labels.keys(), labels, config.split, config.seed)
    train_docs = [d for d in inputs.documents if d.key in split.train]
    hold_docs = [d for d in inputs.documents if d.key in split.holdout]
    featurizer = featurizer or make_featurizer(config, inputs)
    featurizer.fit(train_docs)
    train = dataset_from_docs(train_docs, featurizer, labels)
    model = fit_classifier(train, config, derive_seed(config.seed, "news"))
    holdout = dataset_from_docs(hold_docs, featurizer, labels)
    return ModelRun(model, _score(model, holdout), train.keys, holdout.keys, featurizer)


def _rows(dataset, keys):
    index = {k: i for i, k in enumerate(dataset.keys)}
    return dataset.subset([index[k] for k in keys])


def train_benchmark(benchmark, config, split=None):
    """Fit the quantitative model with the same split/SMOTE/fit protocol."""
    if benchmark.X.shape[1] != N_BENCHMARK_FEATURES:
        raise ValidationError(f"benchmark needs {N_BENCHMARK_FEATURES} features, got {benchmark.X.shape[1]}")
    labels = dict(zip(benchmark.keys, benchmark.y.tolist()))
    if split is None:
        split = split_keys(labels.keys(), labels, config.split, config.seed)
    train = _rows(benchmark, sorted(split.train))
    holdout = _rows(benchmark, sorted(split.holdout))
    model = fit_classifier(train, config, derive_seed(config.seed, "benchmark"))
    return ModelRun(model, _score(model, holdout), train.keys, holdout.keys)


@dataclass
class StackResult:
    dataset: Dataset
    folds: list
    news_rows: int
    filled_rows: int


def stack(inputs, news_run, config, split):
    """Append ``news_prob`` to the 9 benchmark columns.

    Training rows get out-of-fold probabilities from models refit (featurizer
    included) on the other folds; holdout rows are scored by ``news_run``.
    Rows without news get ``missing_news_fill`` or are dropped.
    """
    bench = inputs.benchmark
    docs = inputs.doc_index
    labels = inputs.labels
    for key in news_run.holdout_keys:
        if key not in labels:
            raise JoinKeyMismatch(f"news key {key} not in benchmark")
    probs = dict(zip(news_run.holdout.keys, news_run.holdout.scores.tolist()))

    train_docs = [docs[k] for k in sorted(split.train) if k in docs]
    rng = np.random.default_rng(derive_seed(config.seed, "stack-folds"))
    fold_of = rng.permutation(len(train_docs)) % config.stack_folds
    folds = []
    for f in range(config.stack_folds):
        fit_docs = [d for d, g in zip(train_docs, fold_of) if g != f]
        score_docs = [d for d, g in zip(train_docs, fold_of) if g == f]
        if not score_docs:
            continue
        fold_seed = derive_seed(config.seed, f"fold{f}")
        featurizer = make_featurizer(config, inputs, fold_seed).fit(fit_docs)
        model = fit_classifier(dataset_from_docs(fit_docs, featurizer, labels), config, fold_seed)
        scored = dataset_from_docs(score_docs, featurizer, labels)
        probs.update(zip(scored.keys, predict_proba(model, scored).tolist()))
        folds.append({"fit_keys": [d.key for d in fit_docs], "scored_keys": list(scored.keys)})

    keep, news, filled = [], [], 0
    for i, key in enumerate(bench.keys):
        if key in probs:
            keep.append(i)
            news.append(probs[key])
        elif config.missing_news == "fill":
            keep.append(i)
            news.append(config.missing_news_fill)
            filled += 1
    X = np.column_stack([bench.X[keep], np.asarray(news)])
    dataset = Dataset(X, bench.y[keep], list(bench.feature_names) + [NEWS_PROB], [bench.keys[i] for i in keep])
    return StackResult(dataset, folds, len(keep) - filled, filled)


def train_final(stacked, config, split):
    """Fit the 10-feature stacked model on training rows and score holdout."""
    if stacked.X.shape[1] != N_BENCHMARK_FEATURES + 1:
        raise ValidationError("stacked dataset must have 10 columns")
    present = set(stacked.keys)
    sub = Split(frozenset(k for k in split.train if k in present),
                frozenset(k for k in split.holdout if k in present))
    train = _rows(stacked, sorted(sub.train))
    holdout = _rows(stacked, sorted(sub.holdout))
    model = fit_classifier(train, config, derive_seed(config.seed, "final"))
    return ModelRun(model, _score(model, holdout), train.keys, holdout.keys)


@dataclass
class PipelineResult:
    config: ApproachConfig
    split: Split
    news: ModelRun
    benchmark: ModelRun
    final: ModelRun
    stacked: StackResult

    def metrics(self):
        t = self.config.threshold
        return {
            "news": classification_report(self.news.holdout, t),
            "benchmark": classification_report(self.benchmark.holdout, t),
            "final": classification_report(self.final.holdout, t),
            "auc_gain": self.final.auc - self.benchmark.auc,
            "stacked_rows_with_news": self.stacked.news_rows,
            "stacked_rows_filled": self.stacked.filled_rows,
        }


def run_pipeline(inputs, config):
    """News model, benchmark, cross-fitted stack and final model for one seed."""
    labels = inputs.labels
    split = split_keys(labels.keys(), labels, config.split, config.seed)
    news = train_news_model(inputs, config, split)
    bench = train_benchmark(inputs.benchmark, config, split)
    stacked = stack(inputs, news, config, split)
    final = train_final(stacked.dataset, config, split)
    return PipelineResult(config, split, news, bench, final, stacked)


def seed_runner(inputs, config):
    """``run_seed`` callable for the robustness harness."""

    def run_seed(seed):
        result = run_pipeline(inputs, config.with_seed(seed))
        return result.benchmark.auc, result.final.auc

    return run_seed


# -- manifests -----------------------------------------------------------------------


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_manifest(path, command, config, seeds, artifacts, metrics=None):
    """Deterministic run manifest: no timestamps, sorted keys."""
    manifest = {
        "command": command,
        "config": _jsonable(config),
        "seeds": _jsonable(seeds),
        "artifacts": {name: {"file": Path(p).name, "sha256": sha256_file(p)}
                      for name, p in sorted(artifacts.items())},
        "metrics": _jsonable(metrics or {}),
    }
    Path(path).write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    return manifest
