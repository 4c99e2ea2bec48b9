"""Seeded synthetic corpora with planted, tunable downgrade signal.

A bundle holds raw articles, an alias table, two-agency rating timelines,
nine opaque benchmark features, five miniature lexicons, a word-vector
file and a ground-truth manifest.

Signal design:

* Downgrade-bound company-days draw "event" article templates with
  probability ``news_signal_strength`` per article. Event sentences carry
  words from a large, rarely repeated event vocabulary (only the word
  vectors know these words are adverse) plus a small recurring distress
  vocabulary that corpus-trained models can pick up.
* Benchmark features shift for a subset of positives chosen to prefer the
  ones the news missed, so the two sources are partially complementary.
* Planted topics own disjoint vocabulary blocks.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .classifier import Dataset, write_dataset_csv
from .corpus import CompanyAliasTable, RawArticle, load_stopwords, save_alias_table, write_articles_jsonl
from .embeddings import WordVectorTable, save_vec_file
from .errors import ConfigError
from .lexicon import LEXICON_ORDER
from .ratings import RatingObservation, label_downgrade, write_ratings_csv

BENCHMARK_FEATURES = (
    "edf_1y",
    "edf_5y",
    "edf_1y_lag30",
    "edf_1y_diff30",
    "dgp_1y",
    "dgp_1y_lag30",
    "dgp_1y_diff30",
    "rating_notch",
    "rating_notch_lag90",
)
_BENCH_LOADINGS = np.array([1.0, 0.8, 0.9, 0.5, 1.0, 0.7, 0.6, 0.3, 0.2])

BOILERPLATE_PATTERNS = (
    r"^\s*by [a-z ]+ staff\s*$",
    r"^\s*\(reporting by .*\)\s*$",
    r"^\s*copyright\b.*$",
)

OBS_START = dt.date(2018, 1, 1)
OBS_END = dt.date(2019, 12, 31)
RATING_START = dt.date(2017, 12, 1)

_FILLER = (
    "the", "of", "and", "to", "in", "a", "for", "on", "with", "its", "by", "at",
    "as", "from", "that", "was", "is", "has", "had", "be", "this", "which",
)
_NEGATORS = ("not", "no", "never", "without")
_DOWNGRADE_FORMS = ("downgrade", "downgraded", "downgrades", "downgrading")
_COMPANY_SUFFIXES = ("holdings", "corp", "group", "industries", "partners", "systems")
_VALID_FORMATS = ("story", "market-snapshot", "earnings-summary")
_VALID_FORMAT_P = (0.5, 0.3, 0.2)
_ARTICLE_COUNT_P = (0.5, 0.3, 0.2)


@dataclass
class GeneratorConfig:
    n_companies: int = 200
    n_days: int = 10
    downgrade_rate: float = 0.015
    news_signal_strength: float = 0.6
    benchmark_signal_strength: float = 0.6
    topic_count: int = 6
    vocab_size: int = 240
    event_vocab_size: int = 3000
    distress_vocab_size: int = 6
    distress_base_rate: float = 0.07
    distress_rate: float = 0.45
    event_density: int = 3
    sentiment_vocab_size: int = 40
    vec_dim: int = 50
    benchmark_shift: float = 1.5
    event_noise_rate: float = 0.02
    no_news_rate: float = 0.03
    junk_article_rate: float = 0.3
    seed: int = 0

    def validate(self):
        if self.n_companies < 1 or self.n_days < 1:
            raise ConfigError("n_companies and n_days must be >= 1")
        if not 0 < self.downgrade_rate < 1:
            raise ConfigError("downgrade_rate must be in (0, 1)")
        for name in ("news_signal_strength", "benchmark_signal_strength", "event_noise_rate", "distress_rate",
                     "distress_base_rate",
                     "no_news_rate", "junk_article_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ConfigError(f"{name} must be in [0, 1]")
        if self.topic_count < 1 or self.vocab_size < self.topic_count * 5:
            raise ConfigError("need topic_count >= 1 and at least 5 words per topic")
        if min(self.event_vocab_size, self.distress_vocab_size, self.sentiment_vocab_size) < 4:
            raise ConfigError("vocabulary blocks must hold at least 4 words")
        if self.vec_dim < 4:
            raise ConfigError("vec_dim must be >= 4")
        if self.n_days > (OBS_END - OBS_START).days // 3:
            raise ConfigError("n_days too large for the observation window")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown generator keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class Vocabulary:
    topics: list
    event: list
    distress: list
    positive: list
    negative: list
    distractors: list


@dataclass
class RowTruth:
    pid: str
    date: dt.date
    label: int
    news_hit: bool
    bench_hit: bool
    templates: list = field(default_factory=list)

    def to_dict(self):
        return {
            "pid": self.pid,
            "date": self.date.isoformat(),
            "label": self.label,
            "news_hit": self.news_hit,
            "bench_hit": self.bench_hit,
            "templates": list(self.templates),
        }


@dataclass
class Bundle:
    config: GeneratorConfig
    articles: list
    aliases: CompanyAliasTable
    ratings: list
    benchmark: Dataset
    lexicon_entries: dict
    word_vectors: WordVectorTable
    stopwords: frozenset
    truth: list
    vocabulary: Vocabulary
    downgrade_dates: dict

    @property
    def positives(self):
        return sum(r.label for r in self.truth)

    def manifest(self):
        return {
            "generator": asdict(self.config),
            "n_rows": len(self.truth),
            "n_positive": self.positives,
            "label_rate": self.positives / len(self.truth),
            "n_articles": len(self.articles),
            "downgrade_dates": {p: d.isoformat() for p, d in sorted(self.downgrade_dates.items())},
            "planted_topics": self.vocabulary.topics,
            "distress_words": self.vocabulary.distress,
            "rows": [r.to_dict() for r in self.truth],
        }


def _pseudo_words(rng, n, exclude):
    consonants = list("bcdfgklmnprstvz")
    vowels = list("aeiou")
    finals = list("bdgkmnprtvz")
    words, seen = [], set(exclude)
    while len(words) < n:
        syll = rng.integers(2, 4)
        w = "".join(rng.choice(consonants) + rng.choice(vowels) for _ in range(syll))
        w += rng.choice(finals)
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _zipf(n, s=1.0):
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


class _Writer:
    """Sentence/article text factory bound to one bundle's vocabulary."""

    def __init__(self, rng, vocab, cfg):
        self.rng = rng
        self.vocab = vocab
        self.cfg = cfg
        self.topic_p = [_zipf(len(t)) for t in vocab.topics]

    def _pick(self, seq):
        return seq[self.rng.integers(len(seq))]

    def _content(self, topics, event, n):
        words = []
        for _ in range(n):
            r = self.rng.random()
            if r < 0.45:
                words.append(self._pick(_FILLER))
            elif r < 0.45 + self.cfg.distress_base_rate:
                words.append(self._pick(self.vocab.distress))
            else:
                k = topics[self.rng.integers(len(topics))]
                idx = self.rng.choice(len(self.vocab.topics[k]), p=self.topic_p[k])
                words.append(self.vocab.topics[k][idx])
        if self.rng.random() < 0.3:
            if self.rng.random() < 0.5:
                pos = self._pick(self.vocab.positive)
                if self.rng.random() < 0.2:
                    words.append(self._pick(_NEGATORS))
                words.append(pos)
            else:
                words.append(self._pick(self.vocab.negative))
        if event:
            for _ in range(self.rng.integers(1, self.cfg.event_density + 1)):
                words.insert(self.rng.integers(len(words) + 1), self._pick(self.vocab.event))
            for _ in range(2):
                if self.rng.random() < self.cfg.distress_rate:
                    words.insert(self.rng.integers(len(words) + 1), self._pick(self.vocab.distress))
        return words

    def mention(self, name):
        words = name.split()
        if len(words[0]) > 5 and self.rng.random() < 0.1:
            # single-character typo, recoverable by fuzzy matching
            w = words[0]
            i = 1 + self.rng.integers(len(w) - 2)
            words[0] = w[:i] + w[i + 1 :]
        elif self.rng.random() < 0.3:
            return words[0]
        return " ".join(words)

    def sentence(self, topics, event, subject=None):
        words = self._content(topics, event, int(self.rng.integers(7, 14)))
        if subject:
            words.insert(0, subject)
        text = " ".join(words)
        return text[0].upper() + text[1:] + "."

    def story(self, name, topics, event, multi_names=()):
        n_sent = int(self.rng.integers(4, 8))
        sentences = []
        for i in range(n_sent):
            subject = self.mention(name) if i == 0 or self.rng.random() < 0.5 else None
            sentences.append(self.sentence(topics, event, subject))
        if event and self.rng.random() < 0.15:
            sentences.append(self.sentence(topics, True, f"analysts said a {self._pick(_DOWNGRADE_FORMS)} of {name} was possible,"))
        elif not event and self.rng.random() < 0.01:
            sentences.append(self.sentence(topics, False, f"{name} avoided a {self._pick(_DOWNGRADE_FORMS)}"))
        if multi_names:
            # other companies get their own sentences, some with adverse news
            for other in multi_names:
                for _ in range(int(self.rng.integers(1, 3))):
                    other_topics = [int(self.rng.integers(len(self.vocab.topics)))]
                    sentence = self.sentence(other_topics, self.rng.random() < 0.3, other)
                    sentences.insert(int(self.rng.integers(1, len(sentences) + 1)), sentence)
        return sentences

    def wrap(self, sentences):
        lines = []
        if self.rng.random() < 0.5:
            lines.append(f"By {self._pick(self.vocab.distractors).title()} Newswire Staff")
        if self.rng.random() < 0.3:
            lines.append('<meta name="source" content="wire">')
        body = []
        for s in sentences:
            if self.rng.random() < 0.1:
                s = f"<p>{s}</p>"
            elif self.rng.random() < 0.05:
                s = s.replace(" and ", " &amp; ", 1)
            body.append(s)
        lines.append(" ".join(body))
        if self.rng.random() < 0.5:
            lines.append(f"(Reporting by {self._pick(self.vocab.distractors).title()}; "
                         f"Editing by {self._pick(self.vocab.distractors).title()})")
        if self.rng.random() < 0.2:
            lines.append("Copyright 2019 wire service. All rights reserved.")
        return "\n".join(lines)


def _build_vocabulary(rng, cfg, stopwords):
    exclude = set(stopwords) | set(_FILLER) | set(_NEGATORS) | set(_DOWNGRADE_FORMS)
    per_topic = cfg.vocab_size // cfg.topic_count
    total = (per_topic * cfg.topic_count + cfg.event_vocab_size + cfg.distress_vocab_size
             + 2 * cfg.sentiment_vocab_size + 300)
    pool = _pseudo_words(rng, total, exclude)
    take = iter(pool)
    topics = [[next(take) for _ in range(per_topic)] for _ in range(cfg.topic_count)]
    event = [next(take) for _ in range(cfg.event_vocab_size)]
    distress = [next(take) for _ in range(cfg.distress_vocab_size)]
    positive = [next(take) for _ in range(cfg.sentiment_vocab_size)]
    negative = [next(take) for _ in range(cfg.sentiment_vocab_size)]
    distractors = list(take)
    return Vocabulary(topics, event, distress, positive, negative, distractors)


def _company_names(rng, n, vocab):
    exclude = set(w for block in vocab.topics for w in block) | set(vocab.event) | set(vocab.distress)
    exclude |= set(vocab.positive) | set(vocab.negative) | set(vocab.distractors)
    stems = _pseudo_words(rng, 2 * n, exclude)
    names = []
    for i in range(n):
        suffix = _COMPANY_SUFFIXES[rng.integers(len(_COMPANY_SUFFIXES))]
        names.append(f"{stems[2 * i]}{stems[2 * i + 1][:3]} {suffix}")
    return names


def _distinct_dates(rng, start, end, n):
    span = (end - start).days + 1
    offsets = np.sort(rng.choice(span, size=n, replace=False))
    return [start + dt.timedelta(days=int(o)) for o in offsets]


def _plan_labels(rng, cfg):
    """Per-company (dates, n_positive, downgrade date)."""
    n_rows = cfg.n_companies * cfg.n_days
    remaining = int(rng.binomial(n_rows, cfg.downgrade_rate))
    order = rng.permutation(cfg.n_companies)
    n_pos = np.zeros(cfg.n_companies, dtype=np.int64)
    for c in order:
        if remaining == 0:
            break
        m = int(min(remaining, rng.integers(1, min(cfg.n_days, 3) + 1)))
        n_pos[c] = m
        remaining -= m
    if remaining:
        raise ConfigError("downgrade_rate too high for n_companies x n_days")
    plans = []
    for c in range(cfg.n_companies):
        m = int(n_pos[c])
        if m == 0:
            plans.append((_distinct_dates(rng, OBS_START, OBS_END, cfg.n_days), 0, None))
            continue
        downgrade = OBS_END + dt.timedelta(days=int(rng.integers(1, 61)))
        window_start = downgrade - dt.timedelta(days=365)
        pos_dates = _distinct_dates(rng, window_start, OBS_END, m)
        neg_dates = _distinct_dates(rng, OBS_START, window_start - dt.timedelta(days=1), cfg.n_days - m)
        plans.append((neg_dates + pos_dates, m, downgrade))
    return plans


def _rating_timeline(rng, pid, downgrade):
    base = int(rng.integers(5, 17))
    moodys = base + int(rng.integers(0, 2))
    sp = base + int(rng.integers(0, 2))
    timeline = [RatingObservation(pid, RATING_START, moodys, sp)]
    worst = max(moodys, sp)
    if downgrade is None:
        if rng.random() < 0.3:
            # upgrade by both agencies
            day = _distinct_dates(rng, OBS_START, OBS_END, 1)[0]
            moodys, sp = max(1, moodys - 1), max(1, sp - 1)
            timeline.append(RatingObservation(pid, day, moodys, sp))
            worst = max(moodys, sp)
        if rng.random() < 0.3 and moodys != sp:
            # the better agency moves down without touching the worst rating
            day = max(timeline[-1].date, OBS_START) + dt.timedelta(days=int(rng.integers(1, 200)))
            if moodys < sp:
                moodys = sp
            else:
                sp = moodys
            timeline.append(RatingObservation(pid, day, moodys, sp))
            assert max(moodys, sp) == worst
    else:
        steps = int(rng.integers(1, 4))
        new_worst = min(21, worst + steps)
        if rng.random() < 0.5:
            moodys = new_worst
        else:
            sp = new_worst
        timeline.append(RatingObservation(pid, downgrade, moodys, sp))
    return timeline


def generate(config=None):
    """Build an in-memory :class:`Bundle`; same config means same bundle."""
    cfg = config or GeneratorConfig()
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    stopwords = load_stopwords()
    vocab = _build_vocabulary(rng, cfg, stopwords)
    names = _company_names(rng, cfg.n_companies, vocab)
    pids = [f"P{c:05d}" for c in range(cfg.n_companies)]
    aliases = CompanyAliasTable.from_mapping(
        {pid: {"name": name, "aliases": [name.split()[0]]} for pid, name in zip(pids, names)}
    )
    writer = _Writer(rng, vocab, cfg)

    plans = _plan_labels(rng, cfg)
    ratings, truth, downgrade_dates = [], [], {}
    for c, (dates, _, downgrade) in enumerate(plans):
        pid = pids[c]
        timeline = _rating_timeline(rng, pid, downgrade)
        ratings.extend(timeline)
        if downgrade is not None:
            downgrade_dates[pid] = downgrade
        for date in dates:
            label = label_downgrade(timeline, date).label
            truth.append(RowTruth(pid, date, label, False, False))
    truth.sort(key=lambda r: (r.pid, r.date))

    articles = []
    for row in truth:
        c = int(row.pid[1:])
        name = names[c]
        no_news = rng.random() < cfg.no_news_rate
        n_valid = 0 if no_news else int(rng.choice(3, p=_ARTICLE_COUNT_P)) + 1
        # positives share the background event rate, so strength 0 means no signal
        noise = cfg.event_noise_rate
        p_event = noise + cfg.news_signal_strength * (1 - noise) if row.label else noise
        for _ in range(n_valid):
            event = bool(rng.random() < p_event)
            row.news_hit |= event and row.label == 1
            fmt = _VALID_FORMATS[int(rng.choice(3, p=_VALID_FORMAT_P))]
            # topics are drawn per article, so they carry no company identity
            topics = [int(rng.integers(cfg.topic_count))]
            if rng.random() < 0.5:
                topics.append(int(rng.integers(cfg.topic_count)))
            others = ()
            if fmt == "market-snapshot":
                picks = rng.choice(cfg.n_companies, size=3, replace=False)
                others = [names[o] for o in picks if o != c][:2]
            sentences = writer.story(name, topics, event, others)
            headline = writer.sentence(topics, event, writer.mention(name)).rstrip(".")
            articles.append(RawArticle(row.pid, row.date, headline, writer.wrap(sentences), fmt))
            row.templates.append(f"{fmt}:{'event' if event else 'neutral'}")
        if no_news or rng.random() < cfg.junk_article_rate:
            kind = rng.integers(3)
            if kind == 0:
                articles.append(RawArticle(row.pid, row.date, f"Order imbalance {name}",
                                           f"buy imbalance {int(rng.integers(100, 9999))} shares",
                                           "machine-generated"))
                row.templates.append("machine-generated")
            elif kind == 1:
                sentences = writer.story(name, [int(rng.integers(cfg.topic_count))], bool(rng.random() < 0.3))
                articles.append(RawArticle(row.pid, row.date, name, writer.wrap(sentences), "unverified"))
                row.templates.append("unverified")
            else:
                articles.append(RawArticle(row.pid, row.date, f"{name} video",
                                           "watch the video at the link below", "other"))
                row.templates.append("video")

    _assign_benchmark_hits(rng, truth, cfg.benchmark_signal_strength)
    benchmark = _benchmark_features(rng, truth, cfg)
    lexicon_entries = _lexicon_entries(rng, vocab)
    vectors = _word_vectors(rng, vocab, cfg, stopwords)
    return Bundle(
        config=cfg,
        articles=articles,
        aliases=aliases,
        ratings=ratings,
        benchmark=benchmark,
        lexicon_entries=lexicon_entries,
        word_vectors=vectors,
        stopwords=stopwords,
        truth=truth,
        vocabulary=vocab,
        downgrade_dates=downgrade_dates,
    )


def _assign_benchmark_hits(rng, truth, strength):
    """Cover a ``strength`` share of positives, news misses first."""
    positives = [r for r in truth if r.label == 1]
    if not positives:
        return
    missed = [r for r in positives if not r.news_hit]
    q = len(missed) / len(positives)
    if q > 0:
        p_missed = min(1.0, strength / q)
    else:
        p_missed = 0.0
    p_hit = max(0.0, (strength - q) / (1.0 - q)) if q < 1 else 0.0
    for r in positives:
        r.bench_hit = bool(rng.random() < (p_hit if r.news_hit else p_missed))


def _benchmark_features(rng, truth, cfg):
    n = len(truth)
    shift = np.array([cfg.benchmark_shift if r.bench_hit else 0.0 for r in truth])
    X = shift[:, None] * _BENCH_LOADINGS[None, :] + rng.standard_normal((n, len(BENCHMARK_FEATURES)))
    return Dataset(
        X,
        [r.label for r in truth],
        list(BENCHMARK_FEATURES),
        [(r.pid, r.date) for r in truth],
    )


def _lexicon_entries(rng, vocab):
    """Five word->score maps in the native style of each lexicon."""
    entries = {}
    for name in LEXICON_ORDER:
        pos = [w for w in vocab.positive if rng.random() < 0.6]
        neg = [w for w in vocab.negative if rng.random() < 0.6]
        if name == "loughran_mcdonald":
            neg += [w for w in vocab.event if rng.random() < 0.03]
        neutral = [w for w in vocab.distractors if rng.random() < 0.02]
        scores = {}
        for w in pos:
            scores[w] = _lexicon_value(rng, name, +1)
        for w in neg:
            scores[w] = _lexicon_value(rng, name, -1)
        for w in neutral:
            scores.setdefault(w, "0")
        entries[name] = dict(sorted(scores.items()))
    # one word positive everywhere, so the lexicons agree on something
    for name in LEXICON_ORDER:
        entries[name][vocab.positive[0]] = _lexicon_value(rng, name, +1)
        entries[name] = dict(sorted(entries[name].items()))
    return entries


def _lexicon_value(rng, name, sign):
    if name in ("loughran_mcdonald", "opinion"):
        return "1" if sign > 0 else "-1"
    if name == "afinn":
        return str(sign * int(rng.integers(1, 6)))
    if name == "vader":
        return f"{sign * rng.uniform(0.5, 3.5):.1f}"
    return f"{sign * rng.choice([0.125, 0.25, 0.375, 0.5, 0.625, 0.75]):.3f}"


def _word_vectors(rng, vocab, cfg, stopwords):
    dim = cfg.vec_dim
    directions = np.linalg.qr(rng.standard_normal((dim, dim)))[0].T
    adverse = directions[0]
    pos_dir, neg_dir = directions[1], directions[2]
    topic_dirs = [directions[3 + k % (dim - 3)] for k in range(len(vocab.topics))]
    words, rows = [], []

    def add(word, signal):
        words.append(word)
        rows.append(signal + rng.standard_normal(dim) / math.sqrt(dim))

    for w in sorted(set(stopwords) | set(_FILLER) | set(_NEGATORS)):
        add(w, 0.0)
    for k, block in enumerate(vocab.topics):
        for w in block:
            add(w, 0.8 * topic_dirs[k])
    for w in vocab.event:
        add(w, 1.0 * adverse)
    for w in vocab.distress:
        add(w, 1.0 * adverse)
    for w in vocab.positive:
        add(w, 0.5 * pos_dir)
    for w in vocab.negative:
        add(w, 0.5 * neg_dir + 0.2 * adverse)
    for w in _DOWNGRADE_FORMS:
        add(w, 0.8 * adverse)
    for w in vocab.distractors:
        add(w, 0.0)
    table = WordVectorTable(words, np.vstack(rows).astype(np.float32))
    # quantize to the 9-digit text precision so file and memory agree
    return WordVectorTable(table.words, np.array([[float(f"{x:.9g}") for x in r] for r in table.vectors.tolist()],
                                                dtype=np.float32))


def planted_topic_corpus(n_docs=400, n_topics=4, words_per_topic=25, doc_length=60, purity=0.9, seed=0):
    """Token lists where each document draws mostly from one planted topic.

    A token comes from the document's own topic block with probability
    ``purity`` and from a uniformly chosen block otherwise. Within a block,
    words follow a Zipf law. Returns ``(corpus, doc_topics, topic_words)``.
    """
    if n_topics < 1 or n_docs < 1 or words_per_topic < 2 or doc_length < 1:
        raise ConfigError("planted corpus sizes must be positive")
    if not 0 <= purity <= 1:
        raise ConfigError("purity must be in [0, 1]")
    rng = np.random.default_rng(seed)
    words = _pseudo_words(rng, n_topics * words_per_topic, set())
    blocks = [words[k * words_per_topic:(k + 1) * words_per_topic] for k in range(n_topics)]
    p = _zipf(words_per_topic, 0.8)
    doc_topics = rng.integers(n_topics, size=n_docs)
    corpus = []
    for k in doc_topics:
        own = rng.random(doc_length) < purity
        src = np.where(own, k, rng.integers(n_topics, size=doc_length))
        idx = rng.choice(words_per_topic, size=doc_length, p=p)
        corpus.append([blocks[b][i] for b, i in zip(src, idx)])
    return corpus, doc_topics.tolist(), blocks


def write_bundle(bundle, out_dir):
    """Write every bundle file into ``out_dir``; returns the path map."""
    out = Path(out_dir)
    (out / "lexicons").mkdir(parents=True, exist_ok=True)
    paths = {
        "articles": out / "articles.jsonl",
        "aliases": out / "aliases.json",
        "ratings": out / "ratings.csv",
        "benchmark": out / "benchmark.csv",
        "lexicons": out / "lexicons",
        "vectors": out / "vectors.vec",
        "stopwords": out / "stopwords.txt",
        "preprocess": out / "preprocess.json",
        "manifest": out / "truth_manifest.json",
    }
    write_articles_jsonl(bundle.articles, paths["articles"])
    save_alias_table(bundle.aliases, paths["aliases"])
    write_ratings_csv(bundle.ratings, paths["ratings"])
    write_dataset_csv(bundle.benchmark, paths["benchmark"])
    for name, entries in bundle.lexicon_entries.items():
        lines = [f"# synthetic {name} lexicon"] + [f"{w}\t{s}" for w, s in entries.items()]
        (paths["lexicons"] / f"{name}.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    save_vec_file(bundle.word_vectors, paths["vectors"])
    paths["stopwords"].write_text("\n".join(sorted(bundle.stopwords)) + "\n", encoding="utf-8")
    paths["preprocess"].write_text(
        json.dumps({"boilerplate_patterns": list(BOILERPLATE_PATTERNS)}, indent=1) + "\n",
        encoding="utf-8",
    )
    paths["manifest"].write_text(json.dumps(bundle.manifest(), sort_keys=True, indent=1) + "\n",
                                 encoding="utf-8")
    return {k: str(v) for k, v in paths.items()}
