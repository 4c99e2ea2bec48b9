"""Latent Dirichlet allocation by collapsed Gibbs sampling, held-out topic
inference, sliding-window NPMI coherence and topic-count selection."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .errors import DegenerateVocabulary, EmptyCorpus, InsufficientCorpus, ValidationError

MODEL_VERSION = 1
COHERENCE_WINDOW = 110


@njit(cache=True)
def _gibbs_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, vbeta, uniforms):
    n_topics = nk.shape[0]
    cum = np.empty(n_topics)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        r = uniforms[i] * total
        k = 0
        while k < n_topics - 1 and cum[k] <= r:
            k += 1
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


@njit(cache=True)
def _infer_sweep(words, z, nd, nkw, nk, alpha, beta, vbeta, uniforms):
    n_topics = nk.shape[0]
    cum = np.empty(n_topics)
    for i in range(words.shape[0]):
        w = words[i]
        nd[z[i]] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (nd[t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            cum[t] = total
        r = uniforms[i] * total
        k = 0
        while k < n_topics - 1 and cum[k] <= r:
            k += 1
        z[i] = k
        nd[k] += 1


@dataclass
class LdaModel:
    n_topics: int
    alpha: float
    beta: float
    vocab: list
    topic_word_counts: np.ndarray
    topic_totals: np.ndarray
    seed: int = 0
    iterations: int = 0
    word_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.word_index = {w: i for i, w in enumerate(self.vocab)}
        if self.n_topics < 2:
            raise ValidationError("LDA needs at least 2 topics")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("alpha and beta must be positive")

    @property
    def vocab_size(self):
        return len(self.vocab)

    def topic_word_distribution(self):
        """Posterior-mean topic-word probabilities, shape (K, V)."""
        counts = self.topic_word_counts + self.beta
        return counts / counts.sum(axis=1, keepdims=True)

    def top_words(self, n=10):
        order = np.argsort(-self.topic_word_counts, axis=1, kind="stable")[:, :n]
        return [[self.vocab[j] for j in row] for row in order]

    def to_dict(self):
        return {
            "version": MODEL_VERSION,
            "n_topics": self.n_topics,
            "alpha": self.alpha,
            "beta": self.beta,
            "seed": self.seed,
            "iterations": self.iterations,
            "vocab": list(self.vocab),
            "topic_word_counts": self.topic_word_counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("version") != MODEL_VERSION:
            raise ValidationError(f"unsupported LDA model version {data.get('version')}")
        counts = np.asarray(data["topic_word_counts"], dtype=np.int64)
        return cls(
            n_topics=data["n_topics"],
            alpha=data["alpha"],
            beta=data["beta"],
            vocab=list(data["vocab"]),
            topic_word_counts=counts,
            topic_totals=counts.sum(axis=1),
            seed=data["seed"],
            iterations=data["iterations"],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_vocabulary(corpus, min_count=2, max_doc_frac=0.5):
    """Words seen at least ``min_count`` times and in no more than
    ``max_doc_frac`` of the documents, sorted."""
    counts = Counter(t for doc in corpus for t in doc)
    doc_freq = Counter(t for doc in corpus for t in set(doc))
    limit = max_doc_frac * len(corpus)
    return sorted(w for w, c in counts.items() if c >= min_count and doc_freq[w] <= limit)


def train_lda(
    corpus,
    n_topics,
    alpha=None,
    beta=0.01,
    iterations=1000,
    seed=0,
    min_count=2,
    max_doc_frac=0.5,
    callback=None,
):
    """Fit LDA with collapsed Gibbs sampling.

    ``alpha`` defaults to 50 / K. ``callback(sweep, nkw, nk)`` is invoked
    after every sweep, if given. Deterministic for a fixed seed.
    """
    if not corpus or not any(corpus):
        raise EmptyCorpus("LDA corpus is empty")
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    alpha = 50.0 / n_topics if alpha is None else float(alpha)
    vocab = build_vocabulary(corpus, min_count, max_doc_frac)
    if len(vocab) < n_topics:
        raise DegenerateVocabulary(f"vocabulary of {len(vocab)} words < {n_topics} topics")
    index = {w: i for i, w in enumerate(vocab)}
    words, docs = [], []
    for d, doc in enumerate(corpus):
        for t in doc:
            j = index.get(t)
            if j is not None:
                words.append(j)
                docs.append(d)
    if not words:
        raise EmptyCorpus("no tokens survive vocabulary filtering")
    words = np.asarray(words, dtype=np.int64)
    docs = np.asarray(docs, dtype=np.int64)

    rng = np.random.default_rng(seed)
    z = rng.integers(n_topics, size=words.size).astype(np.int64)
    ndk = np.zeros((len(corpus), n_topics), dtype=np.int64)
    nkw = np.zeros((n_topics, len(vocab)), dtype=np.int64)
    np.add.at(ndk, (docs, z), 1)
    np.add.at(nkw, (z, words), 1)
    nk = nkw.sum(axis=1)
    vbeta = len(vocab) * beta
    for sweep in range(iterations):
        _gibbs_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, vbeta, rng.random(words.size))
        if callback is not None:
            callback(sweep, nkw, nk)
    return LdaModel(
        n_topics=n_topics,
        alpha=alpha,
        beta=beta,
        vocab=vocab,
        topic_word_counts=nkw,
        topic_totals=nk,
        seed=seed,
        iterations=iterations,
    )


def infer_topic_mixture(model, tokens, burn_in_iterations=50, seed=0, samples=10):
    """Topic proportions for a held-out document with the model frozen.

    After burn-in, (n_dk + alpha) / (N_d + K alpha) is averaged over
    ``samples`` further sweeps. Documents with no known word get the
    uniform mixture.
    """
    K = model.n_topics
    words = np.asarray(
        [model.word_index[t] for t in tokens if t in model.word_index], dtype=np.int64
    )
    if words.size == 0:
        return np.full(K, 1.0 / K)
    rng = np.random.default_rng(seed)
    z = rng.integers(K, size=words.size).astype(np.int64)
    nd = np.bincount(z, minlength=K).astype(np.int64)
    nkw = model.topic_word_counts
    nk = model.topic_totals
    vbeta = model.vocab_size * model.beta
    for _ in range(burn_in_iterations):
        _infer_sweep(words, z, nd, nkw, nk, model.alpha, model.beta, vbeta, rng.random(words.size))
    acc = np.zeros(K)
    for _ in range(max(samples, 1)):
        _infer_sweep(words, z, nd, nkw, nk, model.alpha, model.beta, vbeta, rng.random(words.size))
        acc += (nd + model.alpha) / (words.size + K * model.alpha)
    return acc / acc.sum()


def _window_presence(doc_ids, n_words, window):
    """Boolean (n_windows, n_words) matrix of word presence per window."""
    L = doc_ids.size
    onehot = np.zeros((L + 1, n_words), dtype=np.int32)
    hit = doc_ids >= 0
    onehot[1:][np.flatnonzero(hit), doc_ids[hit]] = 1
    cum = np.cumsum(onehot, axis=0)
    if L <= window:
        return (cum[-1:] > 0)
    return (cum[window:] - cum[: L - window + 1]) > 0


def npmi_matrix(corpus, words, window=COHERENCE_WINDOW):
    """Pairwise NPMI of ``words`` over boolean sliding windows.

    Co-occurrence counts get +1 smoothing; values are clipped to [-1, 1].
    Returns ``(npmi, word_window_counts)``.
    """
    index = {w: i for i, w in enumerate(words)}
    n = len(words)
    single = np.zeros(n, dtype=np.int64)
    joint = np.zeros((n, n), dtype=np.int64)
    n_windows = 0
    for doc in corpus:
        if not doc:
            continue
        ids = np.fromiter((index.get(t, -1) for t in doc), dtype=np.int64, count=len(doc))
        presence = _window_presence(ids, n, window).astype(np.int64)
        n_windows += presence.shape[0]
        single += presence.sum(axis=0)
        joint += presence.T @ presence
    if n_windows == 0:
        raise InsufficientCorpus("reference corpus has no windows")
    p_single = single / n_windows
    p_joint = (joint + 1) / n_windows
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(p_joint) - np.log(p_single)[:, None] - np.log(p_single)[None, :]
        denom = -np.log(p_joint)
        npmi = np.where(denom > 0, pmi / denom, 1.0)
    return np.clip(npmi, -1.0, 1.0), single


def coherence(model, corpus, top_n=10, window=COHERENCE_WINDOW):
    """Mean over topics of the mean pairwise NPMI of each topic's top words."""
    tops = model.top_words(top_n)
    words = sorted({w for topic in tops for w in topic})
    npmi, single = npmi_matrix(corpus, words, window)
    missing = [w for w, c in zip(words, single) if c == 0]
    if missing:
        raise InsufficientCorpus(f"top words never occur in reference corpus: {missing[:5]}")
    index = {w: i for i, w in enumerate(words)}
    per_topic = []
    for topic in tops:
        ids = [index[w] for w in topic]
        pairs = [npmi[a, b] for i, a in enumerate(ids) for b in ids[i + 1 :]]
        per_topic.append(float(np.mean(pairs)) if pairs else 0.0)
    return float(np.mean(per_topic))


def select_topic_count(
    corpus, k_grid, alpha=None, beta=0.01, iterations=1000, seed=0, top_n=10, **lda_kwargs
):
    """Train one model per K and return ``(best_K, {K: coherence})``.

    Ties go to the smaller K. ``alpha=None`` means 50 / K for each K.
    """
    if not k_grid:
        raise ValidationError("empty topic-count grid")
    curve = {}
    for K in sorted(k_grid):
        if K < 2:
            raise ValidationError(f"topic count {K} < 2")
        model = train_lda(corpus, K, alpha, beta, iterations, seed, **lda_kwargs)
        curve[K] = coherence(model, corpus, top_n)
    best = max(curve.values())
    best_k = min(K for K, c in curve.items() if c == best)
    return best_k, curve
