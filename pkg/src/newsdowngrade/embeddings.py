"""Document vectors: averaged pre-trained word vectors and PV-DM paragraph
vectors trained with negative sampling."""

from __future__ import annotations

import io
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from .errors import DimensionMismatch, EmptyCorpus, MalformedHeader, NonFinite, ValidationError

log = logging.getLogger(__name__)

DOC2VEC_VERSION = 1


@dataclass
class DocEmbedding:
    vector: np.ndarray
    coverage: float
    pid: str | None = None
    date: object = None


# -- pre-trained word vectors ------------------------------------------------


@dataclass
class WordVectorTable:
    words: list
    vectors: np.ndarray
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ValidationError("vector matrix does not match word list")
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValidationError("duplicate words in vector table")
        if not np.all(np.isfinite(self.vectors)):
            raise NonFinite("non-finite word vector")

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.index

    def __getitem__(self, word):
        return self.vectors[self.index[word]]


def load_vec_file(path):
    """Read the fastText ``.vec`` text format.

    Words are lowercased; on duplicates the first occurrence wins. A row
    count different from the header only triggers a warning.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            declared, dim = int(header[0]), int(header[1])
            if len(header) != 2 or dim < 1 or declared < 0:
                raise ValueError
        except (ValueError, IndexError):
            raise MalformedHeader(f"expected '<count> <dim>', got {' '.join(header)!r}", line=1) from None
        words, rows, seen = [], [], set()
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip().split(" ")
            if parts == [""]:
                continue
            if len(parts) - 1 != dim:
                raise DimensionMismatch(f"expected {dim} values, got {len(parts) - 1}", line=lineno)
            word = parts[0].lower()
            if word in seen:
                log.warning("%s:%d: duplicate word %r ignored", path, lineno, word)
                continue
            try:
                rows.append(np.array(parts[1:], dtype=np.float32))
            except ValueError:
                raise DimensionMismatch("non-numeric vector component", line=lineno) from None
            seen.add(word)
            words.append(word)
    if len(words) != declared:
        log.warning("%s: header declares %d words, read %d", path, declared, len(words))
    vectors = np.vstack(rows) if rows else np.zeros((0, dim), dtype=np.float32)
    return WordVectorTable(words, vectors)


def save_vec_file(table, path):
    """Write ``table`` as ``.vec`` text with 9 significant digits."""
    buf = io.StringIO()
    buf.write(f"{len(table)} {table.dim}\n")
    for word, vec in zip(table.words, table.vectors):
        buf.write(word + " " + " ".join(f"{x:.9g}" for x in vec.tolist()) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def doc_embedding_average(table, tokens):
    """Mean vector over in-vocabulary token occurrences (zeros if none)."""
    ids = [table.index[t] for t in tokens if t in table.index]
    coverage = len(ids) / len(tokens) if tokens else 0.0
    if not ids:
        return DocEmbedding(np.zeros(table.dim), 0.0)
    vector = table.vectors[ids].astype(np.float64).mean(axis=0)
    return DocEmbedding(vector, coverage)


# -- PV-DM -------------------------------------------------------------------


def _softplus(x):
    return max(x, 0.0) + math.log1p(math.exp(-abs(x)))


def pvdm_objective(doc_vec, context_vecs, target_out, noise_out):
    """Negative-sampling loss for one prediction and its exact gradients.

    The hidden vector is the mean of the document vector and the context
    word input vectors. Returns ``(loss, grads)`` where ``grads`` holds
    arrays for ``doc``, ``context`` (one row per context word), ``target``
    and ``noise`` (one row per noise word).
    """
    context_vecs = np.atleast_2d(context_vecs).reshape(-1, doc_vec.size)
    noise_out = np.atleast_2d(noise_out).reshape(-1, doc_vec.size)
    count = 1 + context_vecs.shape[0]
    h = (doc_vec + context_vecs.sum(axis=0)) / count
    f_pos = float(target_out @ h)
    f_neg = noise_out @ h
    loss = _softplus(-f_pos) + sum(_softplus(float(f)) for f in f_neg)
    g_pos = 1.0 / (1.0 + math.exp(-f_pos)) - 1.0
    g_neg = 1.0 / (1.0 + np.exp(-f_neg))
    grad_h = g_pos * target_out + g_neg @ noise_out
    grads = {
        "doc": grad_h / count,
        "context": np.tile(grad_h / count, (context_vecs.shape[0], 1)),
        "target": g_pos * h,
        "noise": g_neg[:, None] * h[None, :],
    }
    return loss, grads


@njit(cache=True)
def _nb_softplus(x):
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


@njit(cache=True)
def _pvdm_pass(
    tokens, offsets, doc_order, doc_vecs, word_in, word_out, negs,
    lr_start, lr_end, pos_start, total_positions, window, update_words,
):
    """One pass over ``doc_order``; returns summed loss. ``negs`` holds the
    pre-drawn noise words, one row per position in traversal order."""
    dim = doc_vecs.shape[1]
    n_neg = negs.shape[1]
    h = np.empty(dim)
    grad_h = np.empty(dim)
    loss = 0.0
    p = 0
    for di in range(doc_order.shape[0]):
        d = doc_order[di]
        s = offsets[d]
        e = offsets[d + 1]
        for i in range(s, e):
            progress = (pos_start + p) / total_positions
            lr = lr_start - (lr_start - lr_end) * progress
            lo = max(s, i - window)
            hi = min(e, i + window + 1)
            for k in range(dim):
                h[k] = doc_vecs[d, k]
            count = 1
            for j in range(lo, hi):
                if j != i:
                    w = tokens[j]
                    for k in range(dim):
                        h[k] += word_in[w, k]
                    count += 1
            for k in range(dim):
                h[k] /= count
                grad_h[k] = 0.0
            target = tokens[i]
            f = 0.0
            for k in range(dim):
                f += word_out[target, k] * h[k]
            loss += _nb_softplus(-f)
            g = 1.0 / (1.0 + math.exp(-f)) - 1.0
            for k in range(dim):
                grad_h[k] += g * word_out[target, k]
                if update_words:
                    word_out[target, k] -= lr * g * h[k]
            for n in range(n_neg):
                w = negs[p, n]
                if w == target:
                    continue
                f = 0.0
                for k in range(dim):
                    f += word_out[w, k] * h[k]
                loss += _nb_softplus(f)
                g = 1.0 / (1.0 + math.exp(-f))
                for k in range(dim):
                    grad_h[k] += g * word_out[w, k]
                    if update_words:
                        word_out[w, k] -= lr * g * h[k]
            scale = lr / count
            for k in range(dim):
                doc_vecs[d, k] -= scale * grad_h[k]
            if update_words:
                for j in range(lo, hi):
                    if j != i:
                        w = tokens[j]
                        for k in range(dim):
                            word_in[w, k] -= scale * grad_h[k]
            p += 1
    return loss


@dataclass
class Doc2VecModel:
    dim: int
    window: int
    negative: int
    epochs: int
    initial_lr: float
    min_lr: float
    seed: int
    vocab: list
    counts: np.ndarray
    word_in: np.ndarray
    word_out: np.ndarray
    doc_vectors: np.ndarray
    epoch_losses: list = field(default_factory=list)
    index: dict = field(init=False, repr=False)
    noise_cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.vocab)}
        weights = np.asarray(self.counts, dtype=np.float64) ** 0.75
        self.noise_cdf = np.cumsum(weights) / weights.sum()
        V = len(self.vocab)
        if self.word_in.shape != (V, self.dim) or self.word_out.shape != (V, self.dim):
            raise ValidationError("word matrices do not match vocabulary")
        if self.doc_vectors.shape[1] != self.dim:
            raise ValidationError("document matrix does not match dim")

    def encode(self, tokens):
        return np.asarray([self.index[t] for t in tokens if t in self.index], dtype=np.int64)

    def draw_noise(self, rng, shape):
        idx = np.searchsorted(self.noise_cdf, rng.random(shape), side="right")
        return np.minimum(idx, len(self.vocab) - 1).astype(np.int64)

    def save(self, path):
        meta = {
            "version": DOC2VEC_VERSION,
            "dim": self.dim,
            "window": self.window,
            "negative": self.negative,
            "epochs": self.epochs,
            "initial_lr": self.initial_lr,
            "min_lr": self.min_lr,
            "seed": self.seed,
            "vocab": self.vocab,
            "epoch_losses": self.epoch_losses,
        }
        with open(path, "wb") as fh:
            np.savez(
                fh,
                meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8),
                counts=self.counts,
                word_in=self.word_in,
                word_out=self.word_out,
                doc_vectors=self.doc_vectors,
            )

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            meta = json.loads(data["meta"].tobytes().decode())
            if meta.pop("version") != DOC2VEC_VERSION:
                raise ValidationError("unsupported Doc2Vec model version")
            return cls(
                counts=data["counts"],
                word_in=data["word_in"],
                word_out=data["word_out"],
                doc_vectors=data["doc_vectors"],
                **meta,
            )


def _flatten(encoded):
    offsets = np.zeros(len(encoded) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(e) for e in encoded])
    tokens = np.concatenate(encoded) if encoded else np.zeros(0, dtype=np.int64)
    return tokens.astype(np.int64), offsets


def train_doc2vec_dm(
    corpus,
    dim=100,
    window=5,
    epochs=20,
    negative=5,
    initial_lr=0.025,
    min_lr=1e-4,
    seed=0,
    min_count=1,
):
    """Train PV-DM paragraph vectors (mean-of-context, negative sampling).

    ``corpus`` is a list of token lists; row ``i`` of ``doc_vectors`` belongs
    to document ``i``. Single-threaded and deterministic for a fixed seed.
    """
    if not corpus or not any(corpus):
        raise EmptyCorpus("Doc2Vec corpus is empty")
    if dim < 1 or window < 1:
        raise ValidationError("dim and window must be >= 1")
    freq = Counter(t for doc in corpus for t in doc)
    vocab = sorted((w for w, c in freq.items() if c >= min_count), key=lambda w: (-freq[w], w))
    if not vocab:
        raise EmptyCorpus("no word reaches min_count")
    rng = np.random.default_rng(seed)
    V, D = len(vocab), len(corpus)
    model = Doc2VecModel(
        dim=dim,
        window=window,
        negative=negative,
        epochs=epochs,
        initial_lr=initial_lr,
        min_lr=min_lr,
        seed=seed,
        vocab=vocab,
        counts=np.asarray([freq[w] for w in vocab], dtype=np.int64),
        word_in=(rng.random((V, dim)) - 0.5) / dim,
        word_out=np.zeros((V, dim)),
        doc_vectors=(rng.random((D, dim)) - 0.5) / dim,
    )
    tokens, offsets = _flatten([model.encode(doc) for doc in corpus])
    n_pos = tokens.size
    total = max(n_pos * epochs, 1)
    for epoch in range(epochs):
        order = rng.permutation(D).astype(np.int64)
        negs = model.draw_noise(rng, (n_pos, negative))
        loss = _pvdm_pass(
            tokens, offsets, order, model.doc_vectors, model.word_in, model.word_out, negs,
            initial_lr, min_lr, epoch * n_pos, total, window, True,
        )
        model.epoch_losses.append(loss / max(n_pos, 1))
    for name in ("word_in", "word_out", "doc_vectors"):
        if not np.all(np.isfinite(getattr(model, name))):
            raise NonFinite(f"Doc2Vec {name} diverged")
    return model


def infer_doc_vector(model, tokens, steps=50, seed=0, lr=None):
    """Fit a fresh document vector against frozen word matrices."""
    rng = np.random.default_rng(seed)
    vec = (rng.random((1, model.dim)) - 0.5) / model.dim
    ids = model.encode(tokens)
    coverage = ids.size / len(tokens) if tokens else 0.0
    if ids.size:
        lr = model.initial_lr if lr is None else lr
        offsets = np.array([0, ids.size], dtype=np.int64)
        order = np.zeros(1, dtype=np.int64)
        total = ids.size * steps
        for step in range(steps):
            negs = model.draw_noise(rng, (ids.size, model.negative))
            _pvdm_pass(
                ids, offsets, order, vec, model.word_in, model.word_out, negs,
                lr, model.min_lr, step * ids.size, total, model.window, False,
            )
    vector = vec[0].copy()
    if not np.all(np.isfinite(vector)):
        raise NonFinite("inferred document vector diverged")
    return DocEmbedding(vector, coverage)
