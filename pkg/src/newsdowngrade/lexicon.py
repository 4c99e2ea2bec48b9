"""Word-list sentiment scoring with a three-token negation window."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError

log = logging.getLogger(__name__)

LEXICON_ORDER = ("loughran_mcdonald", "vader", "afinn", "sentiwordnet", "opinion")
DEFAULT_NEGATORS = frozenset({"no", "not", "never", "n't", "without", "none"})
NEGATION_WINDOW = 3


@dataclass(frozen=True)
class Lexicon:
    name: str
    positive: frozenset
    negative: frozenset

    def __post_init__(self):
        if self.positive & self.negative:
            raise ValueError(f"lexicon {self.name}: words in both polarity sets")

    def swapped(self):
        return Lexicon(self.name, self.negative, self.positive)


@dataclass(frozen=True)
class SentimentScore:
    lexicon: str
    value: float
    positives_counted: int
    negatives_counted: int


def load_lexicon(path, name):
    """Parse a ``word<TAB>score`` file; scores are binarized by sign.

    Zero-valence entries are ignored. A word that ends up in both sets is
    dropped with a warning.
    """
    positive, negative = set(), set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 'word<TAB>score', got {raw!r}", line=lineno)
        word, score = parts[0].strip().lower(), parts[1].strip()
        try:
            value = float(score)
        except ValueError:
            raise ParseError(f"score {score!r} is not numeric", line=lineno) from None
        if not word:
            raise ParseError("empty word", line=lineno)
        if value > 0:
            positive.add(word)
        elif value < 0:
            negative.add(word)
    overlap = positive & negative
    if overlap:
        log.warning("lexicon %s: dropping %d words with both polarities: %s",
                    name, len(overlap), sorted(overlap)[:10])
        positive -= overlap
        negative -= overlap
    return Lexicon(name, frozenset(positive), frozenset(negative))


def save_lexicon(lexicon, path, positive_score="1", negative_score="-1"):
    lines = [f"# {lexicon.name}"]
    lines += [f"{w}\t{positive_score}" for w in sorted(lexicon.positive)]
    lines += [f"{w}\t{negative_score}" for w in sorted(lexicon.negative)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sentiment_score(tokens, lexicon, negators=DEFAULT_NEGATORS):
    """(#pos - #neg) / (#pos + #neg), skipping positives negated within
    the three preceding tokens. Negative hits are always counted."""
    p = n = 0
    for i, token in enumerate(tokens):
        if token in lexicon.positive:
            if not any(t in negators for t in tokens[max(0, i - NEGATION_WINDOW):i]):
                p += 1
        elif token in lexicon.negative:
            n += 1
    value = (p - n) / (p + n) if p + n else 0.0
    return SentimentScore(lexicon.name, value, p, n)


def score_all(tokens, lexicons, negators=DEFAULT_NEGATORS):
    """Scores for the five lexicons, in :data:`LEXICON_ORDER`.

    ``lexicons`` maps lexicon name to :class:`Lexicon`.
    """
    return np.array(
        [sentiment_score(tokens, lexicons[name], negators).value for name in LEXICON_ORDER]
    )


def load_lexicons(directory, names=LEXICON_ORDER):
    """Load ``<directory>/<name>.txt`` for each lexicon name."""
    directory = Path(directory)
    return {name: load_lexicon(directory / f"{name}.txt", name) for name in names}
