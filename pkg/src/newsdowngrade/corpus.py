"""News ingestion: cleaning, company sentence extraction, tokenization and
company-day aggregation."""

from __future__ import annotations

import datetime as dt
import enum
import html
import json
import re
from collections import defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer

from .errors import MixedKeys, ParseError, UnknownPid, ValidationError

FORMAT_TAGS = (
    "story",
    "market-snapshot",
    "earnings-summary",
    "machine-generated",
    "unverified",
    "other",
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")
_TAG_RE = re.compile(r"<[^>]*>")
_SPACE_RE = re.compile(r"[ \t\r\f\v]+")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")

_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


class DropReason(enum.Enum):
    MACHINE_GENERATED = "machine-generated"
    UNVERIFIED = "unverified"
    TOO_SHORT = "too-short"


_DROPPED_FORMATS = {
    "machine-generated": DropReason.MACHINE_GENERATED,
    "unverified": DropReason.UNVERIFIED,
}


@dataclass(frozen=True)
class RawArticle:
    pid: str
    date: dt.date
    headline: str
    body: str
    format_tag: str = "story"

    def __post_init__(self):
        if not self.pid:
            raise ValidationError("article pid must be non-empty")
        if not isinstance(self.date, dt.date):
            raise ValidationError(f"article date must be a date, got {self.date!r}")
        if not self.body and not self.headline:
            raise ValidationError(f"article {self.pid}/{self.date} has neither headline nor body")
        if self.format_tag not in FORMAT_TAGS:
            raise ValidationError(f"unknown format_tag {self.format_tag!r}")

    @property
    def key(self):
        return (self.pid, self.date)

    @classmethod
    def from_dict(cls, record):
        try:
            return cls(
                pid=str(record["pid"]),
                date=dt.date.fromisoformat(record["date"]),
                headline=record.get("headline") or "",
                body=record.get("body") or "",
                format_tag=record.get("format_tag", "story"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"bad article record: {exc}") from exc

    def to_dict(self):
        return {
            "pid": self.pid,
            "date": self.date.isoformat(),
            "headline": self.headline,
            "body": self.body,
            "format_tag": self.format_tag,
        }


@dataclass(frozen=True)
class CompanyAliases:
    name: str
    aliases: frozenset

    @property
    def all_names(self):
        return self.aliases | {self.name}


def normalize_alias(text):
    return " ".join(text.lower().split())


class CompanyAliasTable(dict):
    """Mapping ``pid -> CompanyAliases`` with lowercase-normalized names."""

    @classmethod
    def from_mapping(cls, mapping):
        table = cls()
        for pid, entry in mapping.items():
            name = normalize_alias(entry["name"])
            if not name:
                raise ValidationError(f"empty canonical name for pid {pid}")
            aliases = frozenset(normalize_alias(a) for a in entry.get("aliases", ()) if a.strip())
            table[str(pid)] = CompanyAliases(name, aliases)
        return table

    def to_mapping(self):
        return {
            pid: {"name": entry.name, "aliases": sorted(entry.aliases)}
            for pid, entry in sorted(self.items())
        }


@dataclass
class CleanConfig:
    min_tokens: int = 20
    strip_html: bool = True
    boilerplate_patterns: Sequence[str] = ()
    fuzzy_threshold: float = 0.85
    multi_company_formats: Sequence[str] = ("market-snapshot",)
    stemming: bool = False

    def compiled_patterns(self):
        return [re.compile(p, re.IGNORECASE) for p in self.boilerplate_patterns]


@dataclass(frozen=True)
class CleanResult:
    text: str | None = None
    reason: DropReason | None = None

    @property
    def kept(self):
        return self.reason is None


@dataclass
class ArticleTokens:
    pid: str
    date: dt.date
    tokens: list
    sentences_kept: int = 0


@dataclass
class CleanDocument:
    pid: str
    date: dt.date
    tokens: list
    sentences_kept: int
    articles_merged: int

    @property
    def key(self):
        return (self.pid, self.date)

    def to_dict(self):
        return {
            "pid": self.pid,
            "date": self.date.isoformat(),
            "tokens": list(self.tokens),
            "sentences_kept": self.sentences_kept,
            "articles_merged": self.articles_merged,
        }

    @classmethod
    def from_dict(cls, record):
        return cls(
            pid=record["pid"],
            date=dt.date.fromisoformat(record["date"]),
            tokens=list(record["tokens"]),
            sentences_kept=int(record["sentences_kept"]),
            articles_merged=int(record["articles_merged"]),
        )


def _clean_once(text, patterns, strip_html):
    lines = []
    for line in text.splitlines():
        if strip_html:
            line = _TAG_RE.sub(" ", html.unescape(line))
        if any(p.search(line) for p in patterns):
            continue
        line = _SPACE_RE.sub(" ", line).strip().lower()
        if line:
            lines.append(line)
    return "\n".join(lines)


def clean_text(text, config=None):
    """Strip boilerplate lines and HTML, lowercase, squeeze whitespace.

    Applied until a fixed point so the result is idempotent even for
    nested entity escapes.
    """
    config = config or CleanConfig()
    patterns = config.compiled_patterns()
    for _ in range(64):
        cleaned = _clean_once(text, patterns, config.strip_html)
        if cleaned == text:
            break
        text = cleaned
    return text


def count_tokens(text):
    return len(_TOKEN_RE.findall(text.lower()))


def clean_article(raw, config=None):
    """Return the cleaned text of ``raw`` or the reason it was dropped."""
    config = config or CleanConfig()
    if raw.format_tag in _DROPPED_FORMATS:
        return CleanResult(reason=_DROPPED_FORMATS[raw.format_tag])
    body = clean_text(raw.body, config)
    if count_tokens(body) < config.min_tokens:
        return CleanResult(reason=DropReason.TOO_SHORT)
    headline = clean_text(raw.headline, config)
    if headline:
        if headline[-1] not in ".!?":
            headline += "."
        text = f"{headline}\n{body}" if body else headline
    else:
        text = body
    return CleanResult(text=text)


def levenshtein(a, b):
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def fuzzy_match_score(a, b):
    """1 - lev(a, b) / max(|a|, |b|); 1.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def split_sentences(text):
    return [s for s in _SENTENCE_SPLIT_RE.split(text.strip()) if s]


def _sentence_mentions(sentence, aliases, threshold):
    if any(alias in sentence for alias in aliases):
        return True
    words = _TOKEN_RE.findall(sentence)
    for alias in aliases:
        n = len(alias.split())
        for start in range(len(words) - n + 1):
            window = " ".join(words[start : start + n])
            # length gap alone bounds the best achievable score
            longest = max(len(window), len(alias))
            if 1.0 - abs(len(window) - len(alias)) / longest < threshold:
                continue
            if fuzzy_match_score(window, alias) >= threshold:
                return True
    return False


def extract_relevant_sentences(text, pid, aliases, threshold=0.85, multi_company=True):
    """Sentences of ``text`` that mention company ``pid``.

    Single-company formats keep every sentence. Otherwise a sentence is
    kept on an exact alias substring hit or when some alias-length token
    window fuzzy-matches an alias at ``threshold`` or above.
    """
    if pid not in aliases:
        raise UnknownPid(pid)
    sentences = split_sentences(text)
    if not multi_company:
        return sentences
    names = aliases[pid].all_names
    return [s for s in sentences if _sentence_mentions(s, names, threshold)]


def stem(word):
    return _stemmer.stem(word)


def tokenize_and_normalize(text, stopwords=frozenset(), stemming=False):
    tokens = [t for t in _TOKEN_RE.findall(text.lower()) if t not in stopwords]
    if stemming:
        tokens = [stem(t) for t in tokens]
    return tokens


def aggregate_company_day(docs):
    """Concatenate the article token lists of one (pid, date) in order."""
    if not docs:
        raise MixedKeys("no articles to aggregate")
    pid, date = docs[0].pid, docs[0].date
    for doc in docs[1:]:
        if (doc.pid, doc.date) != (pid, date):
            raise MixedKeys(f"expected {pid}/{date}, got {doc.pid}/{doc.date}")
    tokens = [t for doc in docs for t in doc.tokens]
    return CleanDocument(
        pid=pid,
        date=date,
        tokens=tokens,
        sentences_kept=sum(doc.sentences_kept for doc in docs),
        articles_merged=len(docs),
    )


@dataclass
class PreprocessStats:
    articles_in: int = 0
    articles_kept: int = 0
    dropped: dict = field(default_factory=dict)
    empty_after_extraction: int = 0
    documents_out: int = 0

    def to_dict(self):
        return {
            "articles_in": self.articles_in,
            "articles_kept": self.articles_kept,
            "dropped": dict(sorted(self.dropped.items())),
            "empty_after_extraction": self.empty_after_extraction,
            "documents_out": self.documents_out,
        }


def preprocess_articles(articles, aliases, stopwords=frozenset(), config=None):
    """Run the full cleaning chain and return ``(documents, stats)``.

    Documents are ordered by (pid, date); articles within a company-day keep
    their input order.
    """
    config = config or CleanConfig()
    stats = PreprocessStats()
    multi_formats = set(config.multi_company_formats)
    grouped = defaultdict(list)
    for raw in articles:
        stats.articles_in += 1
        result = clean_article(raw, config)
        if not result.kept:
            name = result.reason.value
            stats.dropped[name] = stats.dropped.get(name, 0) + 1
            continue
        sentences = extract_relevant_sentences(
            result.text,
            raw.pid,
            aliases,
            threshold=config.fuzzy_threshold,
            multi_company=raw.format_tag in multi_formats,
        )
        tokens = tokenize_and_normalize(" ".join(sentences), stopwords, config.stemming)
        if not tokens:
            stats.empty_after_extraction += 1
            continue
        stats.articles_kept += 1
        grouped[raw.key].append(ArticleTokens(raw.pid, raw.date, tokens, len(sentences)))
    documents = [aggregate_company_day(grouped[key]) for key in sorted(grouped)]
    stats.documents_out = len(documents)
    return documents, stats


# -- file formats ----------------------------------------------------------


def read_articles_jsonl(path):
    articles = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            articles.append(RawArticle.from_dict(record))
    return articles


def write_articles_jsonl(articles, path):
    with open(path, "w", encoding="utf-8") as fh:
        for article in articles:
            fh.write(json.dumps(article.to_dict(), sort_keys=True) + "\n")


def load_alias_table(path):
    with open(path, encoding="utf-8") as fh:
        return CompanyAliasTable.from_mapping(json.load(fh))


def save_alias_table(table, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(table.to_mapping(), fh, indent=1, sort_keys=True)


def load_stopwords(path=None):
    """Read one stopword per line; ``None`` loads the bundled English list."""
    if path is None:
        text = resources.files("newsdowngrade").joinpath("data/stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return frozenset(w.strip().lower() for w in text.splitlines() if w.strip())


def write_documents_jsonl(documents: Iterable[CleanDocument], path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(doc.to_dict(), sort_keys=True) + "\n")


def read_documents_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [CleanDocument.from_dict(json.loads(line)) for line in fh if line.strip()]
