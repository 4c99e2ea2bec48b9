"""Holdout metrics (AUC, recall, cumulative gains), the multi-seed
robustness harness and the TP/FN inspection report."""

from __future__ import annotations

import csv
import datetime as dt
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DowngradeError, JoinKeyMismatch, NoPositives, SingleClass, ValidationError

SNIPPET_TOKENS = 200
DEFAULT_GAINS_GRID = tuple(round(0.05 * i, 2) for i in range(1, 21))


@dataclass
class ScoredSet:
    keys: list
    scores: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if not (len(self.keys) == self.scores.size == self.labels.size):
            raise ValidationError("keys, scores and labels differ in length")
        if not np.all(np.isfinite(self.scores)):
            raise ValidationError("scores must be finite")

    @classmethod
    def from_arrays(cls, scores, labels, keys=None):
        scores = np.asarray(scores, dtype=np.float64)
        if keys is None:
            keys = [(str(i), None) for i in range(scores.size)]
        return cls(list(keys), scores, labels)

    def __len__(self):
        return self.scores.size

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["pid", "date", "score", "label"])
            for (pid, date), s, y in zip(self.keys, self.scores, self.labels):
                date = date.isoformat() if hasattr(date, "isoformat") else (date or "")
                writer.writerow([pid, date, repr(float(s)), int(y)])

    @classmethod
    def read_csv(cls, path):
        keys, scores, labels = [], [], []
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                date = dt.date.fromisoformat(row["date"]) if row.get("date") else None
                keys.append((row["pid"], date))
                scores.append(float(row["score"]))
                labels.append(int(row["label"]))
        return cls(keys, scores, labels)


def midranks(values):
    """1-based ranks with ties sharing the average of their positions."""
    _, inverse, counts = np.unique(np.asarray(values), return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    return (0.5 * (ends - counts + 1 + ends))[inverse.reshape(-1)]


def auc(scored):
    """Mann-Whitney estimate of P(score+ > score-) + 0.5 P(tie)."""
    labels = scored.labels
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes")
    ranks = midranks(scored.scores)
    u = ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def recall_at_threshold(scored, threshold=0.5):
    positives = scored.labels == 1
    if not positives.any():
        raise NoPositives("recall needs at least one positive")
    return float(np.mean(scored.scores[positives] >= threshold))


@dataclass
class GainsCurve:
    fractions: np.ndarray
    captured: np.ndarray

    def rows(self):
        return list(zip(self.fractions.tolist(), self.captured.tolist()))

    def at(self, fraction):
        idx = int(np.argmin(np.abs(self.fractions - fraction)))
        return float(self.captured[idx])

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["fraction", "captured"])
            for f, c in self.rows():
                writer.writerow([repr(f), repr(c)])


def cumulative_gains(scored, grid=DEFAULT_GAINS_GRID):
    """Share of all positives found in the top ceil(f * N) rows by score.

    Ties in score keep input order.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[-1] != 1.0 or grid[0] <= 0:
        raise ValidationError("gains grid must be ascending in (0, 1] and end at 1.0")
    n_pos = int(scored.labels.sum())
    if n_pos == 0 or n_pos == len(scored):
        raise SingleClass("cumulative gains need both classes")
    order = np.argsort(-scored.scores, kind="stable")
    hits = np.cumsum(scored.labels[order])
    n = len(scored)
    tops = np.ceil(grid * n - 1e-9).astype(np.int64).clip(1, n)
    captured = hits[tops - 1] / n_pos
    return GainsCurve(grid, captured)


def classification_report(scored, threshold=0.5, grid=DEFAULT_GAINS_GRID):
    curve = cumulative_gains(scored, grid)
    return {
        "n": len(scored),
        "positives": int(scored.labels.sum()),
        "auc": auc(scored),
        "recall": recall_at_threshold(scored, threshold),
        "threshold": threshold,
        "gains_top10": curve.at(0.1),
        "gains_top20": curve.at(0.2),
    }


# -- robustness ----------------------------------------------------------------


@dataclass
class RobustnessReport:
    seeds: list
    gains: list
    benchmark_aucs: list
    final_aucs: list
    failed: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.gains)

    @property
    def complete(self):
        return not self.failed

    @property
    def mean(self):
        return float(np.mean(self.gains)) if self.gains else float("nan")

    @property
    def std_defined(self):
        return self.n > 1

    @property
    def std(self):
        """Sample standard deviation of the per-seed gains; 0 when n == 1."""
        return float(np.std(self.gains, ddof=1)) if self.n > 1 else 0.0

    @property
    def std_error(self):
        return self.std / math.sqrt(self.n) if self.n else float("nan")

    @property
    def positive_count(self):
        return int(sum(g > 0 for g in self.gains))

    def histogram(self, bins=10):
        counts, edges = np.histogram(np.asarray(self.gains), bins=bins)
        return [(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(len(counts))]

    def summary(self):
        return {
            "requested_seeds": len(self.seeds),
            "completed_seeds": self.n,
            "failed_seeds": {str(k): v for k, v in sorted(self.failed.items())},
            "complete": self.complete,
            "mean_gain": self.mean,
            "std_gain": self.std,
            "std_defined": self.std_defined,
            "std_error_of_mean": self.std_error,
            "positive_gains": self.positive_count,
        }

    def write_gains_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["seed", "benchmark_auc", "final_auc", "gain"])
            done = [s for s in self.seeds if s not in self.failed]
            for s, b, f, g in zip(done, self.benchmark_aucs, self.final_aucs, self.gains):
                writer.writerow([s, repr(b), repr(f), repr(g)])

    def write_histogram_csv(self, path, bins=10):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_left", "bin_right", "count"])
            for left, right, count in self.histogram(bins):
                writer.writerow([repr(left), repr(right), count])


def robustness_experiment(run_seed, seeds):
    """Call ``run_seed(seed) -> (benchmark_auc, final_auc)`` for every seed.

    A seed whose run raises a package error is recorded in ``failed`` and
    skipped.
    """
    seeds = list(seeds)
    report = RobustnessReport(seeds=seeds, gains=[], benchmark_aucs=[], final_aucs=[])
    for seed in seeds:
        try:
            bench, final = run_seed(seed)
        except DowngradeError as exc:
            report.failed[seed] = f"{type(exc).__name__}: {exc}"
            continue
        report.benchmark_aucs.append(bench)
        report.final_aucs.append(final)
        report.gains.append(final - bench)
    return report


# -- inspection ------------------------------------------------------------------


@dataclass
class InspectionEntry:
    pid: str
    date: object
    score: float
    snippet: str


@dataclass
class InspectionReport:
    threshold: float
    true_positives: list
    false_negatives: list

    @staticmethod
    def _by_company(entries):
        grouped = defaultdict(list)
        for e in entries:
            grouped[e.pid].append(e)
        return dict(grouped)

    def summary(self):
        return {
            "threshold": self.threshold,
            "true_positives": len(self.true_positives),
            "true_positive_companies": len({e.pid for e in self.true_positives}),
            "false_negatives": len(self.false_negatives),
            "false_negative_companies": len({e.pid for e in self.false_negatives}),
        }

    def to_text(self):
        lines = []
        for title, entries in (("TRUE POSITIVES", self.true_positives),
                               ("FALSE NEGATIVES", self.false_negatives)):
            lines.append(f"== {title} ({len(entries)}) ==")
            for pid, rows in self._by_company(entries).items():
                lines.append(f"-- {pid}")
                for e in rows:
                    date = e.date.isoformat() if hasattr(e.date, "isoformat") else e.date
                    lines.append(f"   {date}  score={e.score:.4f}  {e.snippet}")
        return "\n".join(lines) + "\n"


def inspection_report(scored, threshold, documents):
    """Split holdout positives into true positives and false negatives.

    ``documents`` maps (pid, date) to a CleanDocument. TPs are sorted by
    score descending, FNs ascending.
    """
    tp, fn = [], []
    for key, score, label in zip(scored.keys, scored.scores, scored.labels):
        if label != 1:
            continue
        doc = documents.get(key)
        if doc is None:
            raise JoinKeyMismatch(f"no document for {key}")
        entry = InspectionEntry(key[0], key[1], float(score), " ".join(doc.tokens[:SNIPPET_TOKENS]))
        (tp if score >= threshold else fn).append(entry)
    tp.sort(key=lambda e: -e.score)
    fn.sort(key=lambda e: e.score)
    return InspectionReport(threshold, tp, fn)
