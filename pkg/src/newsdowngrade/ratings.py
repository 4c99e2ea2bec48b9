"""Two-agency rating timelines and 1-year-forward downgrade labels.

Ratings live on a unified 21-notch integer scale: 1 is the best grade
(Aaa / AAA), 21 the worst (C / D). Larger is worse.
"""

from __future__ import annotations

import bisect
import csv
import datetime as dt
from collections import Counter, defaultdict
from dataclasses import dataclass

from .errors import BothMissing, NoCurrentRating, ParseError, UnknownSymbol

N_NOTCHES = 21

MOODYS_SCALE = {
    sym: notch
    for notch, sym in enumerate(
        [
            "Aaa", "Aa1", "Aa2", "Aa3", "A1", "A2", "A3",
            "Baa1", "Baa2", "Baa3", "Ba1", "Ba2", "Ba3",
            "B1", "B2", "B3", "Caa1", "Caa2", "Caa3", "Ca", "C",
        ],
        start=1,
    )
}

SP_SCALE = {
    sym: notch
    for notch, sym in enumerate(
        [
            "AAA", "AA+", "AA", "AA-", "A+", "A", "A-",
            "BBB+", "BBB", "BBB-", "BB+", "BB", "BB-",
            "B+", "B", "B-", "CCC+", "CCC", "CCC-", "CC", "C",
        ],
        start=1,
    )
}
SP_SCALE.update({"SD": 21, "D": 21})

MOODYS_SYMBOLS = {notch: sym for sym, notch in MOODYS_SCALE.items()}
SP_SYMBOLS = {notch: sym for sym, notch in SP_SCALE.items() if sym not in ("SD", "D")}


def parse_symbol(symbol, scale):
    symbol = symbol.strip()
    if not symbol:
        return None
    try:
        return scale[symbol]
    except KeyError:
        raise UnknownSymbol(f"unknown rating symbol {symbol!r}") from None


@dataclass(frozen=True)
class RatingObservation:
    pid: str
    date: dt.date
    moodys: int | None = None
    sp: int | None = None

    def __post_init__(self):
        if self.moodys is None and self.sp is None:
            raise BothMissing(f"{self.pid}/{self.date}: no agency rating")

    @property
    def combined(self):
        return worst_rating(self.moodys, self.sp)


@dataclass(frozen=True)
class DowngradeLabel:
    pid: str
    date: dt.date
    current: int
    worst_future: int
    label: int


def worst_rating(moodys, sp):
    """Pessimistic combination of two agency notches (larger is worse)."""
    if moodys is None and sp is None:
        raise BothMissing("both agency ratings missing")
    if moodys is None:
        return sp
    if sp is None:
        return moodys
    return max(moodys, sp)


def label_downgrade(timeline, date, horizon_days=365):
    """Label ``date`` 1 iff the combined rating gets worse within the horizon.

    ``timeline`` must be sorted by date. The current rating is the one at the
    most recent observation on or before ``date``; the future window is
    ``(date, date + horizon_days]``. An empty window means no downgrade.
    """
    dates = [obs.date for obs in timeline]
    idx = bisect.bisect_right(dates, date)
    if idx == 0:
        pid = timeline[0].pid if timeline else "?"
        raise NoCurrentRating(f"{pid}: no rating on or before {date}")
    current = timeline[idx - 1].combined
    end = bisect.bisect_right(dates, date + dt.timedelta(days=horizon_days))
    worst_future = current
    window = timeline[idx:end]
    if window:
        worst_future = max(obs.combined for obs in window)
    return DowngradeLabel(
        pid=timeline[idx - 1].pid,
        date=date,
        current=current,
        worst_future=worst_future,
        label=int(worst_future > current),
    )


def build_label_table(timelines, observation_keys, horizon_days=365):
    """One label per (pid, date) in ``observation_keys``, sorted by key."""
    labels = []
    for pid, date in sorted(set(observation_keys)):
        if pid not in timelines:
            raise NoCurrentRating(f"{pid}: no rating timeline")
        labels.append(label_downgrade(timelines[pid], date, horizon_days))
    return labels


def year_summary(labels):
    """Counts keyed by (label, year), the layout of a downgrades-by-year table."""
    counts = Counter((lab.label, lab.date.year) for lab in labels)
    return dict(sorted(counts.items()))


# -- file formats ----------------------------------------------------------


def read_ratings_csv(path):
    """Read ``pid,date,moodys_symbol,sp_symbol`` rows into sorted timelines."""
    timelines = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"pid", "date", "moodys_symbol", "sp_symbol"} - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"ratings CSV missing columns {sorted(missing)}", line=1)
        for lineno, row in enumerate(reader, 2):
            try:
                obs = RatingObservation(
                    pid=row["pid"],
                    date=dt.date.fromisoformat(row["date"]),
                    moodys=parse_symbol(row["moodys_symbol"] or "", MOODYS_SCALE),
                    sp=parse_symbol(row["sp_symbol"] or "", SP_SCALE),
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno) from exc
            except (BothMissing, UnknownSymbol) as exc:
                raise ParseError(str(exc), line=lineno) from exc
            timelines[obs.pid].append(obs)
    return {pid: sorted(obs, key=lambda o: o.date) for pid, obs in sorted(timelines.items())}


def write_ratings_csv(observations, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pid", "date", "moodys_symbol", "sp_symbol"])
        for obs in observations:
            writer.writerow(
                [
                    obs.pid,
                    obs.date.isoformat(),
                    MOODYS_SYMBOLS[obs.moodys] if obs.moodys is not None else "",
                    SP_SYMBOLS[obs.sp] if obs.sp is not None else "",
                ]
            )


def write_labels_csv(labels, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["pid", "date", "current_notch", "worst_future_notch", "label"])
        for lab in labels:
            writer.writerow([lab.pid, lab.date.isoformat(), lab.current, lab.worst_future, lab.label])


def read_labels_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            DowngradeLabel(
                pid=row["pid"],
                date=dt.date.fromisoformat(row["date"]),
                current=int(row["current_notch"]),
                worst_future=int(row["worst_future_notch"]),
                label=int(row["label"]),
            )
            for row in csv.DictReader(fh)
        ]


def write_summary_csv(summary, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["year", "label", "count"])
        for (label, year), count in sorted(summary.items()):
            writer.writerow([year, label, count])
