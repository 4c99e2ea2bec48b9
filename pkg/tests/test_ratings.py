import datetime as dt

import pytest
from hypothesis import given, strategies as st

from newsdowngrade.errors import BothMissing, NoCurrentRating, UnknownSymbol
from newsdowngrade.ratings import (
    MOODYS_SCALE,
    SP_SCALE,
    RatingObservation,
    build_label_table,
    label_downgrade,
    parse_symbol,
    read_ratings_csv,
    worst_rating,
    write_ratings_csv,
    year_summary,
)

D0 = dt.date(2019, 1, 1)
notch = st.integers(1, 21)
opt_notch = st.one_of(st.none(), notch)


def timeline(values, step=30, pid="p"):
    return [RatingObservation(pid, D0 + dt.timedelta(days=i * step), v, v) for i, v in enumerate(values)]


class TestWorstRating:
    def test_examples(self):
        assert worst_rating(7, 7) == 7
        assert worst_rating(15, 17) == 17
        assert worst_rating(SP_SCALE["B"], SP_SCALE["CCC"]) == SP_SCALE["CCC"]
        assert worst_rating(None, 5) == 5

    def test_both_missing(self):
        with pytest.raises(BothMissing):
            worst_rating(None, None)

    @given(opt_notch, opt_notch)
    def test_commutative(self, a, b):
        if a is None and b is None:
            return
        assert worst_rating(a, b) == worst_rating(b, a)

    @given(notch)
    def test_idempotent(self, a):
        assert worst_rating(a, a) == a

    @given(notch, notch, notch)
    def test_monotone(self, a, b, c):
        lo, hi = sorted((a, b))
        assert worst_rating(lo, c) <= worst_rating(hi, c)


class TestLabel:
    def test_constant(self):
        assert label_downgrade(timeline([10, 10, 10]), D0).label == 0

    def test_b_to_ccc(self):
        tl = [RatingObservation("p", D0, sp=15), RatingObservation("p", D0 + dt.timedelta(30), sp=17)]
        lab = label_downgrade(tl, D0)
        assert (lab.current, lab.worst_future, lab.label) == (15, 17, 1)

    def test_upgrades_only(self):
        assert label_downgrade(timeline([10, 9, 8]), D0).label == 0

    def test_outside_horizon_ignored(self):
        tl = timeline([10, 12], step=400)
        assert label_downgrade(tl, D0, 365).label == 0
        assert label_downgrade(tl, D0, 400).label == 1

    def test_no_current_rating(self):
        with pytest.raises(NoCurrentRating):
            label_downgrade(timeline([10]), D0 - dt.timedelta(1))

    @given(st.lists(notch, min_size=1, max_size=8), st.integers(0, 300), st.integers(0, 300))
    def test_monotone_in_horizon(self, values, h1, extra):
        tl = timeline(values)
        if label_downgrade(tl, D0, h1).label:
            assert label_downgrade(tl, D0, h1 + extra).label == 1

    @given(st.lists(notch, min_size=1, max_size=8), st.integers(0, 200))
    def test_zero_horizon(self, values, offset):
        assert label_downgrade(timeline(values), D0 + dt.timedelta(offset), 0).label == 0


class TestTable:
    def test_single_flat(self):
        labels = build_label_table({"p": timeline([5, 5])}, [("p", D0)])
        assert len(labels) == 1 and labels[0].label == 0

    def test_year_summary(self):
        labels = build_label_table({"p": timeline([5, 6, 6])}, [("p", D0), ("p", D0 + dt.timedelta(60))])
        assert year_summary(labels) == {(0, 2019): 1, (1, 2019): 1}

    def test_planted_rate(self, small_bundle):
        keys = [(t.pid, t.date) for t in small_bundle.truth]
        tls = {}
        for obs in small_bundle.ratings:
            tls.setdefault(obs.pid, []).append(obs)
        labels = build_label_table(tls, keys)
        assert [l.label for l in labels] == [t.label for t in sorted(small_bundle.truth, key=lambda t: (t.pid, t.date))]


class TestFiles:
    def test_symbols(self):
        assert parse_symbol("Baa3", MOODYS_SCALE) == 10
        assert parse_symbol(" ", SP_SCALE) is None
        with pytest.raises(UnknownSymbol):
            parse_symbol("ZZ", SP_SCALE)

    def test_round_trip(self, tmp_path):
        obs = [RatingObservation("p", D0, 3, None), RatingObservation("q", D0, None, 21)]
        write_ratings_csv(obs, tmp_path / "r.csv")
        back = read_ratings_csv(tmp_path / "r.csv")
        assert back == {"p": [obs[0]], "q": [obs[1]]}
