import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from helpers import on_some_minority_segment
from newsdowngrade.classifier import (
    Dataset,
    FitTrace,
    LogisticModel,
    SmoteConfig,
    fit,
    logistic_loss_and_grad,
    predict_proba,
    read_dataset_csv,
    smote,
    write_dataset_csv,
)
from newsdowngrade.errors import DegenerateData, FeatureMismatch, TooFewMinority, ValidationError


def _ds(X, y):
    X = np.asarray(X, dtype=float)
    return Dataset(X, y, [f"f{i}" for i in range(X.shape[1])])


def _imbalanced(n=400, rate=0.015, d=3, seed=0):
    rng = np.random.default_rng(seed)
    y = np.zeros(n, dtype=int)
    y[: max(int(round(rate * n)), 7)] = 1
    X = rng.normal(size=(n, d)) + y[:, None]
    return _ds(X, y)


class TestSmote:
    def test_identical_minority(self):
        X = np.vstack([np.ones((2, 2)), np.zeros((6, 2))])
        out = smote(_ds(X, [1, 1, 0, 0, 0, 0, 0, 0]), SmoteConfig(k_neighbors=1))
        assert np.array_equal(out.X[8:], np.ones((4, 2)))

    def test_two_point_segment(self):
        X = np.array([[0, 0], [1, 1], [5, 0], [6, 0], [7, 1], [5, 2], [8, 3]], dtype=float)
        out = smote(_ds(X, [1, 1, 0, 0, 0, 0, 0]), SmoteConfig(k_neighbors=1))
        new = out.X[7:]
        assert len(new) == 3
        assert np.array_equal(new[:, 0], new[:, 1])
        assert np.all((new >= 0) & (new <= 1))

    def test_prevalence_balanced(self):
        data = _imbalanced(2000, 0.015)
        out = smote(data)
        counts = np.bincount(out.y)
        assert counts[0] == counts[1] == np.sum(data.y == 0)

    def test_partial_ratio(self):
        data = _imbalanced(1000, 0.02)
        out = smote(data, SmoteConfig(target_minority_ratio=0.5))
        assert np.sum(out.y == 1) == math.ceil(0.5 * np.sum(data.y == 0))

    def test_too_few_minority(self):
        X = np.arange(10, dtype=float).reshape(5, 2)
        with pytest.raises(TooFewMinority):
            smote(_ds(X, [1, 1, 0, 0, 0]), SmoteConfig(k_neighbors=5))

    def test_bad_ratio(self):
        with pytest.raises(ValidationError):
            SmoteConfig(target_minority_ratio=1.5)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 12), st.integers(1, 4))
    def test_geometry_and_untouched(self, seed, n_min, k):
        rng = np.random.default_rng(seed)
        n_maj = 40
        X = rng.normal(size=(n_min + n_maj, 3)) * rng.uniform(0.1, 10, size=3)
        y = np.r_[np.ones(n_min, int), np.zeros(n_maj, int)]
        data = _ds(X, y)
        X_before = data.X.copy()
        k = min(k, n_min - 1)
        out, prov = smote(data, SmoteConfig(k_neighbors=k, seed=seed), return_provenance=True)
        assert np.array_equal(out.X[: len(y)], X_before) and np.array_equal(out.y[: len(y)], y)
        synth = out.X[len(y):]
        assert on_some_minority_segment(synth, X[:n_min]).all()
        recon = X[prov["base"]] + prov["u"][:, None] * (X[prov["neighbour"]] - X[prov["base"]])
        assert np.allclose(recon, synth, atol=1e-12)
        assert np.all(y[prov["base"]] == 1) and np.all(y[prov["neighbour"]] == 1)
        assert np.sum(out.y == 1) == n_maj


class TestGradient:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.sampled_from([0.0, 0.01, 1.0]))
    def test_finite_differences(self, seed, l2):
        rng = np.random.default_rng(seed)
        n, d = 25, 4
        Z = rng.normal(size=(n, d))
        y = (rng.random(n) < 0.4).astype(float)
        params = rng.normal(size=d + 1)
        _, grad = logistic_loss_and_grad(params, Z, y, l2)
        eps = 1e-6
        numeric = np.array([
            (logistic_loss_and_grad(params + eps * e, Z, y, l2)[0]
             - logistic_loss_and_grad(params - eps * e, Z, y, l2)[0]) / (2 * eps)
            for e in np.eye(d + 1)
        ])
        rel = np.linalg.norm(grad - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert rel <= 1e-6

    def test_loss_non_increasing(self):
        data = _imbalanced(300, 0.3, d=5, seed=2)
        trace = FitTrace()
        fit(data, trace=trace)
        assert len(trace.losses) > 1
        assert np.all(np.diff(trace.losses) <= 0)


class TestFit:
    def test_separable_pair(self):
        model = fit(_ds([[-1.0], [1.0]], [0, 1]), l2=0.1)
        p = predict_proba(model, np.array([[-1.0], [1.0]]))
        assert p[0] < 0.5 < p[1]

    def test_zero_features(self):
        y = np.r_[np.ones(3, int), np.zeros(7, int)]
        model = fit(_ds(np.zeros((10, 2)), y))
        assert np.array_equal(model.weights, [0, 0])
        assert model.intercept == pytest.approx(math.log(0.3 / 0.7))

    def test_huge_l2(self):
        data = _imbalanced(300, 0.2, seed=4)
        model = fit(data, l2=1e8)
        assert np.max(np.abs(model.weights)) < 1e-6
        base = data.y.mean()
        assert model.intercept == pytest.approx(math.log(base / (1 - base)), abs=1e-6)

    def test_converges(self):
        model = fit(_imbalanced(300, 0.2, seed=5))
        assert model.converged

    def test_single_class(self):
        with pytest.raises(DegenerateData):
            fit(_ds(np.zeros((3, 1)), [0, 0, 0]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 1000), st.integers(0, 2), st.floats(1e-3, 1e3))
    def test_rescaling_invariance(self, seed, col, factor):
        data = _imbalanced(200, 0.25, d=3, seed=seed)
        test = np.random.default_rng(seed + 1).normal(size=(50, 3))
        scaled = data.X.copy()
        scaled[:, col] *= factor
        test_scaled = test.copy()
        test_scaled[:, col] *= factor
        s1 = predict_proba(fit(data), test)
        s2 = predict_proba(fit(_ds(scaled, data.y)), test_scaled)
        assert np.allclose(s1, s2, rtol=1e-6, atol=1e-9)

    def test_save_load(self, tmp_path):
        model = fit(_imbalanced(100, 0.2))
        model.save(tmp_path / "m.json")
        back = LogisticModel.load(tmp_path / "m.json")
        assert back.to_dict() == model.to_dict()


class TestPredict:
    def _model(self, w, b=0.0):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return LogisticModel([f"f{i}" for i in range(w.size)], np.zeros(w.size), np.ones(w.size), w, b, 0.0)

    @given(arrays(np.float64, 3, elements=st.floats(-1e6, 1e6)))
    def test_zero_model(self, row):
        assert predict_proba(self._model([0, 0, 0]), row) == 0.5

    def test_ln3(self):
        assert predict_proba(self._model([1.0]), np.array([math.log(3)])) == pytest.approx(0.75, abs=1e-15)

    def test_no_underflow(self):
        p = predict_proba(self._model([1.0]), np.array([-50.0]))
        assert 0 < p < 1e-20
        assert predict_proba(self._model([1.0]), np.array([-800.0])) > 0
        assert predict_proba(self._model([1.0]), np.array([800.0])) < 1

    def test_feature_mismatch(self):
        with pytest.raises(FeatureMismatch):
            predict_proba(self._model([1.0, 2.0]), np.zeros(3))


def test_dataset_csv_round_trip(tmp_path):
    import datetime as dt
    d = Dataset(np.array([[0.1, 2.5], [1e-17, -3.0]]), [0, 1], ["a", "b"],
                [("p", dt.date(2019, 1, 1)), ("q", dt.date(2019, 2, 1))])
    write_dataset_csv(d, tmp_path / "d.csv")
    back = read_dataset_csv(tmp_path / "d.csv")
    assert np.array_equal(back.X, d.X) and back.keys == d.keys and back.feature_names == ["a", "b"]
