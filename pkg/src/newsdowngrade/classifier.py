"""SMOTE oversampling and L2-regularized logistic regression fitted by
full-batch gradient descent with a backtracking line search."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateData, FeatureMismatch, NonFinite, TooFewMinority, ValidationError

MODEL_VERSION = 1
_CONSTANT_STD = 1e-12
_P_MIN = np.finfo(np.float64).tiny
_P_MAX = np.nextafter(1.0, 0.0)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list
    keys: list | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X.reshape(-1, 1) if self.X.size else self.X.reshape(0, len(self.feature_names))
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise ValidationError(f"{self.X.shape[0]} rows but {self.y.shape[0]} labels")
        if self.X.shape[1] != len(self.feature_names):
            raise ValidationError(f"{self.X.shape[1]} columns but {len(self.feature_names)} names")
        if not np.all(np.isfinite(self.X)):
            raise ValidationError("features contain NaN or Inf")
        if not np.isin(self.y, (0, 1)).all():
            raise ValidationError("labels must be 0/1")
        if self.keys is not None and len(self.keys) != len(self.y):
            raise ValidationError("key count does not match row count")

    def __len__(self):
        return len(self.y)

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        keys = [self.keys[i] for i in rows] if self.keys is not None else None
        return Dataset(self.X[rows], self.y[rows], list(self.feature_names), keys)

    def standardization_stats(self):
        mean = self.X.mean(axis=0)
        std = self.X.std(axis=0)
        return mean, std


@dataclass
class SmoteConfig:
    k_neighbors: int = 5
    target_minority_ratio: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_neighbors < 1:
            raise ValidationError("k_neighbors must be >= 1")
        if not 0 < self.target_minority_ratio <= 1:
            raise ValidationError("target_minority_ratio must be in (0, 1]")


def smote_samples(X_min, n_samples, k, rng):
    """Interpolate ``n_samples`` points between minority rows and their
    ``k`` nearest minority neighbours (Euclidean on ``X_min``).

    Returns ``(base_rows, neighbour_rows, u)``; sample ``i`` is
    ``X_min[base[i]] + u[i] * (X_min[neighbour[i]] - X_min[base[i]])``.
    """
    m = X_min.shape[0]
    sq = (X_min**2).sum(axis=1)
    dist = sq[:, None] + sq[None, :] - 2.0 * X_min @ X_min.T
    np.fill_diagonal(dist, np.inf)
    neighbours = np.argsort(dist, axis=1, kind="stable")[:, :k]
    base = rng.integers(m, size=n_samples)
    nn = neighbours[base, rng.integers(k, size=n_samples)]
    u = rng.random(n_samples)
    return base, nn, u


def smote(dataset, config=None, return_provenance=False):
    """Append synthetic minority rows until minority/majority reaches the
    target ratio. Original rows come first and are left untouched.

    Neighbours are searched on z-scored features; interpolation happens in
    the original units (equivalent, the map is affine).
    """
    config = config or SmoteConfig()
    counts = np.bincount(dataset.y, minlength=2)
    if counts.min() == 0:
        raise DegenerateData("SMOTE needs both classes")
    minority = int(np.argmin(counts)) if counts[0] != counts[1] else 1
    n_min, n_maj = counts[minority], counts[1 - minority]
    target = math.ceil(config.target_minority_ratio * n_maj - 1e-9)
    n_new = max(target - n_min, 0)
    if n_min < config.k_neighbors + 1:
        raise TooFewMinority(f"{n_min} minority rows, need >= {config.k_neighbors + 1}")
    rows = np.flatnonzero(dataset.y == minority)
    X_min = dataset.X[rows]
    mean, std = dataset.standardization_stats()
    std = np.where(std > _CONSTANT_STD, std, 1.0)
    rng = np.random.default_rng(config.seed)
    base, nn, u = smote_samples((X_min - mean) / std, n_new, config.k_neighbors, rng)
    synth = X_min[base] + u[:, None] * (X_min[nn] - X_min[base])
    keys = None
    if dataset.keys is not None:
        keys = list(dataset.keys) + [None] * n_new
    out = Dataset(
        np.vstack([dataset.X, synth]),
        np.concatenate([dataset.y, np.full(n_new, minority)]),
        list(dataset.feature_names),
        keys,
    )
    if return_provenance:
        return out, {"base": rows[base], "neighbour": rows[nn], "u": u}
    return out


# -- logistic regression -------------------------------------------------------


def sigmoid(s):
    s = np.asarray(s, dtype=np.float64)
    out = np.empty_like(s)
    pos = s >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-s[pos]))
    e = np.exp(s[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def logistic_loss_and_grad(params, Z, y, l2):
    """Mean negative log-likelihood + (l2/2)||w||^2 and its gradient.

    ``params[0]`` is the (unpenalized) intercept, ``params[1:]`` the weights.
    """
    b, w = params[0], params[1:]
    s = Z @ w + b
    loss = np.mean(np.logaddexp(0.0, s) - y * s) + 0.5 * l2 * (w @ w)
    r = (sigmoid(s) - y) / y.size
    grad = np.empty_like(params)
    grad[0] = r.sum()
    grad[1:] = Z.T @ r + l2 * w
    return float(loss), grad


@dataclass
class FitTrace:
    losses: list = field(default_factory=list)
    steps: list = field(default_factory=list)


@dataclass
class LogisticModel:
    feature_names: list
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray
    intercept: float
    l2: float
    seed: int = 0
    iterations: int = 0
    converged: bool = False

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=np.float64)
        self.std = np.asarray(self.std, dtype=np.float64)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.size != len(self.feature_names):
            raise ValidationError("weight count does not match feature count")
        if not (np.all(np.isfinite(self.weights)) and math.isfinite(self.intercept)):
            raise NonFinite("non-finite model parameters")

    @property
    def active(self):
        return self.std > _CONSTANT_STD

    def decision_function(self, X):
        X = np.asarray(X, dtype=np.float64)
        act = self.active
        Z = (X[:, act] - self.mean[act]) / self.std[act]
        return Z @ self.weights[act] + self.intercept

    def to_dict(self):
        return {
            "version": MODEL_VERSION,
            "feature_names": list(self.feature_names),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "weights": self.weights.tolist(),
            "intercept": self.intercept,
            "l2": self.l2,
            "seed": self.seed,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("version") != MODEL_VERSION:
            raise ValidationError(f"unsupported model version {data.get('version')}")
        data = dict(data)
        data.pop("version")
        return cls(**data)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit(dataset, l2=0.01, max_epochs=5000, tolerance=1e-6, seed=0, trace=None):
    """Fit an L2-regularized logistic regression on z-scored features.

    Constant columns get weight 0. Steps start from a Barzilai-Borwein
    estimate and are halved until the Armijo condition holds, so the loss
    never increases. Stops once the max-norm of the gradient drops below
    ``tolerance`` or after ``max_epochs`` iterations. ``seed`` is recorded
    only; the optimizer is deterministic.
    """
    y = dataset.y.astype(np.float64)
    if y.size == 0 or y.min() == y.max():
        raise DegenerateData("logistic regression needs both classes")
    mean, std = dataset.standardization_stats()
    active = std > _CONSTANT_STD
    Z = (dataset.X[:, active] - mean[active]) / std[active]
    base_rate = y.mean()
    params = np.zeros(1 + Z.shape[1])
    params[0] = math.log(base_rate / (1.0 - base_rate))
    loss, grad = logistic_loss_and_grad(params, Z, y, l2)
    step = 1.0
    it = 0
    while it < max_epochs and np.max(np.abs(grad)) >= tolerance:
        gg = grad @ grad
        while True:
            candidate = params - step * grad
            new_loss, new_grad = logistic_loss_and_grad(candidate, Z, y, l2)
            if math.isfinite(new_loss) and new_loss <= loss - 1e-4 * step * gg:
                break
            step *= 0.5
            if step < 1e-20:
                raise NonFinite("line search failed to find a descent step")
        s, r = candidate - params, new_grad - grad
        params, loss, grad = candidate, new_loss, new_grad
        if trace is not None:
            trace.losses.append(loss)
            trace.steps.append(step)
        sr = s @ r
        step = float(np.clip(s @ s / sr, 1e-10, 1e10)) if sr > 0 else 1.0
        it += 1
    converged = bool(np.max(np.abs(grad)) < tolerance)
    if not math.isfinite(loss):
        raise NonFinite("loss diverged")
    weights = np.zeros(dataset.X.shape[1])
    weights[active] = params[1:]
    return LogisticModel(
        feature_names=list(dataset.feature_names),
        mean=mean,
        std=np.where(active, std, 0.0),
        weights=weights,
        intercept=float(params[0]),
        l2=l2,
        seed=seed,
        iterations=it,
        converged=converged,
    )


def predict_proba(model, rows):
    """P(y=1) for a Dataset, a 2-D array, or a single 1-D row (scalar out)."""
    if isinstance(rows, Dataset):
        if list(rows.feature_names) != list(model.feature_names):
            raise FeatureMismatch("dataset features differ from model features")
        X = rows.X
    else:
        X = np.asarray(rows, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != len(model.feature_names):
        raise FeatureMismatch(f"expected {len(model.feature_names)} features, got {X.shape[1]}")
    # keep the open interval even where float64 would round to 0 or 1
    p = np.clip(sigmoid(model.decision_function(X)), _P_MIN, _P_MAX)
    return float(p[0]) if single else p


# -- file formats --------------------------------------------------------------


def write_dataset_csv(dataset, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        key_cols = ["pid", "date"] if dataset.keys is not None else []
        writer.writerow(key_cols + ["label"] + list(dataset.feature_names))
        for i in range(len(dataset)):
            prefix = []
            if dataset.keys is not None:
                pid, date = dataset.keys[i]
                prefix = [pid, date.isoformat() if hasattr(date, "isoformat") else date]
            writer.writerow(prefix + [int(dataset.y[i])] + [repr(float(x)) for x in dataset.X[i]])


def read_dataset_csv(path, feature_names=None):
    """Read a dataset CSV (``label`` column required; ``pid``/``date`` optional)."""
    import datetime as dt

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "label" not in fields:
            raise ValidationError(f"{path}: no 'label' column")
        has_keys = "pid" in fields and "date" in fields
        names = feature_names or [f for f in fields if f not in ("pid", "date", "label")]
        X, y, keys = [], [], []
        for row in reader:
            X.append([float(row[n]) for n in names])
            y.append(int(row["label"]))
            if has_keys:
                keys.append((row["pid"], dt.date.fromisoformat(row["date"])))
    return Dataset(np.asarray(X, dtype=np.float64).reshape(len(y), len(names)), y, names,
                   keys if has_keys else None)
