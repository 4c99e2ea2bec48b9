"""Independent oracles shared by unit and acceptance tests."""

import numpy as np


def segment_distance(points, a, b):
    """Distance from each of ``points`` (n, d) to every segment a[j]-b[j]; shape (n, m)."""
    ab = b - a
    denom = (ab**2).sum(axis=1)
    rel = points[:, None, :] - a[None, :, :]
    t = np.where(denom > 0, (rel * ab[None]).sum(axis=2) / np.where(denom > 0, denom, 1), 0.0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    return np.sqrt(((points[:, None, :] - closest) ** 2).sum(axis=2))


def on_some_minority_segment(synth, minority, tol=1e-9):
    """True per synthetic row iff it lies on a segment between two minority rows."""
    i, j = np.triu_indices(len(minority), k=0)
    d = segment_distance(synth, minority[i], minority[j])
    return d.min(axis=1) <= tol


def brute_force_auc(scores, labels):
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for p in pos:
        total += np.sum(p > neg) + 0.5 * np.sum(p == neg)
    return total / (pos.size * neg.size)
