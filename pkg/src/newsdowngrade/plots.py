"""Thin, deterministic SVG renderers for the figure CSVs."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "newsdowngrade"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_coherence(curve, path, best=None):
    """Coherence against topic count."""
    ks = sorted(curve)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(ks, [curve[k] for k in ks], marker="o")
    if best is not None:
        ax.axvline(best, linestyle="--", color="grey")
    ax.set_xlabel("number of topics")
    ax.set_ylabel("NPMI coherence")
    _save(fig, path)


def plot_auc_bars(aucs, path):
    """Bar chart of holdout AUC per model; ``aucs`` is an ordered mapping."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    names = list(aucs)
    ax.bar(names, [aucs[n] for n in names], color="#4477aa")
    for i, n in enumerate(names):
        ax.text(i, aucs[n], f"{aucs[n]:.3f}", ha="center", va="bottom")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("holdout AUC")
    _save(fig, path)


def plot_gains(curves, path):
    """Cumulative gains curves; ``curves`` maps model name to GainsCurve."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, curve in curves.items():
        ax.plot([0.0, *curve.fractions], [0.0, *curve.captured], marker=".", label=name)
    ax.plot([0, 1], [0, 1], linestyle=":", color="grey", label="random")
    ax.set_xlabel("fraction of population")
    ax.set_ylabel("fraction of downgrades captured")
    ax.legend(loc="lower right")
    _save(fig, path)


def plot_histogram(bins, path):
    """Histogram from ``(left, right, count)`` triples."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    lefts = [b[0] for b in bins]
    widths = [b[1] - b[0] for b in bins]
    ax.bar(lefts, [b[2] for b in bins], width=widths, align="edge", edgecolor="black")
    ax.set_xlabel("AUC gain (final - benchmark)")
    ax.set_ylabel("seeds")
    _save(fig, path)
