"""Command-line entry point: ``newsdowngrade <subcommand> [options]``.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from filelock import FileLock, Timeout

from . import plots
from .classifier import write_dataset_csv
from .corpus import write_documents_jsonl
from .errors import ConfigError, DowngradeError, OutDirLocked, RuntimeFailure, ValidationError
from .evaluation import ScoredSet, classification_report, cumulative_gains, inspection_report, robustness_experiment
from .pipeline import (
    ApproachConfig,
    _build,
    dataset_from_docs,
    load_inputs,
    make_featurizer,
    preprocess_bundle,
    read_bundle_labels,
    run_pipeline,
    seed_runner,
    split_keys,
    stemmed_corpus,
    train_news_model,
    write_manifest,
)
from .ratings import write_labels_csv, write_summary_csv, year_summary
from .synthgen import GeneratorConfig, generate, write_bundle
from .topics import select_topic_count

COMMANDS = ("synth", "preprocess", "label", "featurize", "train", "evaluate", "stack",
            "robustness", "report", "topics-select")


@dataclass
class RunConfig:
    pipeline: ApproachConfig = field(default_factory=ApproachConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    k_grid: list = field(default_factory=lambda: [5, 10, 15, 20, 25, 30, 35, 40])
    topic_iterations: int = 1000
    n_seeds: int = 20
    hist_bins: int = 10

    def to_dict(self):
        return {
            "pipeline": self.pipeline.to_dict(),
            "generator": asdict(self.generator),
            "k_grid": list(self.k_grid),
            "topic_iterations": self.topic_iterations,
            "n_seeds": self.n_seeds,
            "hist_bins": self.hist_bins,
        }


def load_run_config(path=None, overrides=None):
    """Read a JSON run config (unknown keys rejected) and apply flag overrides."""
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    pipeline = dict(data.get("pipeline", {}))
    generator = dict(data.get("generator", {}))
    rest = {k: v for k, v in data.items() if k not in ("pipeline", "generator")}
    overrides = overrides or {}
    if overrides.get("seed") is not None:
        pipeline["seed"] = overrides["seed"]
        generator["seed"] = overrides["seed"]
    if overrides.get("approach") is not None:
        pipeline["approach"] = overrides["approach"]
    if overrides.get("threshold") is not None:
        pipeline["threshold"] = overrides["threshold"]
    if overrides.get("seeds") is not None:
        rest["n_seeds"] = overrides["seeds"]
    cfg = RunConfig(
        pipeline=ApproachConfig.from_dict(pipeline),
        generator=_build(GeneratorConfig, generator),
        **rest,
    )
    if cfg.n_seeds < 1:
        raise ConfigError("n_seeds must be >= 1")
    return cfg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out-dir", default=".", help="artifact directory")
    common.add_argument("--data-dir", help="bundle directory (defaults to --out-dir)")
    common.add_argument("--approach", choices=["lexicon-lda", "doc2vec", "wordvec-avg"])
    common.add_argument("--threshold", type=float, help="recall threshold (default 0.5)")
    common.add_argument("--seeds", type=int, help="number of robustness seeds")
    common.add_argument("--json-errors", action="store_true", help="errors as JSON on stderr")

    parser = _Parser(prog="newsdowngrade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "evaluate":
            p.add_argument("--scores", help="scored CSV (pid,date,score,label)")
    return parser


# -- helpers ---------------------------------------------------------------------


class Context:
    def __init__(self, args, config):
        self.args = args
        self.config = config
        self.out = Path(args.out_dir)
        self.data = Path(args.data_dir) if args.data_dir else self.out
        self.artifacts = {}

    def path(self, name):
        p = self.out / name
        self.artifacts[name] = p
        return p

    def manifest(self, metrics=None, seeds=None):
        cmd = self.args.command
        seeds = seeds if seeds is not None else {"pipeline": self.config.pipeline.seed}
        write_manifest(self.out / f"manifest_{cmd}.json", cmd, self.config.to_dict(), seeds,
                       self.artifacts, metrics)
        info = {
            "command": cmd,
            "started_utc": dt.datetime.now(dt.timezone.utc).isoformat(),
            "out_dir": str(self.out.resolve()),
            "data_dir": str(self.data.resolve()),
            "argv": sys.argv[1:],
        }
        (self.out / f"run_info_{cmd}.json").write_text(json.dumps(info, indent=1) + "\n", encoding="utf-8")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _write_rows(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _scores_and_gains(ctx, tag, scored):
    scored.write_csv(ctx.path(f"scores_{tag}.csv"))
    curve = cumulative_gains(scored)
    curve.write_csv(ctx.path(f"gains_{tag}.csv"))
    return curve


# -- subcommands ----------------------------------------------------------------------


def cmd_synth(ctx):
    bundle = generate(ctx.config.generator)
    paths = write_bundle(bundle, ctx.out)
    for name, p in paths.items():
        p = Path(p)
        if p.is_dir():
            for f in sorted(p.iterdir()):
                ctx.artifacts[f"{name}/{f.name}"] = f
        else:
            ctx.artifacts[p.name] = p
    metrics = {"rows": len(bundle.truth), "positives": bundle.positives, "articles": len(bundle.articles)}
    print(f"synth: {metrics['rows']} company-days, {metrics['positives']} positives, "
          f"{metrics['articles']} articles -> {ctx.out}")
    ctx.manifest(metrics, seeds={"generator": ctx.config.generator.seed})


def cmd_preprocess(ctx):
    documents, stats = preprocess_bundle(ctx.data)
    write_documents_jsonl(documents, ctx.path("documents.jsonl"))
    _write_json(ctx.path("preprocess_stats.json"), stats.to_dict())
    print(f"preprocess: {stats.articles_in} articles in, {stats.documents_out} company-day documents")
    ctx.manifest(stats.to_dict())


def cmd_label(ctx):
    labels = read_bundle_labels(ctx.data)
    write_labels_csv(labels, ctx.path("labels.csv"))
    summary = year_summary(labels)
    write_summary_csv(summary, ctx.path("label_summary.csv"))
    positives = sum(lab.label for lab in labels)
    print(f"label: {len(labels)} company-days, {positives} downgrade labels")
    ctx.manifest({"rows": len(labels), "positives": positives})


def cmd_featurize(ctx):
    cfg = ctx.config.pipeline
    inputs = load_inputs(ctx.data, need_vectors=cfg.approach == "wordvec_average")
    labels = inputs.labels
    split = split_keys(labels.keys(), labels, cfg.split, cfg.seed)
    featurizer = make_featurizer(cfg, inputs)
    featurizer.fit([d for d in inputs.documents if d.key in split.train])
    dataset = dataset_from_docs(inputs.documents, featurizer, labels)
    write_dataset_csv(dataset, ctx.path(f"features_{cfg.approach}.csv"))
    metrics = {"rows": len(dataset), "features": dataset.X.shape[1],
               "train_rows": sum(k in split.train for k in dataset.keys)}
    print(f"featurize[{cfg.approach}]: {metrics['rows']} rows x {metrics['features']} features")
    ctx.manifest(metrics)


def cmd_train(ctx):
    cfg = ctx.config.pipeline
    inputs = load_inputs(ctx.data, need_vectors=cfg.approach == "wordvec_average")
    run = train_news_model(inputs, cfg)
    run.model.save(ctx.path(f"model_news_{cfg.approach}.json"))
    _scores_and_gains(ctx, "news", run.holdout)
    report = classification_report(run.holdout, cfg.threshold)
    _write_json(ctx.path("metrics_news.json"), report)
    print(f"train[{cfg.approach}]: holdout AUC {report['auc']:.4f}, recall {report['recall']:.4f}")
    ctx.manifest(report)


def cmd_evaluate(ctx):
    path = Path(ctx.args.scores) if ctx.args.scores else ctx.data / "scores_news.csv"
    scored = ScoredSet.read_csv(path)
    report = classification_report(scored, ctx.config.pipeline.threshold)
    stem = path.stem.replace("scores_", "") or "eval"
    _write_json(ctx.path(f"metrics_eval_{stem}.json"), report)
    cumulative_gains(scored).write_csv(ctx.path(f"gains_eval_{stem}.csv"))
    print(f"evaluate: AUC {report['auc']:.4f} recall@{report['threshold']:g} {report['recall']:.4f} "
          f"top10% {report['gains_top10']:.4f} top20% {report['gains_top20']:.4f}")
    ctx.manifest(report)


def cmd_stack(ctx):
    cfg = ctx.config.pipeline
    inputs = load_inputs(ctx.data, need_vectors=cfg.approach == "wordvec_average")
    result = run_pipeline(inputs, cfg)
    write_dataset_csv(result.stacked.dataset, ctx.path("stacked_features.csv"))
    curves = {}
    for tag, run in (("benchmark", result.benchmark), ("news", result.news), ("final", result.final)):
        run.model.save(ctx.path(f"model_{tag}.json"))
        curves[tag] = _scores_and_gains(ctx, tag, run.holdout)
    metrics = result.metrics()
    _write_json(ctx.path("metrics.json"), metrics)
    aucs = {tag: metrics[tag]["auc"] for tag in ("benchmark", "news", "final")}
    _write_rows(ctx.path("auc_comparison.csv"), ["model", "auc"], [[k, repr(v)] for k, v in aucs.items()])
    plots.plot_auc_bars(aucs, ctx.path("auc_comparison.svg"))
    plots.plot_gains({k: curves[k] for k in ("benchmark", "final")}, ctx.path("gains.svg"))
    print(f"stack[{cfg.approach}]: benchmark AUC {aucs['benchmark']:.4f}, news AUC {aucs['news']:.4f}, "
          f"final AUC {aucs['final']:.4f} (gain {metrics['auc_gain']:+.4f})")
    ctx.manifest(metrics)


def cmd_robustness(ctx):
    cfg = ctx.config
    inputs = load_inputs(ctx.data, need_vectors=cfg.pipeline.approach == "wordvec_average")
    seeds = [cfg.pipeline.seed + i for i in range(cfg.n_seeds)]
    report = robustness_experiment(seed_runner(inputs, cfg.pipeline), seeds)
    report.write_gains_csv(ctx.path("robustness_gains.csv"))
    summary = report.summary()
    if report.n:
        report.write_histogram_csv(ctx.path("robustness_histogram.csv"), cfg.hist_bins)
        plots.plot_histogram(report.histogram(cfg.hist_bins), ctx.path("robustness_histogram.svg"))
    _write_json(ctx.path("robustness_summary.json"), summary)
    print(f"robustness: {report.positive_count}/{report.n} positive gains, mean {summary['mean_gain']:+.4f}, "
          f"std {summary['std_gain']:.4f}, std error {summary['std_error_of_mean']:.4f}")
    ctx.manifest(summary, seeds={"robustness": seeds})
    if not report.n:
        raise RuntimeFailure("every robustness seed failed")


def cmd_report(ctx):
    cfg = ctx.config.pipeline
    inputs = load_inputs(ctx.data, need_vectors=cfg.approach == "wordvec_average")
    run = train_news_model(inputs, cfg)
    report = inspection_report(run.holdout, cfg.threshold, inputs.doc_index)
    ctx.path("inspection.txt").write_text(report.to_text(), encoding="utf-8")
    entries = {
        name: [{"pid": e.pid, "date": e.date.isoformat(), "score": e.score, "snippet": e.snippet}
               for e in group]
        for name, group in (("true_positives", report.true_positives),
                            ("false_negatives", report.false_negatives))
    }
    _write_json(ctx.path("inspection.json"), {"summary": report.summary(), **entries})
    s = report.summary()
    print(f"report: {s['true_positives']} true positives ({s['true_positive_companies']} companies), "
          f"{s['false_negatives']} false negatives ({s['false_negative_companies']} companies)")
    ctx.manifest(s)


def cmd_topics_select(ctx):
    cfg = ctx.config
    documents, _ = preprocess_bundle(ctx.data)
    corpus = stemmed_corpus(documents, cfg.pipeline.lexicon_lda.stemming)
    lda = cfg.pipeline.lexicon_lda
    best, curve = select_topic_count(corpus, cfg.k_grid, lda.alpha, lda.beta, cfg.topic_iterations,
                                     cfg.pipeline.seed)
    _write_rows(ctx.path("coherence.csv"), ["n_topics", "coherence"], [[k, repr(v)] for k, v in curve.items()])
    plots.plot_coherence(curve, ctx.path("coherence.svg"), best)
    print(f"topics-select: best K = {best} (coherence {curve[best]:.4f})")
    ctx.manifest({"best_k": best, "coherence": {str(k): v for k, v in curve.items()}})


HANDLERS = {
    "synth": cmd_synth,
    "preprocess": cmd_preprocess,
    "label": cmd_label,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "stack": cmd_stack,
    "robustness": cmd_robustness,
    "report": cmd_report,
    "topics-select": cmd_topics_select,
}


def _report_error(exc, code, as_json):
    if as_json:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json-errors" in argv
    try:
        args = build_parser().parse_args(argv)
        config = load_run_config(args.config, vars(args))
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        try:
            with FileLock(str(out / ".newsdowngrade.lock"), timeout=0):
                HANDLERS[args.command](Context(args, config))
        except Timeout as exc:
            raise OutDirLocked(f"another process is writing to {out}") from exc
    except ValidationError as exc:
        return _report_error(exc, 1, as_json)
    except FileNotFoundError as exc:
        return _report_error(exc, 1, as_json)
    except (RuntimeFailure, DowngradeError) as exc:
        return _report_error(exc, 2, as_json)
    except Exception as exc:  # unexpected failure is still a runtime error
        return _report_error(exc, 2, as_json)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
