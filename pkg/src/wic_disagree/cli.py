"""Command-line pipeline: stats, train, predict, evaluate, plot-density.

Exit codes: 0 success, 2 data/config/format errors, 3 when the requested
metric is undefined everywhere. Training is pooled across languages by
default; ``--per-language`` fits one model per language into per-language
subdirectories of the output dir.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import (
    apply_bins,
    fit_linreg,
    load_linear,
    load_thresholds,
    optimize_bins,
    predict_linreg,
    save_linear,
    save_thresholds,
)
from .config import ExperimentConfig, load_config, resolve_split
from .data_model import Dataset, dataset_stats, load_dataset
from .embedding_store import join, read_store
from .errors import (
    DataError,
    FormatError,
    TrainingError,
    UndefinedMetricError,
    WicDisagreeError,
)
from .features import concat_matrix, cosine_rows, enrich_matrix
from .gbdt_ensemble import (
    DISWIC_WEIGHTS,
    OGWIC_WEIGHTS,
    combine,
    fit_gbdt,
    load_gbdt,
    predict_gbdt,
    save_gbdt,
)
from .metrics import krippendorff_alpha_ordinal, spearman_rho
from .neural_models import (
    load_model,
    make_model,
    predict_model,
    save_model,
    train_model,
)

DENSITY_BINS = 50


def _load_corpus(config: ExperimentConfig) -> Dataset:
    config.require("usages", "instances")
    return load_dataset(config.usages, config.instances)


def _select(dataset: Dataset, task: str, split_ids) -> list:
    """Instances of the task restricted to a split, in dataset order."""
    instances = dataset.instances_for_task(task)
    if split_ids is None:
        if not instances:
            raise DataError(f"no instances with a defined {task} target")
        return instances
    have = {i.instance_id for i in instances}
    missing = [s for s in split_ids if s not in have]
    if missing:
        shown = ", ".join(repr(m) for m in missing[:10])
        raise DataError(
            f"{len(missing)} split ids have no {task} target or do not exist: {shown}"
        )
    wanted = set(split_ids)
    return [i for i in instances if i.instance_id in wanted]


def _targets(dataset: Dataset, instances, task: str) -> np.ndarray:
    if task == "ogwic":
        return np.asarray(
            [dataset.targets[i.instance_id].median_label for i in instances],
            dtype=np.int64,
        )
    return np.asarray(
        [dataset.targets[i.instance_id].mean_disagreement for i in instances],
        dtype=np.float64,
    )


def _groups(instances, per_language: bool):
    """[(language-or-None, instances)] with the pooled default as one group."""
    if not per_language:
        return [(None, list(instances))]
    langs = sorted({i.language for i in instances})
    groups = [(lang, [i for i in instances if i.language == lang]) for lang in langs]
    return groups


def _group_dir(out_dir: Path, lang) -> Path:
    return out_dir if lang is None else out_dir / lang


# ---------------------------------------------------------------- commands


def cmd_stats(config: ExperimentConfig, args) -> int:
    dataset = _load_corpus(config)
    table = dataset_stats(dataset)
    sys.stdout.write(table.to_tsv())
    if config.output_dir is not None:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "stats.tsv").write_text(table.to_tsv(), encoding="utf-8")
        print(f"wrote {out / 'stats.tsv'}", file=sys.stderr)
    return 0


def _train_group(view, targets, store_dim, task, method, config, seed, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    if method == "baseline":
        if task == "ogwic":
            thresholds = optimize_bins(cosine_rows(view.e1, view.e2), targets)
            save_thresholds(thresholds, out_dir / "thresholds.json")
            return [f"thresholds.json (training alpha {thresholds.alpha:.4f})"]
        model = fit_linreg(concat_matrix(view.e1, view.e2), targets,
                           config.ridge_lambda)
        save_linear(model, out_dir / "linreg.json")
        return ["linreg.json"]
    if method in ("xlmr", "adapter"):
        train_cfg = config.train_config(seed)
        model = make_model("linear" if method == "xlmr" else "adapter",
                           task, store_dim, train_cfg)
        result = train_model(model, view.e1, view.e2, targets, task, train_cfg)
        save_model(out_dir / "model.wicm", result.model, task, train_cfg)
        (out_dir / "train_log.tsv").write_text(result.log_tsv(), encoding="utf-8")
        return ["model.wicm", "train_log.tsv"]
    if method == "ensemble":
        X = enrich_matrix(view.e1, view.e2)
        model_c = fit_gbdt(X, targets, task, config.gbdt_config(1.0, seed))
        model_x = fit_gbdt(X, targets, task, config.gbdt_config(0.8, seed))
        save_gbdt(out_dir / "model_c.wict", model_c)
        save_gbdt(out_dir / "model_x.wict", model_x)
        weights = OGWIC_WEIGHTS if task == "ogwic" else DISWIC_WEIGHTS
        manifest = {
            "task": task,
            "models": {"c": "model_c.wict", "x": "model_x.wict"},
            "weights": {"c": weights[0], "x": weights[1]},
        }
        (out_dir / "ensemble.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        return ["model_c.wict", "model_x.wict", "ensemble.json"]
    raise DataError(f"unknown method {method!r}")


def cmd_train(config: ExperimentConfig, args) -> int:
    config.require("usages", "instances", "store", "output_dir", "task", "method")
    dataset = _load_corpus(config)
    store = read_store(config.store)
    base = Path(args.config).resolve().parent
    split_ids = resolve_split(config.train_split, base)
    instances = _select(dataset, config.task, split_ids)
    seed = config.seed if args.seed is None else args.seed
    out_dir = Path(config.output_dir)
    for lang, group in _groups(instances, args.per_language):
        view = join([i.instance_id for i in group], store)
        targets = _targets(dataset, group, config.task)
        artifacts = _train_group(view, targets, store.dim, config.task,
                                 config.method, config, seed,
                                 _group_dir(out_dir, lang))
        where = "pooled" if lang is None else lang
        print(f"trained {config.method}/{config.task} [{where}] "
              f"on {len(group)} instances -> {', '.join(artifacts)}")
    return 0


def _predict_group(view, task, method, model_dir: Path):
    if method == "baseline":
        if task == "ogwic":
            thresholds = load_thresholds(model_dir / "thresholds.json")
            return apply_bins(cosine_rows(view.e1, view.e2), thresholds)
        model = load_linear(model_dir / "linreg.json")
        return predict_linreg(model, concat_matrix(view.e1, view.e2))
    if method in ("xlmr", "adapter"):
        model, saved_task, _ = load_model(model_dir / "model.wicm")
        if saved_task != task:
            raise DataError(
                f"checkpoint was trained for task {saved_task!r}, not {task!r}"
            )
        return predict_model(model, view.e1, view.e2, task)
    if method == "ensemble":
        model_c = load_gbdt(model_dir / "model_c.wict")
        model_x = load_gbdt(model_dir / "model_x.wict")
        for m in (model_c, model_x):
            if m.task != task:
                raise DataError(
                    f"ensemble model was trained for task {m.task!r}, not {task!r}"
                )
        X = enrich_matrix(view.e1, view.e2)
        return combine(predict_gbdt(model_c, X), predict_gbdt(model_x, X), task)
    raise DataError(f"unknown method {method!r}")


def cmd_predict(config: ExperimentConfig, args) -> int:
    config.require("usages", "instances", "store", "output_dir", "task", "method")
    dataset = _load_corpus(config)
    store = read_store(config.store)
    base = Path(args.config).resolve().parent
    split_ids = resolve_split(config.eval_split, base)
    instances = _select(dataset, config.task, split_ids)
    out_dir = Path(config.output_dir)

    predictions = np.empty(len(instances), dtype=np.float64)
    for lang, group in _groups(instances, args.per_language):
        view = join([i.instance_id for i in group], store)
        preds = _predict_group(view, config.task, config.method,
                               _group_dir(out_dir, lang))
        if lang is None:
            pos = np.arange(len(instances))
        else:
            ids = {i.instance_id for i in group}
            pos = np.array([k for k, inst in enumerate(instances)
                            if inst.instance_id in ids], dtype=np.int64)
        predictions[pos] = np.asarray(preds, dtype=np.float64)

    out_path = Path(args.out) if args.out else out_dir / "predictions.tsv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["instance_id\tprediction"]
    for inst, value in zip(instances, predictions):
        if config.task == "ogwic":
            lines.append(f"{inst.instance_id}\t{int(round(value))}")
        else:
            lines.append(f"{inst.instance_id}\t{value:.6f}")
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(instances)} predictions to {out_path}")

    if args.gold_out:
        gold_path = Path(args.gold_out)
        gold_path.parent.mkdir(parents=True, exist_ok=True)
        rows = ["instance_id\tlanguage\tgold"]
        gold = _targets(dataset, instances, config.task)
        for inst, g in zip(instances, gold):
            value = str(int(g)) if config.task == "ogwic" else f"{g:.6f}"
            rows.append(f"{inst.instance_id}\t{inst.language}\t{value}")
        gold_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        print(f"wrote gold targets to {gold_path}")
    return 0


def _read_tsv_table(path: Path, expected_header: list[str]) -> list[list[str]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0].split("\t") != expected_header:
        raise DataError(
            f"{path}: expected header {chr(9).join(expected_header)!r}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(expected_header):
            raise DataError(
                f"{path}:{lineno}: expected {len(expected_header)} fields, "
                f"got {len(fields)}"
            )
        rows.append(fields)
    return rows


def cmd_evaluate(config: ExperimentConfig, args) -> int:
    config.require("task")
    task = config.task
    gold_rows = _read_tsv_table(Path(args.gold), ["instance_id", "language", "gold"])
    pred_rows = _read_tsv_table(Path(args.pred), ["instance_id", "prediction"])

    pred_by_id = {}
    for iid, value in pred_rows:
        if iid in pred_by_id:
            raise DataError(f"duplicate prediction for instance {iid!r}")
        pred_by_id[iid] = value
    gold_ids = [r[0] for r in gold_rows]
    if len(set(gold_ids)) != len(gold_ids):
        raise DataError("duplicate instance ids in the gold file")
    missing = [i for i in gold_ids if i not in pred_by_id]
    extra = [i for i in pred_by_id if i not in set(gold_ids)]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing predictions for {missing[:10]}")
        if extra:
            parts.append(f"predictions for unknown ids {extra[:10]}")
        raise DataError("gold/prediction id mismatch: " + "; ".join(parts))

    def parse(raw: str, what: str):
        try:
            return int(raw) if task == "ogwic" else float(raw)
        except ValueError as exc:
            raise DataError(f"bad {what} value {raw!r} for task {task}") from exc

    by_lang: dict[str, tuple[list, list]] = {}
    for iid, lang, raw_gold in gold_rows:
        golds, preds = by_lang.setdefault(lang, ([], []))
        golds.append(parse(raw_gold, "gold"))
        preds.append(parse(pred_by_id[iid], "prediction"))

    scores: dict[str, float | None] = {}
    for lang in sorted(by_lang):
        golds, preds = by_lang[lang]
        try:
            if task == "ogwic":
                scores[lang] = krippendorff_alpha_ordinal(golds, preds)
            else:
                scores[lang] = spearman_rho(golds, preds)
        except UndefinedMetricError as exc:
            scores[lang] = None
            print(f"warning: {lang}: metric undefined ({exc}); "
                  f"excluded from AVG", file=sys.stderr)

    metric = "alpha" if task == "ogwic" else "spearman"
    all_gold = [g for lang in sorted(by_lang) for g in by_lang[lang][0]]
    all_pred = [p for lang in sorted(by_lang) for p in by_lang[lang][1]]
    try:
        if task == "ogwic":
            pooled = krippendorff_alpha_ordinal(all_gold, all_pred)
        else:
            pooled = spearman_rho(all_gold, all_pred)
    except UndefinedMetricError:
        pooled = None

    defined = [v for v in scores.values() if v is not None]
    print(f"language\t{metric}")
    for lang in sorted(scores):
        value = scores[lang]
        print(f"{lang}\t{'undefined' if value is None else format(value, '.6f')}")
    average = sum(defined) / len(defined) if defined else None
    print(f"AVG\t{'undefined' if average is None else format(average, '.6f')}")
    print(f"pooled\t{'undefined' if pooled is None else format(pooled, '.6f')}")

    report = {
        "task": task,
        "metric": metric,
        "languages": scores,
        "average": average,
        "pooled": pooled,
        "undefined": sorted(k for k, v in scores.items() if v is None),
    }
    report_path = None
    if args.report:
        report_path = Path(args.report)
    elif config.output_dir is not None:
        report_path = Path(config.output_dir) / "evaluation.json"
    if report_path is not None:
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
        print(f"wrote {report_path}", file=sys.stderr)
    if average is None:
        raise UndefinedMetricError(f"{metric} undefined for every language")
    return 0


def cmd_plot_density(config: ExperimentConfig, args) -> int:
    config.require("usages", "instances", "store", "output_dir")
    dataset = _load_corpus(config)
    store = read_store(config.store)
    instances = _select(dataset, "ogwic", None)
    view = join([i.instance_id for i in instances], store)
    sims = cosine_rows(view.e1, view.e2)
    medians = _targets(dataset, instances, "ogwic")

    lo, hi = float(sims.min()), float(sims.max())
    if not hi > lo:
        raise DataError("all cosine similarities are identical; "
                        "cannot bin a degenerate range")
    edges = np.linspace(lo, hi, DENSITY_BINS + 1)
    width = edges[1] - edges[0]

    rows = ["label,bin_left,bin_right,density"]
    for label in (1, 2, 3, 4):
        values = sims[medians == label]
        if values.size == 0:
            print(f"warning: no instances with median label {label}; "
                  f"row group omitted", file=sys.stderr)
            continue
        counts, _ = np.histogram(values, bins=edges)
        density = counts / (values.size * width)
        for b in range(DENSITY_BINS):
            rows.append(f"{label},{edges[b]:.9g},{edges[b + 1]:.9g},"
                        f"{density[b]:.9g}")
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "density.csv"
    out_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wic-disagree",
        description="Word-in-context ordinal rating and disagreement pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "stats": "print per-language corpus statistics",
        "train": "fit the configured method and write its artifacts",
        "predict": "write predictions for the evaluation split",
        "evaluate": "score a prediction file against gold targets",
        "plot-density": "export per-label cosine-similarity densities as CSV",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="path to the JSON config")
        sp.add_argument("--per-language", action="store_true",
                        help="one model per language instead of pooling")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    sub.choices["predict"].add_argument("--out", default=None,
                                        help="prediction TSV path")
    sub.choices["predict"].add_argument("--gold-out", default=None,
                                        help="also write gold targets here")
    sub.choices["evaluate"].add_argument("--gold", required=True,
                                         help="gold TSV (instance_id, language, gold)")
    sub.choices["evaluate"].add_argument("--pred", required=True,
                                         help="prediction TSV from `predict`")
    sub.choices["evaluate"].add_argument("--report", default=None,
                                         help="JSON report path")
    return parser


_COMMANDS = {
    "stats": cmd_stats,
    "train": cmd_train,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "plot-density": cmd_plot_density,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        return _COMMANDS[args.command](config, args)
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (WicDisagreeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
