"""Experiment orchestration: cross-validated training runs for every model
kind, fold ensembling, statistical run comparison, and report emission.

A run directory is self-describing and deterministic given its config:

    <out_dir>/
      config.json            exact config that produced the run
      foldplan.json          stratified fold assignment (hash kept in summary)
      folds/fold_<i>.csv     held-out predictions (id, true, pred, per-class probs)
      folds/fold_<i>_train_log.jsonl   (neural runs)
      checkpoints/           per-fold model parameters
      summary.json           per-fold metrics + mean/SD aggregate + fold seeds

Parallel fold execution is capped by the KC_WORKERS environment variable
(default 1); results are merged in fold order so artifacts are identical
regardless of worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import paramio
from .corpus import (Dataset, FoldPlan, KCLabel, ingest, normalize_text,
                     stratified_kfold)
from .errors import DegenerateInputError, ValidationError
from .evalstats import (ComparisonReport, FoldMetrics, aggregate_cv,
                        bland_altman, bootstrap_ci, cohens_d_paired,
                        compute_metrics, format_mean_sd, format_pvalue,
                        friedman_test, holm_correction, paired_t_test,
                        wilcoxon_signed_rank)
from .features import (TfIdfModel, balanced_class_weights, fit_tfidf, transform)
from .linear_models import (LinearModel, predict_proba_many, train_logistic,
                            train_svm)
from .neural import (CompositeLossConfig, EncoderConfig, TrainConfig,
                     TrainedModel, load_checkpoint, save_checkpoint, train,
                     write_train_log)

MODEL_KINDS = ("tfidf-lr", "tfidf-svm", "neural")


# --- configuration -----------------------------------------------------------------

@dataclass(frozen=True)
class FeatureConfig:
    ngram_min: int = 3
    ngram_max: int = 5
    min_df: int = 2


@dataclass(frozen=True)
class LinearConfig:
    l2_lambda: float = 1e-4
    max_epochs: int = 50
    lr: float = 2.0
    batch_size: int = 32
    lr_decay: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    model: str = "tfidf-lr"
    n_folds: int = 10
    seed: int = 0
    out_dir: str = "run"
    dataset_format: str = ""  # "" infers from the file suffix
    features: FeatureConfig = field(default_factory=FeatureConfig)
    linear: LinearConfig = field(default_factory=LinearConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    loss: CompositeLossConfig = field(default_factory=CompositeLossConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ValidationError(f"unknown model {self.model!r}; expected {MODEL_KINDS}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        def sub(klass, key):
            return klass(**obj.get(key) or {}) if obj.get(key) else klass()
        if "dataset" not in obj:
            raise ValidationError("config must name a dataset")
        return cls(
            dataset=obj["dataset"],
            model=obj.get("model", "tfidf-lr"),
            n_folds=int(obj.get("n_folds", 10)),
            seed=int(obj.get("seed", 0)),
            out_dir=obj.get("out_dir", "run"),
            dataset_format=obj.get("dataset_format", ""),
            features=sub(FeatureConfig, "features"),
            linear=sub(LinearConfig, "linear"),
            encoder=sub(EncoderConfig, "encoder"),
            loss=sub(CompositeLossConfig, "loss"),
            train=sub(TrainConfig, "train"),
        )


ABLATIONS = {
    "no_focal": ("gamma", 0.0),
    "no_ls": ("epsilon", 0.0),
    "no_rdrop": ("lambda_rd", 0.0),
}


def ablation(cfg: ExperimentConfig, name: str) -> ExperimentConfig:
    """Copy of the config with exactly one loss component switched off."""
    if name not in ABLATIONS:
        raise ValidationError(f"unknown ablation {name!r}; expected {sorted(ABLATIONS)}")
    fld, value = ABLATIONS[name]
    return dataclasses.replace(cfg, loss=dataclasses.replace(cfg.loss, **{fld: value}))


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    fmt = cfg.dataset_format or ("csv" if cfg.dataset.endswith(".csv") else "jsonl")
    return ingest(cfg.dataset, format=fmt)


# --- fold models ----------------------------------------------------------------------

class TfidfLinearClassifier:
    """TF-IDF features + linear model, glued behind a text-in probability-out face."""

    def __init__(self, tfidf: TfIdfModel, linear: LinearModel):
        self.tfidf = tfidf
        self.linear = linear

    def predict_proba(self, text: str) -> np.ndarray:
        return self.predict_proba_batch([text])[0]

    def predict_proba_batch(self, texts: list[str]) -> np.ndarray:
        X = [transform(self.tfidf, normalize_text(t)) for t in texts]
        return predict_proba_many(self.linear, X)


class NeuralClassifier:
    """Adapter giving a trained neural fold model the same face."""

    def __init__(self, trained: TrainedModel):
        self.trained = trained

    def predict_proba(self, text: str) -> np.ndarray:
        return self.predict_proba_batch([text])[0]

    def predict_proba_batch(self, texts: list[str]) -> np.ndarray:
        return self.trained.predict_proba([normalize_text(t) for t in texts])


@dataclass
class EnsemblePrediction:
    per_model: np.ndarray      # (n_models, K)
    averaged: np.ndarray       # (K,)
    label: KCLabel


def ensemble_predict(models: list, text: str) -> EnsemblePrediction:
    """Average the fold models' probability vectors; argmax with lowest-index
    tie-breaking picks the label.

    Pass any subset of a run's fold models to ensemble over fewer folds.
    """
    if not models:
        raise ValidationError("empty model list")
    per_model = np.vstack([m.predict_proba(text) for m in models])
    averaged = per_model.mean(axis=0)
    return EnsemblePrediction(per_model=per_model, averaged=averaged,
                              label=KCLabel(int(np.argmax(averaged))))


# --- cross-validation runs ---------------------------------------------------------------

@dataclass
class FoldOutcome:
    fold_idx: int
    metrics: FoldMetrics
    ids: list[str]
    truth: list[int]
    pred: list[int]
    probs: np.ndarray
    model: object
    train_log: list[dict] | None = None


@dataclass
class RunResult:
    run_dir: Path
    per_fold: list[FoldMetrics]
    summary: dict


def _fold_seed(cfg: ExperimentConfig, fold_idx: int) -> int:
    return cfg.seed + fold_idx


def _train_fold(cfg: ExperimentConfig, data: Dataset, plan: FoldPlan,
                fold_idx: int) -> FoldOutcome:
    train_ex = [ex for ex in data.examples if plan.assignment[ex.id] != fold_idx]
    val_ex = [ex for ex in data.examples if plan.assignment[ex.id] == fold_idx]
    seed = _fold_seed(cfg, fold_idx)
    train_log = None
    if cfg.model in ("tfidf-lr", "tfidf-svm"):
        tfidf = fit_tfidf([ex.normalized_text for ex in train_ex],
                          ngram_range=(cfg.features.ngram_min, cfg.features.ngram_max),
                          min_df=cfg.features.min_df)
        weights = balanced_class_weights(Dataset.from_examples(train_ex))
        X = [transform(tfidf, ex.normalized_text) for ex in train_ex]
        y = [ex.label for ex in train_ex]
        fit = train_logistic if cfg.model == "tfidf-lr" else train_svm
        linear = fit(X, y, weights, n_features=tfidf.n_features,
                     l2_lambda=cfg.linear.l2_lambda, max_epochs=cfg.linear.max_epochs,
                     seed=seed, lr=cfg.linear.lr, batch_size=cfg.linear.batch_size,
                     lr_decay=cfg.linear.lr_decay)
        model = TfidfLinearClassifier(tfidf, linear)
    else:
        train_cfg = dataclasses.replace(cfg.train, seed=seed)
        trained = train(data, plan, fold_idx, cfg.encoder, cfg.loss, train_cfg)
        model = NeuralClassifier(trained)
        train_log = trained.log
    probs = model.predict_proba_batch([ex.normalized_text for ex in val_ex])
    pred = probs.argmax(axis=1).tolist()
    truth = [int(ex.label) for ex in val_ex]
    metrics, _ = compute_metrics(truth, pred, fold_idx=fold_idx)
    return FoldOutcome(fold_idx=fold_idx, metrics=metrics,
                       ids=[ex.id for ex in val_ex], truth=truth, pred=pred,
                       probs=probs, model=model, train_log=train_log)


def _write_fold_csv(path: Path, outcome: FoldOutcome) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "true", "pred"]
                        + [f"p_{lab.display_name}" for lab in KCLabel])
        for i, ex_id in enumerate(outcome.ids):
            writer.writerow([ex_id, outcome.truth[i], outcome.pred[i]]
                            + [f"{p:.17g}" for p in outcome.probs[i]])


def _save_fold_model(run_dir: Path, cfg: ExperimentConfig, outcome: FoldOutcome) -> None:
    ckpt_dir = run_dir / "checkpoints"
    if isinstance(outcome.model, TfidfLinearClassifier):
        (ckpt_dir / f"fold_{outcome.fold_idx}_tfidf.json").write_text(
            outcome.model.tfidf.to_json(), encoding="utf-8")
        lin = outcome.model.linear
        paramio.save_params(
            ckpt_dir / f"fold_{outcome.fold_idx}_linear.bin",
            {"kind": lin.kind, "n_features": lin.n_features,
             "n_classes": lin.weights.shape[0], "l2_lambda": lin.l2_lambda,
             "seed": _fold_seed(cfg, outcome.fold_idx),
             "final_objective": lin.final_objective},
            {"weights": lin.weights, "bias": lin.bias})
    else:
        save_checkpoint(outcome.model.trained, ckpt_dir / f"fold_{outcome.fold_idx}.ckpt")
        write_train_log(outcome.model.trained,
                        run_dir / "folds" / f"fold_{outcome.fold_idx}_train_log.jsonl")


def plan_hash(plan: FoldPlan) -> str:
    return hashlib.sha256(plan.to_json().encode("utf-8")).hexdigest()


def run_cv(cfg: ExperimentConfig) -> RunResult:
    """Full stratified CV run for one config; writes all artifacts, returns
    the per-fold metrics and summary. Deterministic given the config."""
    data = load_dataset(cfg)
    plan = stratified_kfold(data, cfg.n_folds, cfg.seed)
    run_dir = Path(cfg.out_dir)
    (run_dir / "folds").mkdir(parents=True, exist_ok=True)
    (run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (run_dir / "foldplan.json").write_text(plan.to_json() + "\n", encoding="utf-8")

    workers = max(1, int(os.environ.get("KC_WORKERS", "1")))
    outcomes: list[FoldOutcome | None] = [None] * cfg.n_folds
    try:
        if workers == 1:
            for i in range(cfg.n_folds):
                outcomes[i] = _train_fold(cfg, data, plan, i)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(_train_fold, cfg, data, plan, i): i
                           for i in range(cfg.n_folds)}
                for fut, i in futures.items():
                    outcomes[i] = fut.result()
    except Exception as e:
        done = [o.fold_idx for o in outcomes if o is not None]
        (run_dir / "error_manifest.json").write_text(json.dumps({
            "error": str(e), "completed_folds": done,
        }, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        raise RuntimeError(f"run aborted: {e}") from e

    per_fold = []
    for outcome in outcomes:
        _write_fold_csv(run_dir / "folds" / f"fold_{outcome.fold_idx}.csv", outcome)
        _save_fold_model(run_dir, cfg, outcome)
        per_fold.append(outcome.metrics)
    summary = {
        "model": cfg.model,
        "dataset": cfg.dataset,
        "n_folds": cfg.n_folds,
        "seed": cfg.seed,
        "fold_seeds": [_fold_seed(cfg, i) for i in range(cfg.n_folds)],
        "foldplan_sha256": plan_hash(plan),
        "per_fold": [fm.to_dict() for fm in per_fold],
        "aggregate": aggregate_cv(per_fold).to_dict(),
    }
    (run_dir / "summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return RunResult(run_dir=run_dir, per_fold=per_fold, summary=summary)


def load_fold_models(run_dir: str | Path, folds: list[int] | None = None) -> list:
    """Re-load a run's fold models (optionally a subset) for ensembling."""
    run_dir = Path(run_dir)
    cfg = ExperimentConfig.from_dict(
        json.loads((run_dir / "config.json").read_text(encoding="utf-8")))
    indices = list(range(cfg.n_folds)) if folds is None else list(folds)
    models = []
    for i in indices:
        if cfg.model in ("tfidf-lr", "tfidf-svm"):
            tfidf = TfIdfModel.from_json(
                (run_dir / "checkpoints" / f"fold_{i}_tfidf.json").read_text(encoding="utf-8"))
            header, arrays = paramio.load_params(
                run_dir / "checkpoints" / f"fold_{i}_linear.bin")
            linear = LinearModel(weights=arrays["weights"], bias=arrays["bias"],
                                 kind=header["kind"], l2_lambda=header["l2_lambda"],
                                 final_objective=header["final_objective"])
            models.append(TfidfLinearClassifier(tfidf, linear))
        else:
            models.append(NeuralClassifier(
                load_checkpoint(run_dir / "checkpoints" / f"fold_{i}.ckpt")))
    return models


# --- run comparison -------------------------------------------------------------------

@dataclass
class LoadedRun:
    name: str
    summary: dict
    macro_f1: np.ndarray
    foldplan_sha256: str


def _load_run(run_dir: str | Path) -> LoadedRun:
    run_dir = Path(run_dir)
    summary_path = run_dir / "summary.json"
    if not summary_path.exists():
        raise ValidationError(f"missing artifact: {summary_path}")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    per_fold = sorted(summary["per_fold"], key=lambda fm: fm["fold_idx"])
    return LoadedRun(
        name=run_dir.name,
        summary=summary,
        macro_f1=np.array([fm["macro_f1"] for fm in per_fold], dtype=np.float64),
        foldplan_sha256=summary["foldplan_sha256"],
    )


def _unique_names(runs: list[LoadedRun]) -> None:
    seen: dict[str, int] = {}
    for run in runs:
        if run.name in seen:
            seen[run.name] += 1
            run.name = f"{run.name}_{seen[run.name]}"
        else:
            seen[run.name] = 1


@dataclass
class ComparisonTable:
    friedman_chi2: float
    friedman_p: float
    correction: str
    models: dict[str, dict]
    pairs: list[ComparisonReport]

    def to_dict(self) -> dict:
        return {
            "friedman": {"chi2": self.friedman_chi2, "p": self.friedman_p},
            "correction": self.correction,
            "models": self.models,
            "pairs": [p.to_dict() for p in self.pairs],
        }


def compare_models(run_dirs: list, tests: set | None = None,
                   correction: str = "holm", n_resamples: int = 10_000,
                   seed: int = 0) -> ComparisonTable:
    """Pairwise statistical comparison across runs sharing one fold plan.

    Friedman omnibus first, then per-pair paired t / Wilcoxon / Cohen's d /
    bootstrap CI of the mean difference / Bland-Altman, with Holm adjustment
    over the pairwise Wilcoxon family. A pair with identical fold scores is
    reported with verdict "identical" (p = 1 by convention).
    """
    tests = {"ttest", "wilcoxon", "bland_altman"} if tests is None else set(tests)
    if correction not in ("holm", "none"):
        raise ValidationError(f"unknown correction {correction!r}")
    if len(run_dirs) < 2:
        raise ValidationError("need at least 2 runs to compare")
    runs = [_load_run(d) for d in run_dirs]
    _unique_names(runs)
    hashes = {r.foldplan_sha256 for r in runs}
    if len(hashes) > 1:
        raise ValidationError(
            "runs use different fold plans; paired comparison requires identical folds: "
            + ", ".join(f"{r.name}={r.foldplan_sha256[:12]}" for r in runs))
    lengths = {len(r.macro_f1) for r in runs}
    if len(lengths) > 1:
        raise ValidationError("runs have different fold counts")

    table = np.column_stack([r.macro_f1 for r in runs])
    chi2, chi2_p = friedman_test(table)

    models = {}
    for r in runs:
        ci = bootstrap_ci(r.macro_f1, n_resamples=n_resamples, seed=seed)
        models[r.name] = {
            "mean_macro_f1": float(r.macro_f1.mean()),
            "sd_macro_f1": float(r.macro_f1.std(ddof=1)) if len(r.macro_f1) > 1 else 0.0,
            "ci95": [ci[0], ci[1]],
        }

    pairs: list[ComparisonReport] = []
    for i in range(len(runs)):
        for j in range(i + 1, len(runs)):
            a, b = runs[i].macro_f1, runs[j].macro_f1
            delta = float((a - b).mean())
            identical = not np.any(a != b)
            # identical series make every test degenerate; p = 1 by convention.
            # A constant non-zero shift degenerates only the variance-based
            # statistics (t, Cohen's d), which are then reported as missing.
            p_t = p_w = 1.0
            d_eff: float | None = 0.0
            if not identical:
                if "ttest" in tests:
                    try:
                        _, p_t = paired_t_test(a, b)
                    except DegenerateInputError:
                        p_t = None
                if "wilcoxon" in tests:
                    _, p_w = wilcoxon_signed_rank(a, b)
                try:
                    d_eff = cohens_d_paired(a, b)
                except DegenerateInputError:
                    d_eff = None
            ci = bootstrap_ci(a - b, n_resamples=n_resamples, seed=seed)
            bland = bland_altman(a, b) if "bland_altman" in tests else None
            pairs.append(ComparisonReport(
                model_a=runs[i].name, model_b=runs[j].name, delta_mean=delta,
                p_ttest=p_t, p_wilcoxon=p_w, p_adjusted=p_w, cohens_d=d_eff,
                ci95=ci, verdict="identical" if identical else "",
                bland=bland))

    family = [p.p_wilcoxon if "wilcoxon" in tests else p.p_ttest for p in pairs]
    present = [(k, v) for k, v in enumerate(family) if v is not None]
    adjusted = (holm_correction([v for _, v in present]) if correction == "holm"
                else [v for _, v in present])
    for report in pairs:
        report.p_adjusted = None
    for (k, _), adj in zip(present, adjusted):
        pairs[k].p_adjusted = adj
    for report in pairs:
        if report.verdict == "identical":
            continue
        if report.p_adjusted is None:
            report.verdict = "degenerate"
        else:
            report.verdict = ("significant" if report.p_adjusted < 0.05
                              else "not_significant")
    return ComparisonTable(friedman_chi2=chi2, friedman_p=chi2_p,
                           correction=correction, models=models, pairs=pairs)


def write_comparison(table: ComparisonTable, out_dir: str | Path) -> None:
    """Emit the comparison as raw JSON plus a display-formatted CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "comparison.json").write_text(
        json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with (out / "comparison.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model_a", "model_b", "delta", "p_wilcoxon",
                         "cohens_d", "p_adjusted", "significant"])
        for p in table.pairs:
            writer.writerow([
                p.model_a, p.model_b, f"{p.delta_mean:.4f}",
                "" if p.p_wilcoxon is None else format_pvalue(p.p_wilcoxon),
                "" if p.cohens_d is None else f"{p.cohens_d:.3f}",
                "" if p.p_adjusted is None else format_pvalue(p.p_adjusted),
                "yes" if p.verdict == "significant" else "no",
            ])


# --- reporting ------------------------------------------------------------------------

_SUMMARY_COLUMNS = (("Accuracy", "accuracy"), ("Macro-F1", "macro_f1"),
                    ("Weighted-F1", "weighted_f1"))
_CLASS_COLUMNS = (("Precision", "precision"), ("Recall", "recall"), ("F1", "f1"))


def _render_table(title: str, row_names: list[str], columns, cells) -> str:
    """Fixed-width table; the best mean in each column gets a '*' marker."""
    header = [title] + [name for name, _ in columns]
    best = {}
    for c in range(len(columns)):
        means = [cells[r][c][0] for r in range(len(row_names))]
        best[c] = int(np.argmax(means))
    rows = [header]
    for r, name in enumerate(row_names):
        row = [name]
        for c in range(len(columns)):
            mark = " *" if best[c] == r else ""
            row.append(format_mean_sd(*cells[r][c]) + mark)
        rows.append(row)
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
             for row in rows]
    lines.insert(1, "-" * max(len(line) for line in lines))
    return "\n".join(lines)


def report(run_dirs: list, out_dir: str | Path = "report") -> str:
    """Render the cross-run summary and per-class tables; write plot-ready
    CSVs (fold-level macro-F1 distribution, Bland-Altman pairs)."""
    runs = [_load_run(d) for d in run_dirs]
    _unique_names(runs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = [r.name for r in runs]

    cells = []
    for r in runs:
        agg = r.summary["aggregate"]["metrics"]
        cells.append([(agg[key]["mean"], agg[key]["sd"]) for _, key in _SUMMARY_COLUMNS])
    text_blocks = [_render_table("Model", names, _SUMMARY_COLUMNS, cells)]
    with (out / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["model"] + [f"{key}_{stat}" for _, key in _SUMMARY_COLUMNS
                                     for stat in ("mean", "sd")])
        for name, row in zip(names, cells):
            writer.writerow([name] + [f"{v:.17g}" for pair in row for v in pair])

    class_names = list(runs[0].summary["aggregate"]["per_class"])
    for cls_name in class_names:
        cls_cells = []
        for r in runs:
            per_class = r.summary["aggregate"]["per_class"].get(cls_name)
            if per_class is None:
                raise ValidationError(f"run {r.name} lacks per-class metrics for {cls_name}")
            cls_cells.append([(per_class[key]["mean"], per_class[key]["sd"])
                              for _, key in _CLASS_COLUMNS])
        text_blocks.append(f"[{cls_name}]\n"
                           + _render_table("Model", names, _CLASS_COLUMNS, cls_cells))
        with (out / f"perclass_{cls_name}.csv").open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model"] + [f"{key}_{stat}" for _, key in _CLASS_COLUMNS
                                         for stat in ("mean", "sd")])
            for name, row in zip(names, cls_cells):
                writer.writerow([name] + [f"{v:.17g}" for pair in row for v in pair])

    with (out / "cv_macro_f1_distribution.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold"] + names)
        for fold in range(len(runs[0].macro_f1)):
            writer.writerow([fold] + [f"{r.macro_f1[fold]:.17g}" for r in runs])

    for i in range(len(runs)):
        for j in range(i + 1, len(runs)):
            ba = bland_altman(runs[i].macro_f1, runs[j].macro_f1)
            path = out / f"bland_altman_{names[i]}_vs_{names[j]}.csv"
            with path.open("w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["fold", "mean", "diff"])
                for fold, (mean, diff) in enumerate(ba.pairs):
                    writer.writerow([fold, f"{mean:.17g}", f"{diff:.17g}"])

    return "\n\n".join(text_blocks)
