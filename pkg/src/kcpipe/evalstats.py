"""Classification metrics and the model-comparison statistics suite.

Metrics: per-class precision/recall/F1 with zero-denominator flagging,
accuracy, macro-F1 (unweighted mean over active classes) and weighted-F1
(support-weighted), plus mean +/- SD aggregation across folds.

Statistics: paired t test, Wilcoxon signed-rank (exact by enumeration up to
n=20, normal approximation with tie and continuity correction beyond),
Friedman omnibus test with tie correction, Holm step-down adjustment,
paired Cohen's d, Levene's variance test, seeded percentile bootstrap, and
Bland-Altman agreement. The t, F, and chi-square tail areas are evaluated
through the regularized incomplete beta / gamma functions (accuracy well
inside 1e-10); no statistics toolkit is used for any test statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, gammaincc

from .corpus import KCLabel
from .errors import DegenerateInputError, ValidationError


# --- distribution tails ---------------------------------------------------------

def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail area of Student's t: I_{df/(df+t^2)}(df/2, 1/2)."""
    if df < 1:
        raise ValidationError(f"df must be >= 1, got {df}")
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_sf(x: float, df1: int, df2: int) -> float:
    """Survival function of the F distribution via the incomplete beta."""
    if x <= 0:
        return 1.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * x)))


def chi2_sf(x: float, df: int) -> float:
    """Survival function of the chi-square distribution."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# --- confusion matrix and fold metrics -------------------------------------------

def _label_name(code: int) -> str:
    try:
        return KCLabel(code).display_name
    except ValueError:
        return str(code)


def _label_code(name: str) -> int:
    try:
        return int(KCLabel.from_string(name))
    except ValidationError:
        return int(name)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray
    labels: tuple[int, ...]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class PerClassMetrics:
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()  # metrics whose denominator was zero

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall,
                "f1": self.f1, "undefined": list(self.undefined)}


@dataclass(frozen=True)
class FoldMetrics:
    fold_idx: int
    accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class: dict[int, PerClassMetrics]

    def to_dict(self) -> dict:
        return {
            "fold_idx": self.fold_idx,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "per_class": {_label_name(c): m.to_dict()
                          for c, m in self.per_class.items()},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FoldMetrics":
        per_class = {}
        for name, m in obj["per_class"].items():
            per_class[_label_code(name)] = PerClassMetrics(
                precision=m["precision"], recall=m["recall"], f1=m["f1"],
                undefined=tuple(m.get("undefined", ())))
        return cls(fold_idx=int(obj["fold_idx"]), accuracy=obj["accuracy"],
                   macro_f1=obj["macro_f1"], weighted_f1=obj["weighted_f1"],
                   per_class=per_class)


def compute_metrics(truth, predicted, fold_idx: int = 0) -> tuple[FoldMetrics, ConfusionMatrix]:
    """Confusion matrix and derived metrics over the active classes.

    Active classes are those present in truth or predictions; macro-F1 is
    their unweighted mean F1, weighted-F1 the support-weighted mean. A
    zero-denominator precision/recall/F1 is reported as 0 and flagged.
    """
    t = [int(x) for x in truth]
    p = [int(x) for x in predicted]
    if len(t) != len(p):
        raise ValidationError(f"length mismatch: {len(t)} truth vs {len(p)} predicted")
    if not t:
        raise ValidationError("empty inputs")
    labels = tuple(sorted(set(t) | set(p)))
    index = {c: i for i, c in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for ti, pi in zip(t, p):
        counts[index[ti], index[pi]] += 1
    cm = ConfusionMatrix(counts=counts, labels=labels)

    per_class: dict[int, PerClassMetrics] = {}
    f1s, supports = [], []
    for c in labels:
        i = index[c]
        tp = int(counts[i, i])
        fp = int(counts[:, i].sum()) - tp
        fn = int(counts[i, :].sum()) - tp
        undefined = []
        if tp + fp > 0:
            precision = tp / (tp + fp)
        else:
            precision, undefined = 0.0, undefined + ["precision"]
        if tp + fn > 0:
            recall = tp / (tp + fn)
        else:
            recall, undefined = 0.0, undefined + ["recall"]
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1, undefined = 0.0, undefined + ["f1"]
        per_class[c] = PerClassMetrics(precision=precision, recall=recall,
                                       f1=f1, undefined=tuple(undefined))
        f1s.append(f1)
        supports.append(tp + fn)
    total_support = sum(supports)
    metrics = FoldMetrics(
        fold_idx=fold_idx,
        accuracy=float(np.trace(counts)) / len(t),
        macro_f1=float(np.mean(f1s)),
        weighted_f1=float(sum(f * s for f, s in zip(f1s, supports)) / total_support),
        per_class=per_class,
    )
    return metrics, cm


@dataclass(frozen=True)
class CVSummary:
    """Mean and sample SD of every metric across folds."""

    n_folds: int
    metrics: dict[str, tuple[float, float]]
    per_class: dict[int, dict[str, tuple[float, float]]]
    single_fold: bool = False

    def to_dict(self) -> dict:
        return {
            "n_folds": self.n_folds,
            "single_fold": self.single_fold,
            "metrics": {k: {"mean": m, "sd": s} for k, (m, s) in self.metrics.items()},
            "per_class": {_label_name(c):
                          {k: {"mean": m, "sd": s} for k, (m, s) in d.items()}
                          for c, d in self.per_class.items()},
        }


def _mean_sd(values: list[float]) -> tuple[float, float]:
    if len(values) == 1:
        return float(values[0]), 0.0
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std(ddof=1))


def aggregate_cv(per_fold: list[FoldMetrics]) -> CVSummary:
    """Summarize fold metrics as mean +/- sample SD (SD = 0, flagged, for a
    single fold)."""
    if not per_fold:
        raise ValidationError("no fold metrics to aggregate")
    metrics = {
        name: _mean_sd([getattr(fm, name) for fm in per_fold])
        for name in ("accuracy", "macro_f1", "weighted_f1")
    }
    class_ids = sorted({c for fm in per_fold for c in fm.per_class})
    per_class = {}
    for c in class_ids:
        present = [fm.per_class[c] for fm in per_fold if c in fm.per_class]
        per_class[c] = {name: _mean_sd([getattr(m, name) for m in present])
                        for name in ("precision", "recall", "f1")}
    return CVSummary(n_folds=len(per_fold), metrics=metrics, per_class=per_class,
                     single_fold=len(per_fold) == 1)


def format_score(x: float) -> str:
    """Three-decimal display with the leading zero dropped: 0.8364 -> '.836'."""
    s = f"{x:.3f}"
    return s.replace("0.", ".", 1) if s.startswith("0.") or s.startswith("-0.") else s


def format_mean_sd(mean: float, sd: float) -> str:
    return f"{format_score(mean)} ± {format_score(sd)}"


def format_pvalue(p: float) -> str:
    return f"{p:.4f}"


# --- paired comparisons -----------------------------------------------------------

def _paired_diffs(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValidationError(f"need equal-length 1-D series, got {a.shape} and {b.shape}")
    return a - b


def paired_t_test(a, b) -> tuple[float, float]:
    """Paired Student t test on fold scores; returns (t, two-sided p)."""
    d = _paired_diffs(a, b)
    n = len(d)
    if n < 2:
        raise ValidationError("need at least 2 pairs")
    sd = d.std(ddof=1)
    if sd == 0:
        raise DegenerateInputError("zero-variance differences")
    t = float(d.mean() / (sd / math.sqrt(n)))
    return t, student_t_two_sided_p(t, n - 1)


def cohens_d_paired(a, b) -> float:
    """Paired effect size: mean difference over the SD of the differences."""
    d = _paired_diffs(a, b)
    if len(d) < 2:
        raise ValidationError("need at least 2 pairs")
    sd = d.std(ddof=1)
    if sd == 0:
        raise DegenerateInputError("zero-variance differences")
    return float(d.mean() / sd)


def _midranks(values: np.ndarray) -> np.ndarray:
    """Average ranks (1-based) with ties sharing their midrank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


EXACT_WILCOXON_MAX_N = 20


def _wilcoxon_exact_p(scaled_ranks: np.ndarray, w_plus_scaled: int) -> float:
    """Exact two-sided p over all sign assignments, via a count convolution.

    Ranks arrive doubled so midranks are integral; counts fit exactly in
    int64 for n <= 20.
    """
    total = int(scaled_ranks.sum())
    dist = np.zeros(total + 1, dtype=np.int64)
    dist[0] = 1
    for s in scaled_ranks:
        s = int(s)
        nxt = dist.copy()
        nxt[s:] += dist[:len(dist) - s]
        dist = nxt
    denom = float(2 ** len(scaled_ranks))
    p_le = float(dist[:w_plus_scaled + 1].sum()) / denom
    p_ge = float(dist[w_plus_scaled:].sum()) / denom
    return min(1.0, 2.0 * min(p_le, p_ge))


def wilcoxon_signed_rank(a, b) -> tuple[float, float]:
    """Wilcoxon signed-rank test on paired scores; returns (W, two-sided p).

    Zero differences are dropped before ranking; |differences| are ranked
    with midranks. Exact enumeration for n <= 20, otherwise a normal
    approximation with tie and continuity corrections.
    """
    d = _paired_diffs(a, b)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        raise DegenerateInputError("all differences are zero")
    ranks = _midranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    if n <= EXACT_WILCOXON_MAX_N:
        scaled = np.rint(ranks * 2).astype(np.int64)
        p = _wilcoxon_exact_p(scaled, int(round(w_plus * 2)))
        return w, p
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    tie_term = float(((tie_counts ** 3) - tie_counts).sum()) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var <= 0:
        raise DegenerateInputError("zero variance in rank distribution")
    z = (w - mean + 0.5) / math.sqrt(var)
    return w, min(1.0, 2.0 * (1.0 - normal_sf(z)))


def friedman_test(score_table) -> tuple[float, float]:
    """Friedman rank test over an (n_blocks, k_treatments) score table.

    Midranks within rows, the classic chi-square statistic, and the
    standard tie correction. A table whose rows are all completely tied
    carries no rank information and yields (0.0, 1.0).
    """
    table = np.asarray(score_table, dtype=np.float64)
    if table.ndim != 2:
        raise ValidationError("score table must be 2-D (folds x models)")
    n, k = table.shape
    if n < 2 or k < 2:
        raise ValidationError(f"need >= 2 folds and >= 2 models, got {table.shape}")
    ranks = np.vstack([_midranks(row) for row in table])
    mean_ranks = ranks.mean(axis=0)
    chi2_raw = 12.0 * n / (k * (k + 1)) * float(((mean_ranks - (k + 1) / 2.0) ** 2).sum())
    tie_sum = 0.0
    for row in table:
        _, counts = np.unique(row, return_counts=True)
        tie_sum += float(((counts ** 3) - counts).sum())
    correction = 1.0 - tie_sum / (n * k * (k * k - 1))
    if correction == 0.0:
        return 0.0, 1.0
    chi2 = chi2_raw / correction
    return chi2, chi2_sf(chi2, k - 1)


def holm_correction(p_values) -> list[float]:
    """Holm step-down adjustment; returns adjusted p in the original order."""
    ps = [float(p) for p in p_values]
    for p in ps:
        if not (0.0 < p <= 1.0):
            raise ValidationError(f"p-values must lie in (0, 1], got {p}")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for j, i in enumerate(order):
        running = max(running, min(1.0, (m - j) * ps[i]))
        adjusted[i] = running
    return adjusted


def levene_test(groups, center: str = "mean") -> tuple[float, float]:
    """Levene's variance-homogeneity test; returns (W, p from F(k-1, N-k)).

    ``center`` picks the classic mean-centered statistic or the
    median-centered (Brown-Forsythe) variant.
    """
    if len(groups) < 2:
        raise ValidationError("need at least 2 groups")
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    for i, g in enumerate(arrays):
        if len(g) < 2:
            raise ValidationError(f"group {i} has fewer than 2 values")
    if center not in ("mean", "median"):
        raise ValidationError(f"unknown center {center!r}")
    centers = [g.mean() if center == "mean" else float(np.median(g)) for g in arrays]
    z = [np.abs(g - c) for g, c in zip(arrays, centers)]
    k = len(arrays)
    n_total = sum(len(g) for g in arrays)
    z_group_means = [zi.mean() for zi in z]
    z_grand = sum(zi.sum() for zi in z) / n_total
    numer = sum(len(zi) * (zm - z_grand) ** 2 for zi, zm in zip(z, z_group_means))
    denom = sum(((zi - zm) ** 2).sum() for zi, zm in zip(z, z_group_means))
    if denom == 0.0:
        if numer == 0.0:
            return 0.0, 1.0
        raise DegenerateInputError("zero within-group deviation variance")
    w = float((n_total - k) / (k - 1) * numer / denom)
    return w, f_sf(w, k - 1, n_total - k)


def bootstrap_ci(scores, n_resamples: int = 10_000, level: float = 0.95,
                 seed: int = 0) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for the mean of ``scores``."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("empty scores")
    if n_resamples < 100:
        raise ValidationError("need at least 100 resamples")
    if not (0.0 < level < 1.0):
        raise ValidationError(f"level must be in (0, 1), got {level}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(n_resamples, arr.size))
    means = arr[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(means, [alpha, 1.0 - alpha])
    return float(low), float(high)


@dataclass(frozen=True)
class BlandAltman:
    bias: float
    loa_low: float
    loa_high: float
    pairs: tuple[tuple[float, float], ...]  # (mean of the two scores, a - b)

    def to_dict(self) -> dict:
        return {"bias": self.bias, "loa_low": self.loa_low,
                "loa_high": self.loa_high,
                "pairs": [list(p) for p in self.pairs]}


def bland_altman(a, b) -> BlandAltman:
    """Agreement analysis: mean bias and 1.96-SD limits of agreement."""
    d = _paired_diffs(a, b)
    if len(d) < 2:
        raise ValidationError("need at least 2 pairs")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    bias = float(d.mean())
    spread = 1.96 * float(d.std(ddof=1))
    pairs = tuple((float((x + y) / 2.0), float(x - y)) for x, y in zip(a, b))
    return BlandAltman(bias=bias, loa_low=bias - spread, loa_high=bias + spread,
                       pairs=pairs)


# --- pairwise comparison record -----------------------------------------------------

@dataclass
class ComparisonReport:
    """One pairwise model comparison row (the comparison table's unit).

    A statistic that is individually degenerate on the pair (for example
    Cohen's d under a constant shift) is reported as None.
    """

    model_a: str
    model_b: str
    delta_mean: float
    p_ttest: float | None
    p_wilcoxon: float | None
    p_adjusted: float | None
    cohens_d: float | None
    ci95: tuple[float, float]
    verdict: str = ""  # "identical" | "significant" | "not_significant" | "degenerate"
    bland: BlandAltman | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        out = {
            "model_a": self.model_a,
            "model_b": self.model_b,
            "delta_mean": self.delta_mean,
            "p_ttest": self.p_ttest,
            "p_wilcoxon": self.p_wilcoxon,
            "p_adjusted": self.p_adjusted,
            "cohens_d": self.cohens_d,
            "ci95": list(self.ci95),
            "verdict": self.verdict,
        }
        if self.bland is not None:
            out["bland_altman"] = self.bland.to_dict()
        return out
