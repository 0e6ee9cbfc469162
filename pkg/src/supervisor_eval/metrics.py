"""Diagnostic curves and scalar metrics for anomaly-score supervisors.

All threshold sweeps are O(N log N): scores are sorted once and samples with
equal scores enter the flagged set together, so every point on the ROC and PR
curves is a threshold that can actually be deployed.
"""

from __future__ import annotations

import warnings
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    Curve,
    CurveKind,
    DegenerateRange,
    MetricsReport,
    MissingCorrectness,
    SampleSet,
    ScoreDistribution,
    ScoredSample,
    as_sample_set,
)

SampleInput = Union[SampleSet, Sequence[ScoredSample]]


def _sweep(ss: SampleSet):
    """Cumulative (threshold, tp, fp) for thresholds at every distinct score, descending."""
    order = np.argsort(-ss.scores, kind="stable")
    s = ss.scores[order]
    pos = ss.is_outlier[order]
    # last index of each tie group in descending order
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(pos, dtype=np.int64)[ends]
    fp = (ends + 1) - tp
    return s[ends], tp, fp


def roc_curve(samples: SampleInput) -> Curve:
    """ROC curve with one point per distinct score plus the (0, 0) start."""
    ss = as_sample_set(samples)
    thr, tp, fp = _sweep(ss)
    n_pos, n_neg = ss.n_outliers, ss.n_inliers
    x = np.r_[0.0, fp / n_neg]
    y = np.r_[0.0, tp / n_pos]
    t = np.r_[np.inf, thr]
    return Curve(CurveKind.ROC, x, y, t)


def pr_curve(samples: SampleInput) -> Curve:
    """Precision-recall curve ordered by recall.

    The first point is the empty flagged set (recall 0, precision 1 by
    convention); the last flags every sample.
    """
    ss = as_sample_set(samples)
    thr, tp, fp = _sweep(ss)
    x = np.r_[0.0, tp / ss.n_outliers]
    y = np.r_[1.0, tp / (tp + fp)]
    t = np.r_[np.inf, thr]
    return Curve(CurveKind.PR, x, y, t)


def score_distribution(samples: SampleInput, bin_count: int = 50) -> ScoreDistribution:
    """Equal-width histograms of inlier and outlier scores over the pooled range.

    Bins are half-open ``[a, b)`` except the last, which is closed. When every
    score is equal a single bin is returned and :class:`DegenerateRange` is
    warned.
    """
    if int(bin_count) != bin_count or bin_count < 1:
        raise ValueError(f"bin_count must be a positive integer, got {bin_count!r}")
    ss = as_sample_set(samples)
    lo, hi = float(ss.scores.min()), float(ss.scores.max())
    if lo == hi:
        warnings.warn(f"all anomaly scores equal {lo!r}; using a single bin", DegenerateRange, stacklevel=2)
        edges = np.array([np.nextafter(lo, -np.inf), np.nextafter(hi, np.inf)])
        return ScoreDistribution(edges, [ss.n_inliers], [ss.n_outliers], degenerate=True)
    edges = np.linspace(lo, hi, int(bin_count) + 1)
    inl, _ = np.histogram(ss.scores[~ss.is_outlier], bins=edges)
    outl, _ = np.histogram(ss.scores[ss.is_outlier], bins=edges)
    return ScoreDistribution(edges, inl, outl)


def acceptance_order(ss: SampleSet) -> np.ndarray:
    """Indices sorted by ascending (score, sample_id)."""
    by_id = np.argsort(ss.ids, kind="stable")
    return by_id[np.argsort(ss.scores[by_id], kind="stable")]


def risk_coverage_curve(samples: SampleInput) -> Curve:
    """Risk among the k lowest-score samples, for k = 1..N.

    An error is an incorrect inlier or any outlier. Raises
    :class:`MissingCorrectness` if some inlier has no correctness flag.
    """
    ss = as_sample_set(samples)
    if ss.correct is None:
        raise MissingCorrectness("risk-coverage needs prediction_correct on every inlier")
    order = acceptance_order(ss)
    errors = np.cumsum(~ss.correct[order], dtype=np.int64)
    k = np.arange(1, len(ss) + 1, dtype=np.int64)
    return Curve(CurveKind.RISK_COVERAGE, k / len(ss), errors / k, k)


def _check_kind(curve: Curve, kind: CurveKind) -> None:
    if curve.kind is not kind:
        raise ValueError(f"expected a {kind.value} curve, got {curve.kind.value}")
    if len(curve) == 0:
        raise ValueError("empty curve")


def auroc(curve: Curve) -> float:
    _check_kind(curve, CurveKind.ROC)
    return float(np.sum(np.diff(curve.x) * (curve.y[1:] + curve.y[:-1])) / 2.0)


def auprc(curve: Curve) -> float:
    """Average precision: sum of recall increments times precision, no interpolation."""
    _check_kind(curve, CurveKind.PR)
    return float(np.sum(np.diff(curve.x) * curve.y[1:]))


def tpr_at_fpr(curve: Curve, fpr_cap: float = 0.05) -> float:
    _check_kind(curve, CurveKind.ROC)
    return float(curve.y[curve.x <= fpr_cap].max())


def precision_at_recall(curve: Curve, recall_floor: float = 0.95) -> float:
    _check_kind(curve, CurveKind.PR)
    return float(curve.y[curve.x >= recall_floor].max())


def fnr_at_fpr(curve: Curve, fpr_floor: float = 0.95) -> float:
    """FNR at the smallest achievable FPR >= ``fpr_floor`` (best TPR among ties)."""
    _check_kind(curve, CurveKind.ROC)
    ok = curve.x >= fpr_floor
    fpr = curve.x[ok].min()
    return float(1.0 - curve.y[ok & (curve.x == fpr)].max())


def cbpl(curve: Curve, baseline_accuracy: float) -> float:
    """Largest coverage whose risk does not exceed the baseline error rate, else 0."""
    _check_kind(curve, CurveKind.RISK_COVERAGE)
    if not 0.0 <= baseline_accuracy <= 1.0:
        raise ValueError(f"baseline_accuracy must lie in [0, 1], got {baseline_accuracy!r}")
    ok = curve.y <= 1.0 - baseline_accuracy
    return float(curve.x[ok].max()) if ok.any() else 0.0


def cbfad(samples: SampleInput) -> float:
    """Fraction of samples scoring strictly below the lowest outlier score."""
    ss = as_sample_set(samples)
    floor = ss.scores[ss.is_outlier].min()
    return int(np.count_nonzero(ss.scores < floor)) / len(ss)


def evaluate_case(
    samples: SampleInput,
    baseline_accuracy: Optional[float] = None,
    *,
    case_name: str = "case",
    supervisor_name: str = "supervisor",
    bin_count: int = 50,
    model_id: Optional[str] = None,
) -> MetricsReport:
    """Compute every curve and all seven scalars for one case.

    Risk-family outputs (risk-coverage curve, CBPL) are ``None`` when
    correctness flags are missing; CBPL is also ``None`` without a baseline.
    """
    ss = as_sample_set(samples)
    if baseline_accuracy is not None and not 0.0 <= baseline_accuracy <= 1.0:
        raise ValueError(f"baseline_accuracy must lie in [0, 1], got {baseline_accuracy!r}")
    roc = roc_curve(ss)
    pr = pr_curve(ss)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateRange)
        dist = score_distribution(ss, bin_count)
    rc = risk_coverage_curve(ss) if ss.has_correctness else None
    return MetricsReport(
        case_name=case_name,
        supervisor_name=supervisor_name,
        auroc=auroc(roc),
        auprc=auprc(pr),
        tpr05=tpr_at_fpr(roc, 0.05),
        p95=precision_at_recall(pr, 0.95),
        fnr95=fnr_at_fpr(roc, 0.95),
        cbpl=cbpl(rc, baseline_accuracy) if rc is not None and baseline_accuracy is not None else None,
        cbfad=cbfad(ss),
        roc=roc,
        pr=pr,
        distribution=dist,
        n_inliers=ss.n_inliers,
        n_outliers=ss.n_outliers,
        risk_coverage=rc,
        risk_at_min_coverage=float(rc.y[0]) if rc is not None else None,
        baseline_accuracy=baseline_accuracy,
        model_id=model_id,
    )
