"""Brute-force reference implementations of every metric.

Deliberately slow and written against plain lists of ScoredSample so that
nothing is shared with :mod:`supervisor_eval.metrics`. Used by the test suite
only; not exported from the package namespace.
"""

from __future__ import annotations

from fractions import Fraction

from .core import EmptyClass, MissingCorrectness, OperatingPoint, ScoredSample


def _split(samples):
    inl = [s.anomaly_score for s in samples if not s.is_outlier]
    out = [s.anomaly_score for s in samples if s.is_outlier]
    if not inl or not out:
        raise EmptyClass("oracle needs at least one inlier and one outlier")
    return inl, out


def oracle_auroc(samples: list[ScoredSample]) -> float:
    """(wins + ties/2) / (n_in * n_out) over every inlier-outlier pair."""
    inl, out = _split(samples)
    wins = 0
    ties = 0
    for o in out:
        for i in inl:
            if o > i:
                wins += 1
            elif o == i:
                ties += 1
    return float(Fraction(2 * wins + ties, 2 * len(inl) * len(out)))


def oracle_operating_points(samples: list[ScoredSample]) -> list[OperatingPoint]:
    """Confusion matrix at +inf and at every distinct score, by full rescan."""
    _split(samples)
    thresholds = [float("inf")] + sorted({s.anomaly_score for s in samples}, reverse=True)
    points = []
    for tau in thresholds:
        tp = fp = tn = fn = 0
        for s in samples:
            flagged = s.anomaly_score >= tau
            if s.is_outlier:
                if flagged:
                    tp += 1
                else:
                    fn += 1
            elif flagged:
                fp += 1
            else:
                tn += 1
        points.append(OperatingPoint(tau, tp, fp, tn, fn))
    return points


def oracle_auprc(samples: list[ScoredSample]) -> float:
    # points come out with recall nondecreasing since thresholds descend
    pts = oracle_operating_points(samples)
    area = 0.0
    prev_recall = 0.0
    for p in pts:
        if p.recall > prev_recall:
            area += (p.recall - prev_recall) * p.precision
            prev_recall = p.recall
    return area


def oracle_tpr_at_fpr(samples, fpr_cap=0.05) -> float:
    return max(p.tpr for p in oracle_operating_points(samples) if p.fpr <= fpr_cap)


def oracle_precision_at_recall(samples, recall_floor=0.95) -> float:
    return max(p.precision for p in oracle_operating_points(samples) if p.recall >= recall_floor)


def oracle_fnr_at_fpr(samples, fpr_floor=0.95) -> float:
    best = None
    for p in oracle_operating_points(samples):
        if p.fpr < fpr_floor:
            continue
        if best is None or p.fpr < best.fpr or (p.fpr == best.fpr and p.tpr > best.tpr):
            best = p
    return best.fnr


def oracle_risk_coverage(samples: list[ScoredSample]) -> list[tuple[int, float, float]]:
    """(k, coverage, risk) for k = 1..N, re-counting each accepted prefix."""
    for s in samples:
        if not s.is_outlier and s.prediction_correct is None:
            raise MissingCorrectness(f"inlier {s.sample_id!r} has no correctness flag")
    n = len(samples)
    ranked = sorted(samples, key=lambda s: (s.anomaly_score, s.sample_id))
    rows = []
    for k in range(1, n + 1):
        accepted = ranked[:k]
        errors = sum(1 for s in accepted if s.is_outlier or not s.prediction_correct)
        rows.append((k, k / n, errors / k))
    return rows


def oracle_cbpl(samples, baseline_accuracy: float) -> float:
    best = 0.0
    for _, coverage, risk in oracle_risk_coverage(samples):
        if risk <= 1.0 - baseline_accuracy and coverage > best:
            best = coverage
    return best


def oracle_cbfad(samples: list[ScoredSample]) -> float:
    _, out = _split(samples)
    m = min(out)
    return sum(1 for s in samples if s.anomaly_score < m) / len(samples)
