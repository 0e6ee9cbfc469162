"""Sample model, label conventions and curve containers.

Outliers are the positive class everywhere: a sample is flagged at threshold
``tau`` iff ``anomaly_score >= tau``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class EvaluationError(ValueError):
    """Base class for input problems that make an evaluation undefined."""


class EmptyClass(EvaluationError):
    pass


class NonFiniteScore(EvaluationError):
    pass


class DuplicateId(EvaluationError):
    pass


class MissingCorrectness(EvaluationError):
    pass


class DegenerateRange(UserWarning):
    """All pooled scores are equal; the distribution collapses to one bin."""


@dataclass(frozen=True)
class ScoredSample:
    sample_id: str
    anomaly_score: float
    is_outlier: bool
    prediction_correct: Optional[bool] = None

    @property
    def effective_correct(self) -> Optional[bool]:
        # an outlier's prediction is always an error
        if self.is_outlier:
            return False
        return self.prediction_correct


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Validated, column-oriented sample set.

    ``correct`` is ``None`` when any inlier lacks a correctness flag; otherwise
    it holds the effective correctness (outliers always ``False``).
    """

    ids: np.ndarray
    scores: np.ndarray
    is_outlier: np.ndarray
    correct: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "ids", _frozen(np.asarray(self.ids, dtype=str)))
        object.__setattr__(self, "scores", _frozen(np.asarray(self.scores, dtype=np.float64)))
        object.__setattr__(self, "is_outlier", _frozen(np.asarray(self.is_outlier, dtype=bool)))
        if self.correct is not None:
            c = np.asarray(self.correct, dtype=bool) & ~self.is_outlier
            object.__setattr__(self, "correct", _frozen(c))

    def __len__(self) -> int:
        return int(self.scores.shape[0])

    @property
    def n_outliers(self) -> int:
        return int(np.count_nonzero(self.is_outlier))

    @property
    def n_inliers(self) -> int:
        return len(self) - self.n_outliers

    @property
    def has_correctness(self) -> bool:
        return self.correct is not None

    def samples(self) -> list[ScoredSample]:
        correct = self.correct
        out = []
        for i in range(len(self)):
            flag = None if correct is None or self.is_outlier[i] else bool(correct[i])
            out.append(ScoredSample(str(self.ids[i]), float(self.scores[i]), bool(self.is_outlier[i]), flag))
        return out

    @classmethod
    def from_arrays(cls, ids, scores, is_outlier, correct=None) -> "SampleSet":
        """Build and validate a set from parallel columns.

        ``correct`` may be a boolean array, or an object array holding ``None``
        for unknown flags.
        """
        ids = np.asarray(ids, dtype=str)
        scores = np.asarray(scores, dtype=np.float64)
        is_outlier = np.asarray(is_outlier, dtype=bool)
        if not (ids.shape == scores.shape == is_outlier.shape) or scores.ndim != 1:
            raise EvaluationError("ids, scores and labels must be 1-D columns of equal length")
        if correct is not None:
            correct = np.asarray(correct)
            if correct.shape != scores.shape:
                raise EvaluationError("correctness column length does not match scores")
            if correct.dtype == object:
                known = np.array([c is not None for c in correct], dtype=bool)
                if np.all(known[~is_outlier]):
                    correct = np.array([bool(c) if c is not None else False for c in correct])
                else:
                    correct = None
            else:
                correct = correct.astype(bool)
        _check_columns(ids, scores, is_outlier)
        return cls(ids, scores, is_outlier, correct)


def _check_columns(ids: np.ndarray, scores: np.ndarray, is_outlier: np.ndarray) -> None:
    bad = ~np.isfinite(scores)
    if bad.any():
        names = ", ".join(repr(str(s)) for s in ids[bad][:5])
        raise NonFiniteScore(f"non-finite anomaly score for sample(s) {names}")
    n_out = int(np.count_nonzero(is_outlier))
    if n_out == 0:
        raise EmptyClass("no outlier samples: TPR and precision are undefined")
    if n_out == len(scores):
        raise EmptyClass("no inlier samples: FPR is undefined")
    uniq, counts = np.unique(ids, return_counts=True)
    if uniq.shape[0] != ids.shape[0]:
        dups = ", ".join(repr(str(s)) for s in uniq[counts > 1][:5])
        raise DuplicateId(f"duplicate sample_id {dups}")


def validate_samples(samples: Iterable[ScoredSample]) -> SampleSet:
    """Check a list of samples and pack it into a :class:`SampleSet`.

    Raises NonFiniteScore, EmptyClass or DuplicateId. The correctness column is
    kept only when every inlier carries a flag.
    """
    samples = list(samples)
    for s in samples:
        if not math.isfinite(s.anomaly_score):
            raise NonFiniteScore(f"non-finite anomaly score for sample {s.sample_id!r}")
    ids = np.array([s.sample_id for s in samples], dtype=str)
    scores = np.array([s.anomaly_score for s in samples], dtype=np.float64)
    is_outlier = np.array([s.is_outlier for s in samples], dtype=bool)
    if all(s.is_outlier or s.prediction_correct is not None for s in samples):
        correct = np.array([bool(s.prediction_correct) and not s.is_outlier for s in samples], dtype=bool)
    else:
        correct = None
    _check_columns(ids, scores, is_outlier)
    return SampleSet(ids, scores, is_outlier, correct)


@dataclass(frozen=True)
class OperatingPoint:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def tpr(self) -> float:
        return self.tp / (self.tp + self.fn)

    @property
    def fpr(self) -> float:
        return self.fp / (self.fp + self.tn)

    @property
    def fnr(self) -> float:
        return self.fn / (self.tp + self.fn)

    @property
    def recall(self) -> float:
        return self.tpr

    @property
    def precision(self) -> float:
        flagged = self.tp + self.fp
        return 1.0 if flagged == 0 else self.tp / flagged


class CurveKind(str, enum.Enum):
    ROC = "ROC"
    PR = "PR"
    RISK_COVERAGE = "RISK_COVERAGE"


@dataclass(frozen=True, eq=False)
class Curve:
    """Ordered ``(x, y, t)`` triples.

    ``t`` is the threshold for ROC/PR (``+inf`` for the nothing-flagged point)
    and the accepted count ``k`` for risk-coverage.
    """

    kind: CurveKind
    x: np.ndarray
    y: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kind", CurveKind(self.kind))
        for name in ("x", "y", "t"):
            object.__setattr__(self, name, _frozen(np.asarray(getattr(self, name), dtype=np.float64)))
        if not (self.x.shape == self.y.shape == self.t.shape) or self.x.ndim != 1:
            raise ValueError("curve coordinates must be 1-D arrays of equal length")

    def __len__(self) -> int:
        return int(self.x.shape[0])

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return (
            self.kind == other.kind
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t)
        )

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist(), self.t.tolist()))


@dataclass(frozen=True, eq=False)
class ScoreDistribution:
    bin_edges: np.ndarray
    inlier_counts: np.ndarray
    outlier_counts: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bin_edges", _frozen(np.asarray(self.bin_edges, dtype=np.float64)))
        object.__setattr__(self, "inlier_counts", _frozen(np.asarray(self.inlier_counts, dtype=np.int64)))
        object.__setattr__(self, "outlier_counts", _frozen(np.asarray(self.outlier_counts, dtype=np.int64)))

    @property
    def bin_count(self) -> int:
        return int(self.inlier_counts.shape[0])

    def __eq__(self, other):
        if not isinstance(other, ScoreDistribution):
            return NotImplemented
        return (
            self.degenerate == other.degenerate
            and np.array_equal(self.bin_edges, other.bin_edges)
            and np.array_equal(self.inlier_counts, other.inlier_counts)
            and np.array_equal(self.outlier_counts, other.outlier_counts)
        )


METRIC_COLUMNS: tuple[str, ...] = ("AUROC", "AUPRC", "TPR05", "P95", "FNR95", "CBPL", "CBFAD")


@dataclass(frozen=True)
class MetricsReport:
    """One evaluated (supervisor, case) pair: the seven scalars plus curves."""

    case_name: str
    supervisor_name: str
    auroc: float
    auprc: float
    tpr05: float
    p95: float
    fnr95: float
    cbpl: Optional[float]
    cbfad: float
    roc: Curve
    pr: Curve
    distribution: ScoreDistribution
    n_inliers: int
    n_outliers: int
    risk_coverage: Optional[Curve] = None
    risk_at_min_coverage: Optional[float] = None
    baseline_accuracy: Optional[float] = None
    model_id: Optional[str] = None

    def scalars(self) -> dict[str, Optional[float]]:
        return dict(
            zip(METRIC_COLUMNS, (self.auroc, self.auprc, self.tpr05, self.p95, self.fnr95, self.cbpl, self.cbfad))
        )

    @property
    def sample_counts(self) -> tuple[int, int]:
        return self.n_inliers, self.n_outliers


def as_sample_set(samples: "SampleSet | Sequence[ScoredSample]") -> SampleSet:
    if isinstance(samples, SampleSet):
        return samples
    return validate_samples(samples)
