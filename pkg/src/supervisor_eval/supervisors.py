"""Baseline supervisors: scoring rules that map feature rows to anomaly scores.

``softmax_max_score`` works on class-probability vectors. The fitted scorers
(diagonal Gaussian NLL, k-th nearest neighbour distance, linear reconstruction
error) are fitted on inlier training rows only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence, Union

import numpy as np

from .core import DuplicateId, EvaluationError, NonFiniteScore, ScoredSample

PROB_TOL = 1e-6
VARIANCE_FLOOR = 1e-9


class NotAProbability(EvaluationError):
    pass


class TooFewSamples(EvaluationError):
    pass


class KTooLarge(EvaluationError):
    pass


class DimensionMismatch(EvaluationError):
    pass


class LengthMismatch(EvaluationError):
    pass


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    row_ids: tuple[str, ...] = ()

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise EvaluationError(f"feature matrix must be a non-empty 2-D array, got shape {v.shape}")
        if not np.isfinite(v).all():
            r = int(np.argwhere(~np.isfinite(v))[0, 0])
            raise EvaluationError(f"non-finite feature value in row {r}")
        v.setflags(write=False)
        ids = tuple(self.row_ids) if len(self.row_ids) else tuple(f"r{i}" for i in range(v.shape[0]))
        if len(ids) != v.shape[0]:
            raise LengthMismatch(f"{len(ids)} row ids for {v.shape[0]} rows")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "row_ids", ids)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if not np.isfinite(z).all():
        raise EvaluationError("softmax needs finite logits")
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _check_probabilities(p: np.ndarray) -> None:
    if (p < 0).any():
        raise NotAProbability("probability vector has a negative entry")
    off = np.abs(p.sum(axis=-1) - 1.0)
    if (off > PROB_TOL).any():
        raise NotAProbability(f"probabilities sum off from 1 by {float(off.max()):.3g}")


def softmax_max_score(p) -> float:
    """``1 - max_i p_i`` for one probability vector."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise NotAProbability("expected a non-empty 1-D probability vector")
    _check_probabilities(p)
    return float(1.0 - p.max())


def softmax_max_scores(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    _check_probabilities(p)
    return 1.0 - p.max(axis=1)


class ScorerKind(str, enum.Enum):
    GAUSSIAN_NLL = "gaussian_nll"
    KNN_DIST = "knn"
    LINEAR_RECON = "linear_recon"


@dataclass(frozen=True, eq=False)
class FittedScorer:
    kind: ScorerKind
    params: Mapping[str, Any]
    notes: tuple[str, ...] = field(default=())

    @property
    def dim(self) -> int:
        return int(self.params["dim"])

    def score_rows(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.dim:
            raise DimensionMismatch(f"scorer fitted on {self.dim} features, got {x.shape[1]}")
        return _SCORERS[self.kind](self.params, x)

    def score(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionMismatch("score() takes a single feature row")
        return float(self.score_rows(x)[0])


def _as_matrix(train) -> np.ndarray:
    return train.values if isinstance(train, FeatureMatrix) else FeatureMatrix(train).values


def fit_gaussian_nll(train) -> FittedScorer:
    """Per-dimension Gaussian with population variance, floored at 1e-9."""
    x = _as_matrix(train)
    if x.shape[0] < 2:
        raise TooFewSamples("gaussian_nll needs at least 2 training rows")
    mean = x.mean(axis=0)
    var = x.var(axis=0)
    floored = var < VARIANCE_FLOOR
    var = np.where(floored, VARIANCE_FLOOR, var)
    notes = tuple(f"variance floored in dimension {d}" for d in np.flatnonzero(floored))
    return FittedScorer(ScorerKind.GAUSSIAN_NLL, {"dim": x.shape[1], "mean": mean, "var": var}, notes)


def gaussian_nll_score(scorer: FittedScorer, x) -> float:
    _require(scorer, ScorerKind.GAUSSIAN_NLL)
    return scorer.score(x)


def _gaussian_rows(params, x):
    mean, var = params["mean"], params["var"]
    return np.sum(0.5 * np.log(2.0 * math.pi * var) + (x - mean) ** 2 / (2.0 * var), axis=1)


def fit_knn(train, k: int = 1) -> FittedScorer:
    x = _as_matrix(train)
    if int(k) != k or k < 1:
        raise KTooLarge(f"k must be a positive integer, got {k!r}")
    if k > x.shape[0]:
        raise KTooLarge(f"k={k} exceeds the {x.shape[0]} training rows")
    return FittedScorer(ScorerKind.KNN_DIST, {"dim": x.shape[1], "train": x, "k": int(k)})


def knn_distance_score(scorer: FittedScorer, x) -> float:
    _require(scorer, ScorerKind.KNN_DIST)
    return scorer.score(x)


def _knn_rows(params, x, chunk=256):
    train, k = params["train"], params["k"]
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], chunk):
        q = x[start:start + chunk]
        d2 = ((q[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        out[start:start + chunk] = np.sqrt(np.partition(d2, k - 1, axis=1)[:, k - 1])
    return out


def fit_linear_recon(train, m: int = 1) -> FittedScorer:
    """Mean plus the top-``m`` principal directions of the centred training rows.

    Directions are sign-normalised so their first nonzero coordinate is
    positive. If the data has rank below ``m`` the surplus directions carry
    zero variance and are kept.
    """
    x = _as_matrix(train)
    n, d = x.shape
    if n < 2:
        raise TooFewSamples("linear_recon needs at least 2 training rows")
    if int(m) != m or not 1 <= m < d:
        raise DimensionMismatch(f"need 1 <= m < {d}, got m={m!r}")
    mean = x.mean(axis=0)
    _, sv, vt = np.linalg.svd(x - mean, full_matrices=True)
    comps = vt[: int(m)].copy()
    for row in comps:
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    explained = np.zeros(int(m))
    explained[: min(m, sv.size)] = sv[: min(m, sv.size)] ** 2 / n
    return FittedScorer(
        ScorerKind.LINEAR_RECON,
        {"dim": d, "mean": mean, "components": comps, "explained_variance": explained},
    )


def linear_recon_score(scorer: FittedScorer, x) -> float:
    _require(scorer, ScorerKind.LINEAR_RECON)
    return scorer.score(x)


def _recon_rows(params, x):
    c = x - params["mean"]
    proj = (c @ params["components"].T) @ params["components"]
    return ((c - proj) ** 2).sum(axis=1)


_SCORERS: dict[ScorerKind, Callable[[Mapping[str, Any], np.ndarray], np.ndarray]] = {
    ScorerKind.GAUSSIAN_NLL: _gaussian_rows,
    ScorerKind.KNN_DIST: _knn_rows,
    ScorerKind.LINEAR_RECON: _recon_rows,
}


def _require(scorer: FittedScorer, kind: ScorerKind) -> None:
    if scorer.kind is not kind:
        raise ValueError(f"expected a {kind.value} scorer, got {scorer.kind.value}")


def coordinate_scores(values: np.ndarray) -> np.ndarray:
    """Use the first feature as the score (for 1-D calibration cases)."""
    return np.asarray(values, dtype=np.float64)[:, 0].copy()


Rule = Union[str, FittedScorer, Callable[[np.ndarray], np.ndarray]]


def apply_rule(rule: Rule, features: FeatureMatrix) -> np.ndarray:
    """Score every row of ``features``. ``rule`` is a fitted scorer, a callable
    over the value matrix, or one of ``"softmax_max"`` / ``"coordinate"``."""
    if isinstance(rule, FittedScorer):
        return rule.score_rows(features.values)
    if rule == "softmax_max":
        return softmax_max_scores(features.values)
    if rule == "coordinate":
        return coordinate_scores(features.values)
    if callable(rule):
        return np.asarray(rule(features.values), dtype=np.float64)
    raise ValueError(f"unknown scoring rule {rule!r}")


def score_matrix(
    rule: Rule,
    features: FeatureMatrix,
    labels: Sequence[bool],
    correctness: Optional[Sequence[Optional[bool]]] = None,
) -> list[ScoredSample]:
    """Score each row and pair it with its outlier label and correctness flag."""
    n = features.n_rows
    if len(labels) != n:
        raise LengthMismatch(f"{len(labels)} labels for {n} feature rows")
    if correctness is not None and len(correctness) != n:
        raise LengthMismatch(f"{len(correctness)} correctness flags for {n} feature rows")
    scores = apply_rule(rule, features)
    out = []
    for i in range(n):
        flag = None if correctness is None or correctness[i] is None else bool(correctness[i])
        out.append(ScoredSample(features.row_ids[i], float(scores[i]), bool(labels[i]), flag))
    if not np.isfinite(scores).all():
        bad = features.row_ids[int(np.flatnonzero(~np.isfinite(scores))[0])]
        raise NonFiniteScore(f"rule produced a non-finite score for row {bad!r}")
    if len(set(features.row_ids)) != n:
        raise DuplicateId("feature rows carry duplicate sample ids")
    return out
