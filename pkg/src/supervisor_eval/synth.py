"""Seeded Gaussian inlier/outlier cases with known separability.

Random draws use numpy's PCG64 bit generator, seeded explicitly, so a spec and
seed reproduce the same case on every platform.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import norm

from .core import EvaluationError
from .supervisors import FeatureMatrix

Loc = Union[float, Sequence[float]]


@dataclass(frozen=True)
class GaussianCaseSpec:
    dim: int = 1
    inlier_mean: Loc = 0.0
    inlier_sigma: float = 1.0
    outlier_mean: Loc = 2.0
    outlier_sigma: float = 1.0
    n_inliers: int = 1000
    n_outliers: int = 1000
    inlier_error_rate: float = 0.0
    seed: int = 0
    n_train: Optional[int] = None

    def __post_init__(self):
        if self.dim < 1:
            raise EvaluationError(f"dim must be >= 1, got {self.dim}")
        if not (self.inlier_sigma > 0 and self.outlier_sigma > 0):
            raise EvaluationError("inlier_sigma and outlier_sigma must be > 0")
        if self.n_inliers < 1 or self.n_outliers < 1:
            raise EvaluationError("n_inliers and n_outliers must be >= 1")
        if self.n_train is not None and self.n_train < 1:
            raise EvaluationError("n_train must be >= 1")
        if not 0.0 <= self.inlier_error_rate <= 1.0:
            raise EvaluationError("inlier_error_rate must lie in [0, 1]")
        for name in ("inlier_mean", "outlier_mean"):
            loc = getattr(self, name)
            if not np.isscalar(loc):
                loc = tuple(float(v) for v in loc)
                if len(loc) != self.dim:
                    raise EvaluationError(f"{name} has {len(loc)} entries for dim={self.dim}")
                object.__setattr__(self, name, loc)

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("inlier_mean", "outlier_mean"):
            if isinstance(d[name], tuple):
                d[name] = list(d[name])
        return d


@dataclass(frozen=True, eq=False)
class GaussianCase:
    train: FeatureMatrix
    inliers: FeatureMatrix
    outliers: FeatureMatrix
    inlier_correct: np.ndarray = field(repr=False)

    @property
    def test(self) -> FeatureMatrix:
        return FeatureMatrix(
            np.vstack([self.inliers.values, self.outliers.values]),
            self.inliers.row_ids + self.outliers.row_ids,
        )

    @property
    def labels(self) -> np.ndarray:
        return np.r_[np.zeros(self.inliers.n_rows, bool), np.ones(self.outliers.n_rows, bool)]

    @property
    def correctness(self) -> list[Optional[bool]]:
        return [bool(c) for c in self.inlier_correct] + [None] * self.outliers.n_rows


def _ids(prefix: str, n: int) -> tuple[str, ...]:
    width = len(str(max(n - 1, 0)))
    return tuple(f"{prefix}{i:0{width}d}" for i in range(n))


def generate_gaussian_case(spec: GaussianCaseSpec) -> GaussianCase:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    mu_in = np.broadcast_to(np.asarray(spec.inlier_mean, dtype=float), (spec.dim,))
    mu_out = np.broadcast_to(np.asarray(spec.outlier_mean, dtype=float), (spec.dim,))
    n_train = spec.n_train if spec.n_train is not None else spec.n_inliers
    train = rng.normal(mu_in, spec.inlier_sigma, size=(n_train, spec.dim))
    inl = rng.normal(mu_in, spec.inlier_sigma, size=(spec.n_inliers, spec.dim))
    out = rng.normal(mu_out, spec.outlier_sigma, size=(spec.n_outliers, spec.dim))
    correct = rng.random(spec.n_inliers) >= spec.inlier_error_rate
    return GaussianCase(
        FeatureMatrix(train, _ids("train", n_train)),
        FeatureMatrix(inl, _ids("in", spec.n_inliers)),
        FeatureMatrix(out, _ids("out", spec.n_outliers)),
        correct,
    )


def analytic_auroc_1d(delta_mu: float, sigma: float) -> float:
    """Population AUROC of two equal-variance 1-D Gaussians scored by value."""
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma!r}")
    return float(norm.cdf(delta_mu / (sigma * math.sqrt(2.0))))
