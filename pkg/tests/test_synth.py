import math

import numpy as np
import pytest

from supervisor_eval.core import EvaluationError
from supervisor_eval.metrics import auroc, roc_curve
from supervisor_eval.supervisors import score_matrix
from supervisor_eval.synth import GaussianCaseSpec, analytic_auroc_1d, generate_gaussian_case


def test_same_seed_is_bytewise_identical():
    spec = GaussianCaseSpec(dim=3, n_inliers=50, n_outliers=20, inlier_error_rate=0.3, seed=11)
    a, b = generate_gaussian_case(spec), generate_gaussian_case(spec)
    for fa, fb in ((a.train, b.train), (a.inliers, b.inliers), (a.outliers, b.outliers)):
        assert fa.values.tobytes() == fb.values.tobytes() and fa.row_ids == fb.row_ids
    assert a.inlier_correct.tobytes() == b.inlier_correct.tobytes()


def test_different_seed_differs():
    a = generate_gaussian_case(GaussianCaseSpec(seed=1, n_inliers=10, n_outliers=10))
    b = generate_gaussian_case(GaussianCaseSpec(seed=2, n_inliers=10, n_outliers=10))
    assert a.inliers.values.tobytes() != b.inliers.values.tobytes()


def test_counts_and_error_rate():
    case = generate_gaussian_case(GaussianCaseSpec(n_inliers=7, n_outliers=5, n_train=3))
    assert case.outliers.n_rows == 5 and case.inliers.n_rows == 7 and case.train.n_rows == 3
    assert case.inlier_correct.all()
    assert case.labels.sum() == 5 and len(case.correctness) == 12
    bad = generate_gaussian_case(GaussianCaseSpec(inlier_error_rate=1.0, n_inliers=20, n_outliers=1))
    assert not bad.inlier_correct.any()


@pytest.mark.parametrize(
    "kwargs",
    [{"inlier_sigma": 0}, {"outlier_sigma": -1}, {"n_outliers": 0}, {"inlier_error_rate": 1.5},
     {"dim": 2, "inlier_mean": [0, 1, 2]}],
)
def test_invalid_spec(kwargs):
    with pytest.raises(EvaluationError):
        GaussianCaseSpec(**kwargs)


def test_vector_means():
    case = generate_gaussian_case(
        GaussianCaseSpec(dim=2, inlier_mean=[0, 100], outlier_mean=[50, 0], n_inliers=200, n_outliers=200)
    )
    assert case.inliers.values.mean(0) == pytest.approx([0, 100], abs=0.5)
    assert case.outliers.values.mean(0) == pytest.approx([50, 0], abs=0.5)


def test_analytic_auroc_values():
    assert analytic_auroc_1d(0, 1) == 0.5
    assert analytic_auroc_1d(40, 1) == pytest.approx(1.0, abs=1e-12)
    # Phi(sqrt 2) through the error function, independent of scipy
    assert analytic_auroc_1d(2, 1) == pytest.approx(0.5 * (1 + math.erf(1.0)), abs=1e-12)
    assert analytic_auroc_1d(2, 1) == pytest.approx(0.9214, abs=5e-5)
    with pytest.raises(ValueError):
        analytic_auroc_1d(1, 0)


def test_empirical_auroc_converges():
    spec = GaussianCaseSpec(dim=1, inlier_mean=0, outlier_mean=2, n_inliers=20_000, n_outliers=20_000, seed=7)
    case = generate_gaussian_case(spec)
    samples = score_matrix("coordinate", case.test, case.labels)
    assert abs(auroc(roc_curve(samples)) - analytic_auroc_1d(2, 1)) <= 0.01
