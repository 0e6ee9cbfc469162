"""Evaluation metrics and harness for out-of-distribution supervisors."""

__version__ = "0.1.0"

from .core import (
    Curve,
    CurveKind,
    DegenerateRange,
    DuplicateId,
    EmptyClass,
    EvaluationError,
    MetricsReport,
    MissingCorrectness,
    NonFiniteScore,
    OperatingPoint,
    SampleSet,
    ScoreDistribution,
    ScoredSample,
    validate_samples,
)
from .metrics import (
    auprc,
    auroc,
    cbfad,
    cbpl,
    evaluate_case,
    fnr_at_fpr,
    pr_curve,
    precision_at_recall,
    risk_coverage_curve,
    roc_curve,
    score_distribution,
    tpr_at_fpr,
)
from .supervisors import (
    FeatureMatrix,
    FittedScorer,
    fit_gaussian_nll,
    fit_knn,
    fit_linear_recon,
    gaussian_nll_score,
    knn_distance_score,
    linear_recon_score,
    score_matrix,
    softmax,
    softmax_max_score,
)
from .synth import GaussianCaseSpec, analytic_auroc_1d, generate_gaussian_case
