"""Turn a case manifest into a sample set, a report, and files on disk."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from .core import EvaluationError, MetricsReport, SampleSet, validate_samples
from .io import (
    CaseManifest,
    input_timestamp,
    read_feature_csv,
    read_score_csv,
    write_report,
)
from .metrics import evaluate_case
from .plots import emit_plots
from .supervisors import (
    FeatureMatrix,
    fit_gaussian_nll,
    fit_knn,
    fit_linear_recon,
    score_matrix,
)
from .synth import generate_gaussian_case

FITTED_RULES = {
    "gaussian_nll": lambda train, params: fit_gaussian_nll(train),
    "knn": lambda train, params: fit_knn(train, params.get("k", 1)),
    "linear_recon": lambda train, params: fit_linear_recon(train, params.get("m", 1)),
}


def build_rule(rule: str, train: Optional[FeatureMatrix], params: Optional[dict] = None):
    """Resolve a rule name to something :func:`score_matrix` accepts."""
    params = params or {}
    if rule in FITTED_RULES:
        if train is None:
            raise EvaluationError(f"rule {rule!r} needs training features")
        return FITTED_RULES[rule](train, params)
    if rule in ("softmax_max", "coordinate"):
        return rule
    raise EvaluationError(f"unknown scoring rule {rule!r}")


def _score_pair(rule, inliers: FeatureMatrix, outliers: FeatureMatrix, inlier_flags) -> list:
    samples = score_matrix(rule, inliers, [False] * inliers.n_rows, inlier_flags)
    samples += score_matrix(rule, outliers, [True] * outliers.n_rows, None)
    return samples


def load_samples(manifest: CaseManifest) -> SampleSet:
    kind, inp = manifest.input_kind, manifest.inputs
    if kind == "score_files":
        samples = read_score_csv(manifest.resolve(inp["inliers"]), False)
        samples += read_score_csv(manifest.resolve(inp["outliers"]), True)
        return validate_samples(samples)
    params = inp.get("params", {})
    if kind == "features":
        train = None
        if "train" in inp:
            train, _ = read_feature_csv(manifest.resolve(inp["train"]))
        inliers, flags = read_feature_csv(manifest.resolve(inp["inliers"]))
        outliers, _ = read_feature_csv(manifest.resolve(inp["outliers"]))
        rule = build_rule(inp["rule"], train, params)
        return validate_samples(_score_pair(rule, inliers, outliers, flags))
    case = generate_gaussian_case(manifest.gaussian_spec)
    rule = build_rule(inp.get("rule", "coordinate"), case.train, params)
    flags = [bool(c) for c in case.inlier_correct]
    return validate_samples(_score_pair(rule, case.inliers, case.outliers, flags))


def evaluate_manifest(manifest: CaseManifest) -> MetricsReport:
    samples = load_samples(manifest)
    return evaluate_case(
        samples,
        manifest.baseline_accuracy,
        case_name=manifest.case_name,
        supervisor_name=manifest.supervisor_name,
        bin_count=manifest.bin_count,
        model_id=manifest.model_id,
    )


def run_case(manifest: CaseManifest, out_dir) -> tuple[MetricsReport, list[Path], Optional[str]]:
    """Evaluate one manifest and write report, table and plots into ``out_dir``.

    Nothing is written unless the evaluation itself succeeds.
    """
    report = evaluate_manifest(manifest)
    stamp_inputs = ([manifest.source] if manifest.source else []) + manifest.input_paths()
    path = write_report(report, out_dir, manifest.sha256, input_timestamp(stamp_inputs))
    plots, notice = emit_plots(report, out_dir)
    return report, [path] + plots, notice
