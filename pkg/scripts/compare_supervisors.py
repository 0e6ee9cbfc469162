"""Evaluate every built-in supervisor on one synthetic case and print a comparison table.

The softmax rule needs class probabilities, so a toy linear classifier turns
the features into logits; its accuracy on the inlier test rows becomes the
baseline for CBPL. The density-style scorers have no classifier attached and
are reported without a baseline, which makes their CBPL N/A.

    python scripts/compare_supervisors.py --out runs/compare
"""

import argparse
from pathlib import Path

import numpy as np

from supervisor_eval.io import format_table, write_report
from supervisor_eval.metrics import evaluate_case
from supervisor_eval.plots import emit_plots
from supervisor_eval.supervisors import (
    FeatureMatrix,
    fit_gaussian_nll,
    fit_knn,
    fit_linear_recon,
    score_matrix,
    softmax,
)
from supervisor_eval.synth import GaussianCaseSpec, generate_gaussian_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("runs/compare"))
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = GaussianCaseSpec(dim=args.dim, inlier_mean=0.0, outlier_mean=0.8, outlier_sigma=1.5,
                            n_inliers=2000, n_outliers=1000, n_train=4000, seed=args.seed)
    case = generate_gaussian_case(spec)
    rng = np.random.default_rng(args.seed + 1)
    # toy 4-class "model": fixed random projection plus a sharpening factor
    w = rng.normal(size=(args.dim, 4)) * 2.0
    true_class = (case.inliers.values @ w).argmax(1)
    noisy = case.inliers.values + rng.normal(0, 0.5, size=case.inliers.values.shape)
    correct = (noisy @ w).argmax(1) == true_class
    probs = FeatureMatrix(softmax(case.test.values @ w), case.test.row_ids)
    flags = correct.tolist() + [None] * case.outliers.n_rows

    rules = {
        "softmax_max": ("softmax_max", probs, float(correct.mean())),
        "gaussian_nll": (fit_gaussian_nll(case.train), case.test, None),
        "knn_k5": (fit_knn(case.train, 5), case.test, None),
        "linear_recon_m2": (fit_linear_recon(case.train, 2), case.test, None),
    }
    reports = []
    for name, (rule, feats, baseline) in rules.items():
        samples = score_matrix(rule, feats, case.labels, flags if baseline is not None else None)
        r = evaluate_case(samples, baseline, case_name=f"gauss-d{args.dim}", supervisor_name=name)
        write_report(r, args.out / name)
        emit_plots(r, args.out / name)
        reports.append(r)
    print(format_table(reports), end="")


if __name__ == "__main__":
    main()
