"""Empirical vs analytic AUROC for 1-D Gaussian cases over a range of mean gaps.

    python scripts/calibration_sweep.py --n 20000 --seed 0
"""

import argparse

import numpy as np

from supervisor_eval.metrics import auroc, roc_curve
from supervisor_eval.supervisors import score_matrix
from supervisor_eval.synth import GaussianCaseSpec, analytic_auroc_1d, generate_gaussian_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="samples per class")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sigma", type=float, default=1.0)
    args = ap.parse_args()

    print(f"{'delta_mu':>8} {'analytic':>9} {'empirical':>9} {'abs err':>8}")
    for delta in np.linspace(0.0, 4.0, 9):
        spec = GaussianCaseSpec(dim=1, inlier_mean=0.0, outlier_mean=float(delta), inlier_sigma=args.sigma,
                                outlier_sigma=args.sigma, n_inliers=args.n, n_outliers=args.n, seed=args.seed)
        case = generate_gaussian_case(spec)
        emp = auroc(roc_curve(score_matrix("coordinate", case.test, case.labels)))
        ana = analytic_auroc_1d(float(delta), args.sigma)
        print(f"{delta:8.2f} {ana:9.4f} {emp:9.4f} {abs(emp - ana):8.4f}")


if __name__ == "__main__":
    main()
