"""Shared sample builders for the test suite."""

import numpy as np

from supervisor_eval.core import ScoredSample


def make_samples(inliers, outliers, inlier_flags=None):
    out = []
    for i, s in enumerate(inliers):
        flag = None if inlier_flags is None else inlier_flags[i]
        out.append(ScoredSample(f"in{i:04d}", float(s), False, flag))
    for i, s in enumerate(outliers):
        out.append(ScoredSample(f"out{i:04d}", float(s), True, None))
    return out


WORKED5 = make_samples([0.1, 0.2, 0.3], [0.25, 0.4])
WORKED6 = make_samples([0.1, 0.2, 0.3, 0.35], [0.32, 0.5], [True, True, False, True])


def random_instance(rng: np.random.Generator, *, ties: bool, flags: bool, eps: float = 0.1, max_n: int = 500):
    """Random labelled set with at least one sample per class.

    Tie-heavy sets draw scores from a small integer grid; ids are shuffled so
    acceptance order does not follow label order.
    """
    n = int(rng.integers(2, max_n + 1))
    n_out = int(rng.integers(1, n))
    labels = np.zeros(n, bool)
    labels[rng.choice(n, n_out, replace=False)] = True
    if ties:
        scores = rng.integers(0, int(rng.integers(2, 12)), size=n) / 4.0
    else:
        scores = rng.normal(size=n) + 1.5 * labels
    correct = rng.random(n) >= eps
    ids = [f"s{j:05d}" for j in rng.permutation(n)]
    return [
        ScoredSample(ids[j], float(scores[j]), bool(labels[j]), (bool(correct[j]) if flags and not labels[j] else None))
        for j in range(n)
    ]
