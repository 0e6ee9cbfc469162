"""Time ingestion and evaluation of one million scored samples.

Writes two score CSVs, then measures CSV parsing and the curve/metric
computation separately.

    python scripts/bench_million.py --n 1000000 --workdir /tmp/bench
"""

import argparse
import resource
import time
from pathlib import Path

import numpy as np

from supervisor_eval.core import validate_samples
from supervisor_eval.io import read_score_csv
from supervisor_eval.metrics import evaluate_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--workdir", type=Path, default=Path("/tmp/supervisor-eval-bench"))
    args = ap.parse_args()
    args.workdir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(0)
    n_out = args.n // 4
    n_in = args.n - n_out
    for name, n, loc in (("inliers", n_in, 0.0), ("outliers", n_out, 1.0)):
        scores = rng.normal(loc, 1.0, n)
        flags = rng.random(n) > 0.1
        with (args.workdir / f"{name}.csv").open("w") as fh:
            fh.write("sample_id,anomaly_score,prediction_correct\n")
            fh.writelines(f"{name[0]}{i},{s!r},{'true' if f else 'false'}\n" for i, (s, f) in enumerate(zip(scores.tolist(), flags)))

    t0 = time.perf_counter()
    samples = read_score_csv(args.workdir / "inliers.csv", False)
    samples += read_score_csv(args.workdir / "outliers.csv", True)
    ss = validate_samples(samples)
    t1 = time.perf_counter()
    report = evaluate_case(ss, 0.9)
    t2 = time.perf_counter()
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    print(f"samples            {len(ss):,}")
    print(f"ingest + validate  {t1 - t0:.2f} s")
    print(f"curves + metrics   {t2 - t1:.2f} s")
    print(f"peak RSS           {rss:.0f} MiB")
    print({k: round(v, 4) if v is not None else None for k, v in report.scalars().items()})


if __name__ == "__main__":
    main()
