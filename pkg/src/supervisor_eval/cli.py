"""Command-line front end.

Exit codes: 0 success, 2 invalid input (schema, parse, validation), 1 internal
error. Diagnostics go to stderr; the metric table rows go to stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core import EvaluationError
from .harness import build_rule, run_case
from .io import (
    MANIFEST_SCHEMA,
    CaseManifest,
    SchemaError,
    format_table,
    read_feature_csv,
    read_manifest,
    read_report,
    write_feature_csv,
    write_score_csv,
    write_table,
    validate_document,
)
from .supervisors import score_matrix
from .synth import GaussianCaseSpec, generate_gaussian_case

log = logging.getLogger("supervisor_eval")

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2
SCORE_RULES = ("softmax_max", "gaussian_nll", "knn", "linear_recon")


class UsageError(EvaluationError):
    pass


def _fail(exc: BaseException) -> int:
    if isinstance(exc, (EvaluationError, OSError)):
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return EXIT_INTERNAL


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "case"


def _evaluate_one(manifest: CaseManifest, out_dir: Path):
    report, _, notice = run_case(manifest, out_dir)
    return report, notice


def cmd_evaluate(args) -> int:
    manifests = [read_manifest(p) for p in args.manifest]
    if args.out is None and any(m.output_dir is None for m in manifests):
        raise UsageError("no output directory: pass --out or set output_dir in the manifest")
    if len(manifests) == 1:
        targets = [Path(args.out) if args.out else manifests[0].output_dir]
    elif args.out:
        targets = [Path(args.out) / f"{_slug(m.case_name)}__{_slug(m.supervisor_name)}" for m in manifests]
    else:
        targets = [m.output_dir for m in manifests]
    resolved = [t.resolve() for t in targets]
    if len(set(resolved)) != len(resolved):
        raise UsageError("two manifests would write to the same output directory")

    if args.parallel > 1 and len(manifests) > 1:
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            results = list(pool.map(_evaluate_one, manifests, targets))
    else:
        results = [_evaluate_one(m, t) for m, t in zip(manifests, targets)]

    for (report, notice), target in zip(results, targets):
        if notice:
            print(f"notice: {report.case_name}: {notice}", file=sys.stderr)
        log.info("wrote %s", target)
    reports = sorted((r for r, _ in results), key=lambda r: (r.case_name, r.supervisor_name))
    sys.stdout.write(format_table(reports))
    return EXIT_OK


def cmd_score(args) -> int:
    params = {k: v for k, v in (("k", args.k), ("m", args.m)) if v is not None}
    train = None
    if args.train:
        train, _ = read_feature_csv(args.train)
    elif args.rule != "softmax_max":
        raise UsageError(f"--train is required for rule {args.rule!r}")
    features, flags = read_feature_csv(args.features)
    rule = build_rule(args.rule, train, params)
    samples = score_matrix(rule, features, [False] * features.n_rows, flags)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_score_csv(samples, out, with_correctness=flags is not None)
    return EXIT_OK


def cmd_compare(args) -> int:
    reports = [read_report(p)[0] for p in args.reports]
    seen = {}
    for src, r in zip(args.reports, reports):
        key = (r.case_name, r.supervisor_name)
        if key in seen:
            raise UsageError(
                f"duplicate (supervisor, case) pair ({r.supervisor_name!r}, {r.case_name!r}) "
                f"in {seen[key]} and {src}"
            )
        seen[key] = src
    reports.sort(key=lambda r: (r.case_name, r.supervisor_name))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_table(reports, out)
    return EXIT_OK


SPEC_SCHEMA = {**MANIFEST_SCHEMA["$defs"]["gaussian_spec"], "$defs": MANIFEST_SCHEMA["$defs"]}


def cmd_gen_synthetic(args) -> int:
    path = Path(args.spec)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise SchemaError("spec file not found", "$", path) from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "$", path) from None
    validate_document(doc, SPEC_SCHEMA, path)
    spec = GaussianCaseSpec(**doc)
    case = generate_gaussian_case(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_csv(case.train, out / "train.csv")
    write_feature_csv(case.inliers, out / "inliers.csv", case.inlier_correct.tolist())
    write_feature_csv(case.outliers, out / "outliers.csv")
    rule = "coordinate" if spec.dim == 1 else "gaussian_nll"
    manifest = {
        "case_name": f"gaussian-d{spec.dim}-seed{spec.seed}",
        "supervisor_name": rule,
        "model_id": "synthetic-labels",
        "baseline_accuracy": float(case.inlier_correct.mean()),
        "output_dir": "report",
        "features": {"train": "train.csv", "inliers": "inliers.csv", "outliers": "outliers.csv", "rule": rule},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="supervisor-eval", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate one or more case manifests")
    ev.add_argument("--manifest", required=True, action="append", metavar="PATH")
    ev.add_argument("--out", metavar="DIR")
    ev.add_argument("--parallel", type=int, default=1, metavar="N")
    ev.set_defaults(func=cmd_evaluate)

    sc = sub.add_parser("score", help="apply a built-in supervisor to a feature CSV")
    sc.add_argument("--rule", required=True, choices=SCORE_RULES)
    sc.add_argument("--train", metavar="PATH")
    sc.add_argument("--features", required=True, metavar="PATH")
    sc.add_argument("--out", required=True, metavar="PATH")
    sc.add_argument("--k", type=int, help="neighbour rank for knn (default 1)")
    sc.add_argument("--m", type=int, help="number of components for linear_recon (default 1)")
    sc.set_defaults(func=cmd_score)

    cp = sub.add_parser("compare", help="merge reports into one comparison table")
    cp.add_argument("--reports", required=True, nargs="+", metavar="DIR")
    cp.add_argument("--out", required=True, metavar="PATH")
    cp.set_defaults(func=cmd_compare)

    gs = sub.add_parser("gen-synthetic", help="materialize a Gaussian case as CSVs plus a manifest")
    gs.add_argument("--spec", required=True, metavar="PATH")
    gs.add_argument("--out", required=True, metavar="DIR")
    gs.set_defaults(func=cmd_gen_synthetic)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "parallel", 1) < 1:
        print("error: --parallel must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except Exception as exc:  # every failure maps to a structured exit code
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
