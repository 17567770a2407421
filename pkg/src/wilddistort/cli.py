"""Command-line entry points: distort, evaluate, fuse, replay, severity-table.

Exit codes: 0 success, 1 configuration/usage error, 2 partial failure
(some records failed; details are in the manifest / printed diff).

Seeds default to a fixed constant so unseeded runs are reproducible;
pass ``--seed random`` to opt out.  The env var ``WILDDISTORT_CONFIG``
supplies a default severity-config path.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

from .errors import WildDistortError
from .fusion_io import fuse_scores_file
from .image import png_bytes
from .metrics import evaluate, read_predictions_csv
from .pipeline import (
    BUILTIN_SCHEMES,
    get_scheme,
    read_manifest,
    replay,
    run_batch,
)
from .severity import SeverityTable, load_severity_config

DEFAULT_SEED = 1789
CONFIG_ENV_VAR = "WILDDISTORT_CONFIG"


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_seed(value: str) -> int:
    if value == "random":
        return secrets.randbits(63)
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"seed must be an integer or 'random', got {value!r}"
        ) from None


def _severity_table(args) -> SeverityTable:
    path = getattr(args, "severity_config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        return load_severity_config(path)
    return SeverityTable.default()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wilddistort", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distort", help="distort a dataset listing and write a manifest")
    p.add_argument("--input", required=True, help="listing CSV (image_id,path,label)")
    p.add_argument("--output-dir", required=True, help="directory for images + manifest")
    p.add_argument("--scheme", default="challenge",
                   help=f"sampling scheme ({', '.join(sorted(BUILTIN_SCHEMES))})")
    p.add_argument("--robust-fraction", type=float, default=0.5,
                   help="fraction of images assigned to the robust track")
    p.add_argument("--seed", type=_parse_seed, default=DEFAULT_SEED,
                   help="global seed (integer or 'random')")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--severity-config", help="JSON severity-table override")
    p.set_defaults(func=cmd_distort)

    p = sub.add_parser("evaluate", help="score predictions against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictions", required=True, help="CSV (image_id,score)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("fuse", help="fuse a multi-model scores CSV into one score column")
    p.add_argument("--scores", required=True, help="CSV (image_id,<model columns>)")
    p.add_argument("--scheme-config", required=True, help="fusion scheme JSON")
    p.add_argument("--output", required=True, help="output CSV (image_id,score)")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("replay", help="re-run manifest plans and verify outputs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--image-id", help="replay a single record")
    p.add_argument("--severity-config", help="JSON severity-table override")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("severity-table", help="show or validate severity tables")
    table_sub = p.add_subparsers(dest="table_command", required=True)
    q = table_sub.add_parser("show", help="print the effective severity table")
    q.add_argument("--severity-config", help="JSON severity-table override")
    q.add_argument("--kind", help="limit output to one distortion kind")
    q.set_defaults(func=cmd_table_show)
    q = table_sub.add_parser("validate", help="validate a severity config file")
    q.add_argument("--severity-config", required=True)
    q.set_defaults(func=cmd_table_validate)

    return parser


def cmd_distort(args) -> int:
    table = _severity_table(args)
    scheme = get_scheme(args.scheme)
    result = run_batch(
        args.input,
        args.output_dir,
        scheme=scheme,
        robust_fraction=args.robust_fraction,
        global_seed=args.seed,
        parallelism=args.jobs,
        table=table,
    )
    config_echo = {
        "command": "distort",
        "input": str(args.input),
        "output_dir": str(args.output_dir),
        "scheme": scheme.name,
        "robust_fraction": args.robust_fraction,
        "seed": args.seed,
        "jobs": args.jobs,
        "severity_config": getattr(args, "severity_config", None)
        or os.environ.get(CONFIG_ENV_VAR),
        "severity_table": table.to_dict(),
        "manifest": result.manifest_path,
    }
    echo_path = Path(args.output_dir) / "run_config.json"
    echo_path.write_text(json.dumps(config_echo, indent=2, sort_keys=True))
    print(f"manifest: {result.manifest_path}")
    print(f"clean: {result.n_clean}  robust: {result.n_robust}  "
          f"failed: {result.n_failed}")
    if result.kind_counts:
        print("kind usage:")
        for kind, count in result.kind_counts.items():
            print(f"  {kind}: {count}")
    for image_id, error in result.failures:
        print(f"FAILED {image_id}: {error}", file=sys.stderr)
    return 2 if result.failures else 0


def cmd_evaluate(args) -> int:
    records = read_manifest(args.manifest)
    predictions = read_predictions_csv(args.predictions)
    report = evaluate(records, predictions)
    resolved = {
        "manifest": str(args.manifest),
        "predictions": str(args.predictions),
        "format": args.format,
    }
    if args.format == "json":
        text = report.to_json(run_config=resolved)
    else:
        text = report.to_csv()
    if args.output:
        Path(args.output).write_text(text)
        print(f"report: {args.output}")
    else:
        print(text)
    return 0


def cmd_fuse(args) -> int:
    n = fuse_scores_file(args.scores, args.scheme_config, args.output)
    print(f"fused {n} rows -> {args.output}")
    return 0


def cmd_replay(args) -> int:
    table = _severity_table(args)
    records = read_manifest(args.manifest)
    if args.image_id is not None:
        records = [r for r in records if r.image_id == args.image_id]
        if not records:
            print(f"error: image_id {args.image_id!r} not in manifest", file=sys.stderr)
            return 1
    mismatched = []
    skipped = 0
    for rec in records:
        if rec.error:
            skipped += 1
            continue
        replayed = replay(rec, table)
        expected = Path(rec.output_path).read_bytes()
        if png_bytes(replayed) != expected:
            mismatched.append(rec.image_id)
    checked = len(records) - skipped
    print(f"replayed {checked} records: {checked - len(mismatched)} byte-identical, "
          f"{len(mismatched)} mismatched, {skipped} skipped (error records)")
    for image_id in mismatched:
        print(f"MISMATCH {image_id}", file=sys.stderr)
    return 2 if mismatched else 0


def cmd_table_show(args) -> int:
    table = _severity_table(args)
    doc = table.to_dict()
    if args.kind:
        if args.kind not in doc["kinds"]:
            print(f"error: unknown kind {args.kind!r}", file=sys.stderr)
            return 1
        doc = {"num_levels": doc["num_levels"],
               "kinds": {args.kind: doc["kinds"][args.kind]}}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_table_validate(args) -> int:
    table = load_severity_config(args.severity_config)
    print(f"OK: {args.severity_config} ({table.num_levels} levels, "
          f"{len(table.params)} kinds)")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WildDistortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
