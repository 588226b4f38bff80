"""Command-line entry point.

Subcommands
-----------
rwm-lab run --config PATH [--workers N] [--out DIR]
rwm-lab verify [--profile default] [--json PATH]
rwm-lab fit --sweep DIR --proxy iact|threshold [--json PATH] [--csv PATH]
rwm-lab version

Exit codes: 0 success, 1 validation error, 2 runtime failure,
3 verification failure.  The RWM_LAB_THREADS environment variable
overrides --workers.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .errors import ConfigError
from .harness import ExperimentConfig, fit_report, run_sweep
from .verify import PROFILES, verify_analytics

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFICATION = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rwm-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep config")
    p_run.add_argument("--config", required=True, help="path to the JSON sweep config")
    p_run.add_argument("--workers", type=int, default=None, help="parallel chain workers")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")

    p_verify = sub.add_parser("verify", help="run the analytic identity battery")
    p_verify.add_argument("--profile", default="default", choices=sorted(PROFILES))
    p_verify.add_argument("--json", default=None, help="write the JSON report here")

    p_fit = sub.add_parser("fit", help="fit rate exponents over a finished sweep")
    p_fit.add_argument("--sweep", required=True, help="sweep output directory")
    p_fit.add_argument("--proxy", default="iact", choices=["iact", "threshold"])
    p_fit.add_argument("--json", default=None, help="write the fit report JSON here")
    p_fit.add_argument("--csv", default=None, help="write the fit table CSV here")

    sub.add_parser("version", help="print the package version")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = ExperimentConfig.from_file(args.config)
    except ConfigError as e:
        print("config validation failed:", file=sys.stderr)
        for msg in e.errors:
            print(f"  - {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        result = run_sweep(cfg, out_dir=args.out, workers=args.workers)
    except Exception as e:  # noqa: BLE001
        print(f"sweep execution failed: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {result.csv_path} ({len(result.rows)} rows, {result.n_failed} failed chains)")
    if result.n_failed:
        print(f"{result.n_failed} chain(s) failed; see chains.jsonl", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_analytics(profile=args.profile)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(report.to_json() + "\n")
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        bound = "structural" if check.bound is None else f"<= {check.bound:.3e}"
        print(f"[{status}] {check.name}: {check.value:.6e} ({bound})")
    n_failed = len(report.failed())
    print(f"{len(report.checks)} checks, {n_failed} failed")
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def _cmd_fit(args) -> int:
    try:
        report = fit_report(args.sweep, cost_proxy=args.proxy)
    except (ValueError, OSError) as e:
        print(f"fit failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    print(report.to_text_table())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    if args.json:
        import json as _json

        with open(args.json, "w") as fh:
            _json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify(args)
    if args.command == "fit":
        return _cmd_fit(args)
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
