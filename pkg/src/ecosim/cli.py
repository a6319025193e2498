"""Command-line interface.

Exit codes: 0 success, 1 configuration or usage error, 2 runtime/IO error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ._backend import BACKEND_NAME
from .driver import (ExperimentConfig, replicate_figure, run_experiment,
                     validate_config)
from .errors import ConfigurationError, EcosimError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ecosim",
                     description="Evolving service-ecosystem simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("--config", required=True, help="JSON config file")
    run.add_argument("--runs", type=int, help="override run count")
    run.add_argument("--seed", type=int, help="override base seed")
    run.add_argument("--steps", type=int, help="override time steps per run")
    run.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes (default 1)")
    run.add_argument("--out", required=True, help="output directory")

    fig = sub.add_parser("replicate-figure",
                         help="run a preset replication experiment")
    fig.add_argument("--figure", type=int, required=True,
                     help="figure number, 5 through 10")
    fig.add_argument("--profile", choices=("desk", "full"), default="desk")
    fig.add_argument("--workers", type=int, default=1)
    fig.add_argument("--out", required=True, help="output directory")

    val = sub.add_parser("validate-config", help="check a config file")
    val.add_argument("--config", required=True, help="JSON config file")
    return parser


def _print_summary(summary) -> None:
    print(f"backend: {BACKEND_NAME}")
    print(f"runs: {len(summary.seeds)}  issued: {summary.requests_issued}  "
          f"successful: {summary.successful_requests}  "
          f"failed: {summary.failed_requests}")
    for name, report in (("size", summary.size_report),
                         ("attributes", summary.attr_report)):
        if report is None:
            print(f"{name}: no report (degenerate histogram)")
            continue
        print(f"{name}: chi2={report.statistic:.3f} dof={report.dof} "
              f"lower_crit={report.lower_critical_005:.3f} "
              f"p={report.upper_p_value:.4f} "
              f"paper_style_pass={report.paper_style_pass} "
              f"standard_pass={report.standard_pass}")
    print(f"elapsed: {summary.elapsed_seconds:.1f}s")


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        print(f"ecosim: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"ecosim: invalid JSON in config: {exc}", file=sys.stderr)
        return 1
    if not isinstance(raw, dict):
        print("ecosim: config root must be a JSON object", file=sys.stderr)
        return 1
    if args.runs is not None:
        raw["runs"] = args.runs
    if args.seed is not None:
        raw["base_seed"] = args.seed
    if args.steps is not None:
        raw["time_steps"] = args.steps
    config = ExperimentConfig.from_dict(raw)
    summary = run_experiment(config, workers=args.workers, out_dir=args.out)
    _print_summary(summary)
    return 0


def _cmd_figure(args) -> int:
    summary = replicate_figure(args.figure, profile=args.profile,
                               out_dir=args.out, workers=args.workers)
    _print_summary(summary)
    return 0


def _cmd_validate(args) -> int:
    try:
        diags = validate_config(args.config)
    except OSError as exc:
        print(f"ecosim: cannot read config: {exc}", file=sys.stderr)
        return 2
    if diags:
        for d in diags:
            print(d)
        return 1
    print("ok")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "replicate-figure":
            return _cmd_figure(args)
        return _cmd_validate(args)
    except ConfigurationError as exc:
        print(f"ecosim: configuration error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ecosim: i/o error: {exc}", file=sys.stderr)
        return 2
    except EcosimError as exc:
        print(f"ecosim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
