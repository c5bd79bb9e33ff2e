"""``verify <suite> --model ...`` command line front end.

Exit codes: 0 all identities pass, 1 some identity fails, 2 usage error,
3 output could not be written.
"""
from __future__ import annotations

import argparse
import sys

from .errors import UsageError
from .report import emit
from .suites import FORMATS, SUITES, RunConfig, run

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="verify", description="Run a numerical identity suite and report residuals.")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.add_argument("--model", required=True, help="e.g. 'cp(1,c=0.0625)xcp(1,c=0.0625)'")
    p.add_argument("--immersion", help="e1, e2(r=0.5) or e3(seed=7,amp=0.1)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tol", type=float, help="override every residual tolerance")
    p.add_argument("--step", type=float, default=1e-4, help="finite-difference step")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=FORMATS, default="json")
    return p


def config_from_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(
        suite=ns.suite, model=ns.model, immersion=ns.immersion, samples=ns.samples, seed=ns.seed,
        tol=ns.tol, step=ns.step, out=ns.out, format=ns.format,
    )


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
        report = run(cfg)
    except UsageError as exc:
        print(f"verify: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    data = emit(report, cfg.format)
    try:
        if cfg.out:
            with open(cfg.out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    except OSError as exc:
        print(f"verify: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_PASS if report.overall_pass else EXIT_FAIL
