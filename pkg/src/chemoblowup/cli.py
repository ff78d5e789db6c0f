"""Command-line entry point: ``chemoblowup {classify,params,verify,simulate,scan,compare}``.

Exit codes: 0 success, 1 analytic or verification failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import harness
from .config import RunConfig, load
from .errors import (AbortedRunError, ChemoBlowupError, DomainError, InfeasibleError,
                     InvalidParameterError, NotRepresentableError, PreconditionError)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chemoblowup", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "classify": "region tag and blow-up/boundedness predicates for (m1, m2, n)",
        "params": "derived subsolution constants (linear and log) with feasibility flags",
        "verify": "sample P <= 0 and Q <= 0 over the three regions",
        "simulate": "run the mass-variable solver and write series/snapshots",
        "scan": "classify (and optionally simulate) a grid in the (m1, m2) plane",
        "compare": "ordering and dominance experiments",
    }
    for name, text in helps.items():
        c = sub.add_parser(name, help=text, description=text)
        c.add_argument("--config", metavar="PATH", help="configuration file")
        c.add_argument("--m1", type=float)
        c.add_argument("--m2", type=float)
        c.add_argument("--n", type=int)
        c.add_argument("--out", metavar="DIR", help="output directory")
    return p


def _config(args) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    return cfg.with_overrides(args.m1, args.m2, args.n, args.out)


def dispatch(args) -> int:
    cfg = _config(args)
    if args.command == "classify":
        m = cfg.model
        code, text = harness.cmd_classify(m.m1, m.m2, m.n)
    else:
        code, text = getattr(harness, f"cmd_{args.command}")(cfg)
    sys.stdout.write(text)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InvalidParameterError, DomainError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleError, NotRepresentableError, AbortedRunError, ChemoBlowupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
