"""
Command-line entry points.

    qbnoise run --config scenario.json --out results/
    qbnoise verify [--config suite.json] [--out DIR] [--seed INT] [--only NAME]
                   [--negative-control] [--tolerance-scale FLOAT]

Exit codes: 0 success, 1 failed checks, 2 invalid input, 3 capacity exceeded.
"""

import argparse
import json
import logging
import os
import sys

from .exceptions import CapacityError
from .scenario import ScenarioError, run_scenario
from .suite import FAMILIES, run_suite

log = logging.getLogger("qbnoise")

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2, 3


def _parser():
    parser = argparse.ArgumentParser(prog="qbnoise", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a scenario file")
    run.add_argument("--config", required=True, help="scenario JSON")
    run.add_argument("--out", default="qbnoise-out", help="output directory")

    ver = sub.add_parser("verify", help="run the verification suite")
    ver.add_argument("--config", help="JSON overriding suite defaults")
    ver.add_argument("--out", default="qbnoise-suite", help="output directory")
    ver.add_argument("--seed", type=int, help="master seed")
    ver.add_argument("--only", action="append", choices=FAMILIES, metavar="NAME",
                     help=f"restrict to a family (repeatable): {', '.join(FAMILIES)}")
    ver.add_argument("--negative-control", action="store_true",
                     help="double the annihilator commutator correction; the suite must then fail")
    ver.add_argument("--tolerance-scale", type=float, default=1.0)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _verify(args):
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"cannot read suite config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise ScenarioError("suite config must be a JSON object")
    if args.seed is not None:
        config["seed"] = args.seed
    if not args.tolerance_scale > 0:
        raise ScenarioError("--tolerance-scale must be positive")
    result = run_suite(config, only=args.only, negative_control=args.negative_control,
                       tolerance_scale=args.tolerance_scale)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "suite.json"), "w") as fh:
        json.dump(result.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(args.out, "timings.json"), "w") as fh:
        json.dump(result.timings, fh, indent=2, sort_keys=True)
        fh.write("\n")
    summary = result.to_json()["summary"]
    print(f"{summary['passed']}/{summary['total']} checks passed")
    for c in result.failed:
        print(f"FAILED {c['check']} {c['identity']} residual={c['residual']!r} tolerance={c['tolerance']!r}")
    return result.exit_code


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            failed = run_scenario(args.config, args.out)
            if failed:
                print(f"{failed} scenario checks failed", file=sys.stderr)
                return EXIT_FAILED
            return EXIT_OK
        return _verify(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ScenarioError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
