"""Command line front end: run scenario files, list the catalog, verify.

Output root resolution: --out flag, else the TUBEVAR_OUT environment
variable, else ./tubevar-out.  Exit status is 0 when every check of every
scenario passed, 1 when some check failed, 2 on bad input.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalog import list_catalog
from .errors import DomainError
from .scenario import load_scenario, run
from .verification import run_all


def _out_root(args) -> Path:
    if args.out is not None:
        return Path(args.out)
    env = os.environ.get("TUBEVAR_OUT")
    return Path(env) if env else Path("tubevar-out")


def _cmd_run(args) -> int:
    if not args.files:
        print("no scenario files given; nothing to do")
        return 0
    root = _out_root(args)
    all_passed = True
    for f in args.files:
        try:
            scenario = load_scenario(f)
            record = run(scenario, root)
        except DomainError as e:
            print(f"{f}: invalid scenario: {e}", file=sys.stderr)
            return 2
        word = "PASS" if record.passed else "FAIL"
        print(
            f"{record.name} [{record.kind}] {word} "
            f"({record.wall_time_s:.2f} s) -> {record.outdir}"
        )
        for check in record.checks:
            mark = "ok" if check["passed"] else "FAILED"
            print(f"  {check['name']}: {mark} - {check['detail']}")
        all_passed = all_passed and record.passed
    return 0 if all_passed else 1


def _cmd_catalog(_args) -> int:
    print(list_catalog())
    return 0


def _cmd_verify_all(_args) -> int:
    results = run_all(report=print)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if n_pass == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubevar",
        description="trajectory-tube variation, time measures and delay sensitivity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenario files")
    p_run.add_argument("files", nargs="*", help="scenario JSON files")
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.set_defaults(fn=_cmd_run)

    p_cat = sub.add_parser("catalog", help="list built-in problems")
    p_cat.set_defaults(fn=_cmd_catalog)

    p_ver = sub.add_parser("verify-all", help="run the full acceptance sweep")
    p_ver.set_defaults(fn=_cmd_verify_all)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
