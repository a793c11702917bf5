"""Command line: run, sweep, diagnose, export.

Exit status 0 when every assertion passed, 2 when violations were
reported, 1 on errors.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from ..errors import FTError
from . import runner
from .config import load_config


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftbalance", description="Front tracking for 1D balance laws.")
    sub = p.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run one configuration and write its trajectory files")
    r.add_argument("--config", required=True)
    r.add_argument("--out")
    s = sub.add_parser("sweep", help="refinement ladder eps/2^j, j < levels")
    s.add_argument("--config", required=True)
    s.add_argument("--levels", type=int, required=True)
    s.add_argument("--out")
    d = sub.add_parser("diagnose", help="balance / Oleinik / SBV diagnostics on a stored run")
    d.add_argument("--traj", required=True)
    d.add_argument("--check", choices=("balance", "oleinik", "sbv", "all"), default="all")
    e = sub.add_parser("export", help="export a snapshot of a stored run")
    e.add_argument("--traj", required=True)
    e.add_argument("--at", type=float, required=True)
    e.add_argument("--what", choices=("profile", "waves", "measures"), required=True)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "run":
            out = runner.run(load_config(args.config), args.out)
        elif args.cmd == "sweep":
            if args.levels < 1:
                raise FTError("--levels must be >= 1")
            out = runner.sweep(load_config(args.config), args.levels, args.out)
        elif args.cmd == "diagnose":
            out = runner.diagnose(args.traj, args.check)
        else:
            out = runner.export(args.traj, args.at, args.what)
    except (FTError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name in out.files:
        print(f"wrote {out.outdir}/{name}")
    for v in out.violations:
        print(f"violation: {v}")
    return 0 if out.ok else 2


if __name__ == "__main__":
    sys.exit(main())
