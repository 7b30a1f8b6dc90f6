"""Command-line scenario runner.

    kerr-bsv negativity-scan --config configs/negativity_squeezed.json --out runs/scan
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .io import ConfigError, load_config
from .scenarios import SCENARIOS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerr-bsv", description="Kerr non-Gaussianity of bright squeezed vacuum")
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name, (cls, _) in SCENARIOS.items():
        sp = sub.add_parser(name, help=(cls.__doc__ or name).strip().splitlines()[0])
        sp.add_argument("--config", type=Path, required=True, help="JSON file with the scenario parameters")
        sp.add_argument("--out", type=Path, required=True, help="output directory (created if missing)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=1, help="independent scenario points run concurrently")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cls, runner = SCENARIOS[args.scenario]
    try:
        cfg = load_config(cls, args.config)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return 2
    t0 = time.perf_counter()
    try:
        summary = runner(cfg, args.out, seed=args.seed, threads=args.threads)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"scenario": args.scenario, "out": str(args.out), "seconds": round(time.perf_counter() - t0, 3), "summary": summary}, default=str))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
