"""``puffer-sim``: run scenario scripts headlessly and report metrics."""

from __future__ import annotations

import argparse
import asyncio
import sys

from ..config import DEFAULTS, parse_overrides
from .report import aggregate, summarize, write_csv
from .runner import run_scenario, run_scenario_over_wire
from .scenario import load_script


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="puffer-sim")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario script")
    run.add_argument("scenario", help="path to the scenario JSON")
    run.add_argument("--seed", type=int, default=None, help="override the script seed")
    run.add_argument("--runs", type=int, default=1,
                     help="repeat with seeds seed, seed+1, ...")
    run.add_argument("--access-path", default=None,
                     choices=["menu", "hotkey", "suggestion"])
    run.add_argument("--csv", default=None, help="write the aggregate table here")
    run.add_argument("--log", default=None, help="write the JSONL event log here")
    run.add_argument("--constants", nargs="*", default=[], metavar="KEY=VAL")
    run.add_argument("--audit", action="store_true",
                     help="log per-bot observation lines")
    run.add_argument("--over-wire", action="store_true",
                     help="rerun through the real websocket transport (smoke; "
                          "not deterministic)")
    args = parser.parse_args(argv)

    script = load_script(args.scenario)
    if args.seed is not None:
        script = script.with_seed(args.seed)
    if args.access_path is not None:
        script = script.with_access_path(args.access_path)
    consts = DEFAULTS.with_overrides(parse_overrides(args.constants))

    metrics_list = []
    log_lines: list[str] = []
    for i in range(args.runs):
        run_script = script.with_seed(script.seed + i)
        metrics, log = run_scenario(run_script, consts, audit=args.audit, run_index=i)
        metrics_list.append(metrics)
        log_lines.extend(log)

    if args.log:
        with open(args.log, "w", encoding="utf-8") as fh:
            fh.write("\n".join(log_lines) + "\n")

    rows = aggregate(metrics_list)
    if args.csv:
        write_csv(rows, args.csv)
    print(summarize(rows))

    if args.over_wire:
        print("over-wire smoke rerun...", file=sys.stderr)
        asyncio.run(run_scenario_over_wire(script, consts))
        print("over-wire smoke rerun completed", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
