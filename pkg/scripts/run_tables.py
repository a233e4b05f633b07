#!/usr/bin/env python3
"""Rerun the benchmark error tables and write comparison reports.

Each table is printed to standard output and, with --outdir, also written
as <table>.csv next to the measured/reference statistics.  Full-size runs
(1000 trials) take a few minutes because of the 10000- and 20000-step
rows; use --trials for a quick look.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from pathvol.experiment import TABLE_IDS, reproduce_table


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--tables",
        nargs="+",
        choices=TABLE_IDS,
        default=list(TABLE_IDS),
        help="which tables to run (default: all)",
    )
    parser.add_argument("--trials", type=int, default=1000, help="trials per table row")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--outdir", type=Path, help="directory for per-table CSV reports")
    parser.add_argument(
        "--max-steps",
        type=int,
        help="skip rows with more simulation steps than this (e.g. 250 for a fast pass)",
    )
    args = parser.parse_args(argv)
    if args.trials < 1:
        parser.error("--trials must be >= 1")

    if args.outdir is not None:
        args.outdir.mkdir(parents=True, exist_ok=True)

    for table_id in args.tables:
        start = time.perf_counter()
        kwargs = {}
        if args.max_steps is not None:
            all_steps = {
                "t1a": (52,),
                "t1b": (250,),
                "t2": (250, 10000, 20000),
                "t3": (250, 10000, 20000),
            }[table_id]
            keep = tuple(n for n in all_steps if n <= args.max_steps)
            if not keep:
                print(f"table {table_id}: skipped (all rows above --max-steps)", file=sys.stderr)
                continue
            kwargs["n_steps_filter"] = keep
        report = reproduce_table(table_id, trials=args.trials, master_seed=args.seed, **kwargs)
        print(report.format_text())
        print(f"[{time.perf_counter() - start:.1f} s]\n")
        if args.outdir is not None:
            dest = args.outdir / f"{table_id}.csv"
            dest.write_text(report.to_csv())
            print(f"wrote {dest}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
