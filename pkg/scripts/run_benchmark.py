#!/usr/bin/env python3
"""Evaluate all five scripted agents on a shared seeded episode set and print
a comparison table; optionally write the full per-agent reports.

    python3 scripts/run_benchmark.py --episodes 10000 --seed 42 --out-dir reports/
"""

import argparse
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from blicketlab.agents import AGENT_NAMES  # noqa: E402
from blicketlab.harness import evaluate, write_report  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--episodes", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out-dir", default=None, help="write one JSON report per agent")
    args = parser.parse_args()

    out_dir = None
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    header = f"{'agent':<14s} {'ctx acc':>8s} {'ctx R':>8s} {'ep acc':>8s} {'ep R':>8s} {'time':>7s}"
    print(header)
    print("-" * len(header))
    for name in AGENT_NAMES:
        t0 = time.monotonic()
        report = evaluate(name, args.seed, args.episodes, workers=args.workers)
        elapsed = time.monotonic() - t0
        print(
            f"{name:<14s} {report.context_accuracy:>8.2%} {report.context_reward:>8.3f} "
            f"{report.episode_accuracy:>8.2%} {report.episode_reward:>8.3f} {elapsed:>6.1f}s"
        )
        if out_dir:
            write_report(report, "json", out_dir / f"report_{name}.json")
    if out_dir:
        print(f"reports written to {out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
