"""Command-line entry point: run, serve, replay, gen.

Set ``BLICKETLAB_LOG=debug|info|warning`` to control stderr logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .agents import AGENT_NAMES
from .core import BlicketError, Config
from .harness import evaluate, write_report
from .protocol import gen, replay, serve_stdio


def _load_config(path: str | None) -> Config:
    if path is None:
        return Config()
    with open(path, "r", encoding="utf-8") as fh:
        return Config.from_dict(json.load(fh))


def _cmd_run(args) -> int:
    report = evaluate(
        agent=args.agent,
        master_seed=args.seed,
        episodes=args.episodes,
        config=_load_config(args.config),
        agent_seed=args.agent_seed,
        workers=args.workers,
        transcripts_path=args.transcripts,
    )
    if args.report:
        write_report(report, args.format, args.report)
        print(f"report written to {args.report}")
    else:
        sys.stdout.write(report.json_bytes().decode())
    acc = report.episode_accuracy
    print(
        f"{args.agent}: episode accuracy {acc:.2%}, mean reward {report.episode_reward:.3f} "
        f"over {args.episodes} episodes (seed {args.seed})"
    )
    return 0


def _cmd_serve(args) -> int:
    serve_stdio(config=_load_config(args.config))
    return 0


def _cmd_replay(args) -> int:
    result = replay(args.transcripts)
    if result.ok:
        print(f"PASS: {result.episodes} episode(s) replayed exactly")
        return 0
    first = result.mismatches[0]
    print(
        f"FAIL: episode {first.episode_index} step {first.step} {first.field}: "
        f"recorded {first.expected!r}, replayed {first.actual!r} "
        f"({len(result.mismatches)} episode(s) diverged)"
    )
    return 1


def _cmd_gen(args) -> int:
    gen(args.seed, args.count, args.out, config=_load_config(args.config))
    print(f"{args.count} episode spec(s) written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blicketlab",
        description="Blicket-machine environment: benchmark runner, stdio server, "
        "transcript replay, and episode generation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate an agent over seeded episodes")
    p.add_argument("--agent", required=True, choices=AGENT_NAMES)
    p.add_argument("--episodes", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--report", default=None, help="write the metrics report here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--transcripts", default=None, help="write per-episode JSONL transcripts")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--agent-seed", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON file with config overrides")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("serve", help="serve the line-delimited JSON protocol on stdio")
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("replay", help="verify a recorded transcript file")
    p.add_argument("transcripts", help="JSONL transcript file")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("gen", help="materialize episode specs as JSONL")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("BLICKETLAB_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BlicketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
