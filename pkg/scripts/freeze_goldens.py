#!/usr/bin/env python3
"""Regenerate the frozen golden files used by the regression tests.

Run from the repository root after an intentional behavior change:

    python3 scripts/freeze_goldens.py

Covers the harness report golden, the stdio protocol session golden, and the
client conformance sessions under client/tests/golden/.
"""

import io
import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from blicketlab.core import Action  # noqa: E402
from blicketlab.env import BlicketEnv  # noqa: E402
from blicketlab.harness import evaluate, run_episode  # noqa: E402
from blicketlab.protocol import serve_stdio  # noqa: E402
from blicketlab.agents import make_agent  # noqa: E402

GOLDEN = ROOT / "tests" / "golden"
CLIENT_GOLDEN = ROOT / "client" / "tests" / "golden"


def freeze_report():
    report = evaluate("search-naive", 42, 100)
    (GOLDEN / "report_search-naive_s42_n100.json").write_bytes(report.json_bytes())
    print(f"report golden: accuracy={report.episode_accuracy:.2%}")


def freeze_protocol_session():
    rng = np.random.default_rng(2024)
    requests = [{"cmd": "reset", "seed": 42, "episode_index": 0}]
    requests += [{"cmd": "step", "action": rng.random(18).round(6).tolist()} for _ in range(4)]
    requests += [
        {"cmd": "step", "action": [0.5] * 18},
        {"cmd": "reset", "seed": 42, "episode_index": 1},
        {"cmd": "step", "action": [0.0] * 9 + [0.5] * 9},
        {"cmd": "close"},
    ]
    request_text = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in requests)
    stdout = io.StringIO()
    serve_stdio(io.StringIO(request_text), stdout)
    (GOLDEN / "session_requests.jsonl").write_text(request_text)
    (GOLDEN / "session_responses.jsonl").write_text(stdout.getvalue())
    print(f"protocol session golden: {len(requests)} requests")


def _session_dict(seed, episode_index, actions):
    """Execute actions in-process and record the wire-visible outcome."""
    env = BlicketEnv()
    observations, episode_id = env.reset(seed, episode_index)
    steps = []
    for action in actions:
        obs, reward, done, info = env.step(Action.from_flat(action))
        steps.append(
            {
                "action": [float(x) for x in action],
                "observation": [int(b) for b in obs],
                "reward": float(reward),
                "done": bool(done),
                "solved": bool(info["solved"]),
                "feasible_count": int(info["feasible_count"]),
            }
        )
        if done:
            break
    return {
        "seed": seed,
        "episode_index": episode_index,
        "episode_id": episode_id,
        "context": [[int(b) for b in row] for row in observations],
        "steps": steps,
    }


def freeze_client_sessions():
    CLIENT_GOLDEN.mkdir(parents=True, exist_ok=True)

    # solved instantly: submit the ground truth as the first belief
    env = BlicketEnv()
    env.reset(42, 0)
    belief = [1.0 if i in env.spec.ground_truth else 0.0 for i in range(9)]
    instant = _session_dict(42, 0, [[0.0] * 9 + belief])
    (CLIENT_GOLDEN / "session_solved_instantly.json").write_text(
        json.dumps(instant, indent=2) + "\n"
    )

    # exhausted: ten undecided holds
    exhausted = _session_dict(42, 1, [[0.0] * 9 + [0.5] * 9] * 10)
    (CLIENT_GOLDEN / "session_exhausted.json").write_text(
        json.dumps(exhausted, indent=2) + "\n"
    )

    # mid-episode solve: replay a search-naive run
    env = BlicketEnv()
    transcript = run_episode(make_agent("search-naive", seed=3), env, 42, 2)
    actions = [step.trial + step.belief for step in transcript.steps]
    mid = _session_dict(42, 2, actions)
    assert 1 < len(mid["steps"]) and mid["steps"][-1]["solved"]
    (CLIENT_GOLDEN / "session_mid_episode_solve.json").write_text(
        json.dumps(mid, indent=2) + "\n"
    )
    print(f"client sessions golden: instant=1 step, exhausted=10, mid={len(mid['steps'])} steps")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    freeze_report()
    freeze_protocol_session()
    freeze_client_sessions()
