"""Line-delimited JSON protocol over stdio, plus transcript tooling.

One JSON object per line, requests and responses strictly alternating, one
episode at a time. The action wire format is 18 floats: trial[0..8] followed
by belief[0..8]. Floats are serialized with Python's shortest round-trip
representation, which parses back bit-identically, so recorded sessions and
transcripts replay exactly. Unknown request fields are ignored; malformed
lines produce an error response without ending the session.
"""

from __future__ import annotations

import io
import json
import logging
import sys
from dataclasses import dataclass

from .core import Action, BlicketError, Config, ContractError, StateError
from .env import BlicketEnv, EpisodeTranscript
from .sampler import generate_episode

PROTOCOL_VERSION = "1"

log = logging.getLogger("blicketlab.protocol")


def _dump_line(payload: dict) -> str:
    return json.dumps(payload, separators=(",", ":")) + "\n"


def _error(kind: str, message: str) -> dict:
    return {"ok": False, "error": {"type": kind, "message": message}}


class StdioServer:
    """Sequential request handler for one session (one episode at a time)."""

    def __init__(self, default_config: Config | None = None):
        self.default_config = default_config or Config()
        self.env: BlicketEnv | None = None

    def handle(self, request: dict) -> tuple[dict, bool]:
        """Returns ``(response, keep_running)``."""
        cmd = request.get("cmd")
        try:
            if cmd == "reset":
                return self._reset(request), True
            if cmd == "step":
                return self._step(request), True
            if cmd == "close":
                return {"ok": True, "closed": True}, False
            return _error("ContractError", f"unknown cmd {cmd!r}"), True
        except BlicketError as exc:
            return _error(type(exc).__name__, str(exc)), True
        except Exception as exc:  # the session must survive anything
            log.exception("internal error handling %r", cmd)
            return _error("InternalError", f"{type(exc).__name__}: {exc}"), True

    def _reset(self, request: dict) -> dict:
        overrides = request.get("config") or {}
        if overrides:
            config = Config.from_dict({**self.default_config.to_dict(), **overrides})
        else:
            config = self.default_config
        env = BlicketEnv(config)
        observations, episode_id = env.reset(
            int(request.get("seed", 0)), int(request.get("episode_index", 0))
        )
        self.env = env
        return {
            "ok": True,
            "protocol_version": PROTOCOL_VERSION,
            "episode_id": episode_id,
            "config_digest": config.digest(),
            "observations": [[int(b) for b in row] for row in observations],
        }

    def _step(self, request: dict) -> dict:
        if self.env is None:
            raise StateError("step before reset")
        if "action" not in request:
            raise ContractError("step request carries no action")
        action = Action.from_flat(request["action"], self.env.config.num_objects)
        obs, reward, done, info = self.env.step(action)
        return {
            "ok": True,
            "observation": [int(b) for b in obs],
            "reward": float(reward),
            "done": bool(done),
            "info": {
                "oracle_belief": [float(x) for x in info["oracle_belief"]],
                "feasible_count": int(info["feasible_count"]),
                "solved": bool(info["solved"]),
            },
        }


def serve_stdio(stdin=None, stdout=None, config: Config | None = None) -> None:
    """Serve requests line by line until EOF or a ``close`` command."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    server = StdioServer(config)
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
        except json.JSONDecodeError as exc:
            stdout.write(_dump_line(_error("ParseError", f"invalid JSON: {exc}")))
            stdout.flush()
            continue
        if not isinstance(request, dict):
            stdout.write(_dump_line(_error("ContractError", "request must be a JSON object")))
            stdout.flush()
            continue
        log.debug("request: %s", request.get("cmd"))
        response, keep_running = server.handle(request)
        stdout.write(_dump_line(response))
        stdout.flush()
        if not keep_running:
            break


def gen(master_seed: int, count: int, out_path, config: Config | None = None) -> None:
    """Materialize ``count`` episode specs as JSONL for external consumers."""
    if count < 1:
        raise ContractError("count must be >= 1")
    cfg = config or Config()
    with open(out_path, "w", encoding="utf-8") as fh:
        for index in range(count):
            spec = generate_episode(master_seed, index, cfg)
            fh.write(json.dumps(spec.to_dict(), separators=(",", ":")) + "\n")


@dataclass
class ReplayMismatch:
    episode_index: int
    step: int
    field: str
    expected: object
    actual: object


@dataclass
class ReplayResult:
    episodes: int
    mismatches: list[ReplayMismatch]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def replay_transcript(transcript: EpisodeTranscript) -> ReplayMismatch | None:
    """Re-execute the recorded actions; None means every reward and the
    termination matched."""
    env = BlicketEnv(transcript.config)
    env.reset(transcript.master_seed, transcript.episode_index)
    last = len(transcript.steps) - 1
    for k, record in enumerate(transcript.steps):
        action = Action.from_flat(
            record.trial + record.belief, transcript.config.num_objects
        )
        _, reward, done, _ = env.step(action)
        if reward != record.reward:
            return ReplayMismatch(
                transcript.episode_index, k + 1, "reward", record.reward, reward
            )
        if done != (k == last):
            return ReplayMismatch(
                transcript.episode_index, k + 1, "done", k == last, done
            )
    if env.status.value != transcript.status.value:
        return ReplayMismatch(
            transcript.episode_index, last + 1, "status", transcript.status.value, env.status.value
        )
    return None


def replay(path) -> ReplayResult:
    """Verify a JSONL transcript file; raises ``ConfigMismatchError`` when a
    transcript was recorded under a configuration this code cannot honor."""
    mismatches = []
    episodes = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            transcript = EpisodeTranscript.from_dict(json.loads(line))
            episodes += 1
            mismatch = replay_transcript(transcript)
            if mismatch is not None:
                mismatches.append(mismatch)
    return ReplayResult(episodes=episodes, mismatches=mismatches)
