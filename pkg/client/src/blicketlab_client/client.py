"""Thin gym-style client for the blicketlab stdio protocol.

Spawns the server as a child process and speaks line-delimited JSON over its
stdin/stdout: one request in flight at a time, one episode at a time. Floats
cross the boundary through JSON's shortest round-trip representation, so
recorded sessions replay bit-exactly.

The server command comes from the constructor, the ``BLICKETLAB_SERVER``
environment variable, or defaults to ``python -m blicketlab serve``.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import sys
from typing import Sequence

import numpy as np

PROTOCOL_VERSION = "1"
SERVER_ENV_VAR = "BLICKETLAB_SERVER"


class ClientError(Exception):
    """Base class for client-side failures."""


class SpawnError(ClientError):
    """The server process could not be started."""


class VersionError(ClientError):
    """The server speaks a different protocol version."""


class ResponseError(ClientError):
    """The server's reply was missing, truncated, or not valid JSON."""


class ServerError(ClientError):
    """The server answered with an error response.

    ``kind`` carries the server-side error type (e.g. ``StateError`` for a
    step after the episode finished, ``ContractError`` for a malformed
    action).
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message


def default_server_command() -> list[str]:
    override = os.environ.get(SERVER_ENV_VAR)
    if override:
        return shlex.split(override)
    return [sys.executable, "-m", "blicketlab", "serve"]


class BlicketEnvClient:
    """reset/step/close against a spawned protocol server.

    One handle owns one child process and one episode at a time; use one
    handle per worker for parallel rollouts.
    """

    def __init__(self, server_cmd: Sequence[str] | None = None, config: dict | None = None):
        self.server_cmd = list(server_cmd) if server_cmd is not None else default_server_command()
        self.config = dict(config) if config else None
        self.protocol_version: str | None = None
        self.config_digest: str | None = None
        self.episode_id: str | None = None
        self.num_objects = 9
        self._closed = False
        try:
            self._proc = subprocess.Popen(
                self.server_cmd,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
                text=True,
                bufsize=1,
            )
        except (OSError, ValueError) as exc:
            raise SpawnError(f"could not start server {self.server_cmd!r}: {exc}") from exc

    def __enter__(self) -> "BlicketEnvClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _rpc(self, payload: dict) -> dict:
        if self._closed:
            raise ClientError("client is closed")
        if self._proc.poll() is not None:
            raise ResponseError(f"server exited with code {self._proc.returncode}")
        try:
            self._proc.stdin.write(json.dumps(payload) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ResponseError(f"server pipe closed while sending: {exc}") from exc
        line = self._proc.stdout.readline()
        if not line:
            raise ResponseError("server closed its stdout without replying")
        try:
            response = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ResponseError(f"server reply is not valid JSON: {line!r}") from exc
        if not isinstance(response, dict) or "ok" not in response:
            raise ResponseError(f"server reply has no ok field: {response!r}")
        if not response["ok"]:
            error = response.get("error") or {}
            raise ServerError(error.get("type", "unknown"), error.get("message", ""))
        return response

    def reset(self, seed: int, episode_index: int) -> np.ndarray:
        """Start an episode; returns the stacked context observations
        (``num_context_panels`` rows of presence bits plus the machine bit)."""
        request = {"cmd": "reset", "seed": int(seed), "episode_index": int(episode_index)}
        if self.config is not None:
            request["config"] = self.config
        response = self._rpc(request)
        version = response.get("protocol_version")
        if version != PROTOCOL_VERSION:
            raise VersionError(
                f"server speaks protocol {version!r}, client expects {PROTOCOL_VERSION!r}"
            )
        if "observations" not in response or "episode_id" not in response:
            raise ResponseError(f"malformed reset response: {response!r}")
        self.protocol_version = version
        self.config_digest = response.get("config_digest")
        self.episode_id = response["episode_id"]
        observations = np.asarray(response["observations"], dtype=np.int8)
        self.num_objects = observations.shape[1] - 1
        return observations

    def step(self, action: Sequence[float]) -> tuple[np.ndarray, float, bool, dict]:
        """Submit an action (trial floats then belief floats) and return
        ``(observation, reward, done, info)``."""
        flat = [float(x) for x in action]
        response = self._rpc({"cmd": "step", "action": flat})
        try:
            observation = np.asarray(response["observation"], dtype=np.int8)
            reward = float(response["reward"])
            done = bool(response["done"])
            info = dict(response["info"])
        except (KeyError, TypeError) as exc:
            raise ResponseError(f"malformed step response: {response!r}") from exc
        return observation, reward, done, info

    def close(self) -> None:
        """Shut the server down and reap the child; safe to call twice."""
        if self._closed:
            return
        self._closed = True
        try:
            if self._proc.poll() is None:
                self._proc.stdin.write(json.dumps({"cmd": "close"}) + "\n")
                self._proc.stdin.flush()
                self._proc.stdout.readline()
        except (BrokenPipeError, OSError, ValueError):
            pass
        finally:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
