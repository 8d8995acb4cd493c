"""Gym-style client for the blicketlab stdio protocol server."""

from .client import (
    BlicketEnvClient,
    ClientError,
    ResponseError,
    ServerError,
    SpawnError,
    VersionError,
    default_server_command,
)

__version__ = "0.1.0"
