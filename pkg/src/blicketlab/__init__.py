"""Blicket-machine active causal-discovery environment.

A deterministic, seedable simulator of the Blicket detection task: hidden
Blicket subsets, a disjunctive machine, an exhaustive feasible-set oracle
that shapes rewards by Jensen-Shannon divergence, five scripted baseline
agents, a benchmark harness, and a stdio JSON protocol for external agents.
"""

from .agents import AGENT_NAMES, make_agent
from .core import (
    Action,
    BlicketError,
    Config,
    ConfigMismatchError,
    ContractError,
    Decision,
    DomainError,
    GenerationError,
    InconsistencyError,
    ObjectSpec,
    Panel,
    StateError,
    belief_divergence,
    decode_observation,
    encode_observation,
    jsd_bernoulli,
    threshold_decisions,
)
from .env import BlicketEnv, EpisodeTranscript, Status
from .harness import MetricsReport, evaluate, steps_histogram, trial_size_stats, write_report
from .oracle import FeasibleSet, is_consistent, is_solved, oracle_belief, step_reward
from .sampler import EpisodeSpec, QueryLabel, classify_query_types, generate_episode

__version__ = "0.1.0"
