"""The episodic state machine.

``reset`` generates an episode and returns the encoded context panels;
``step`` consumes a composite action, checks solvedness against the belief
half *before* the proposed trial runs (an agent that already knows the answer
pays no step cost), executes the trial otherwise, and scores the belief
against the oracle. With threshold binarization the whole episode is a
deterministic function of ``(master_seed, episode_index, actions)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .core import (
    Action,
    Config,
    ConfigMismatchError,
    ContractError,
    Panel,
    StateError,
    encode_observation,
    mask_of,
    members_of,
    prob_vector,
)
from .oracle import FeasibleSet, is_solved, oracle_belief, step_reward
from .sampler import DOMAIN_ENV, EpisodeSpec, generate_episode, seeded_rng

TRANSCRIPT_VERSION = 1


class Status(str, Enum):
    AWAITING_FIRST_ACTION = "awaiting_first_action"
    RUNNING = "running"
    SOLVED = "solved"
    EXHAUSTED = "exhausted"


@dataclass
class StepRecord:
    """Everything observable about one step, enough to replay it."""

    trial: list[float]
    belief: list[float]
    executed: Panel | None
    reward: float
    oracle_belief: list[float]
    feasible_count: int
    solved: bool

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "belief": self.belief,
            "executed": None if self.executed is None else self.executed.to_dict(),
            "reward": self.reward,
            "oracle_belief": self.oracle_belief,
            "feasible_count": self.feasible_count,
            "solved": self.solved,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepRecord":
        return cls(
            trial=[float(x) for x in d["trial"]],
            belief=[float(x) for x in d["belief"]],
            executed=None if d["executed"] is None else Panel.from_dict(d["executed"]),
            reward=float(d["reward"]),
            oracle_belief=[float(x) for x in d["oracle_belief"]],
            feasible_count=int(d["feasible_count"]),
            solved=bool(d["solved"]),
        )


@dataclass
class EpisodeTranscript:
    """Complete replayable record of one finished episode."""

    master_seed: int
    episode_index: int
    episode_id: str
    config: Config
    spec: EpisodeSpec
    steps: list[StepRecord]
    status: Status
    total_reward: float
    solve_step: int | None

    def to_dict(self) -> dict:
        return {
            "version": TRANSCRIPT_VERSION,
            "config_digest": self.config.digest(),
            "config": self.config.to_dict(),
            "master_seed": self.master_seed,
            "episode_index": self.episode_index,
            "episode_id": self.episode_id,
            "spec": self.spec.to_dict(),
            "steps": [s.to_dict() for s in self.steps],
            "status": self.status.value,
            "total_reward": self.total_reward,
            "solve_step": self.solve_step,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeTranscript":
        if d.get("version") != TRANSCRIPT_VERSION:
            raise ConfigMismatchError(
                f"unsupported transcript version {d.get('version')!r}"
            )
        config = Config.from_dict(d["config"])
        if config.digest() != d["config_digest"]:
            raise ConfigMismatchError(
                f"transcript config digest {d['config_digest']} does not match "
                f"its configuration ({config.digest()})"
            )
        return cls(
            master_seed=int(d["master_seed"]),
            episode_index=int(d["episode_index"]),
            episode_id=str(d["episode_id"]),
            config=config,
            spec=EpisodeSpec.from_dict(d["spec"]),
            steps=[StepRecord.from_dict(s) for s in d["steps"]],
            status=Status(d["status"]),
            total_reward=float(d["total_reward"]),
            solve_step=None if d["solve_step"] is None else int(d["solve_step"]),
        )


class BlicketEnv:
    """Gym-style environment: ``reset`` then repeated ``step`` until done.

    One instance owns one episode at a time and is single-threaded; run
    parallel evaluations with one instance per worker.
    """

    def __init__(self, config: Config | None = None):
        self.config = config or Config()
        self._spec: EpisodeSpec | None = None
        self._status = Status.EXHAUSTED
        self._feasible: FeasibleSet | None = None
        self._step_index = 0

    @property
    def spec(self) -> EpisodeSpec:
        if self._spec is None:
            raise StateError("reset the environment before inspecting the episode")
        return self._spec

    @property
    def status(self) -> Status:
        return self._status

    @property
    def step_index(self) -> int:
        return self._step_index

    @property
    def feasible_set(self) -> FeasibleSet:
        if self._feasible is None:
            raise StateError("reset the environment before inspecting the feasible set")
        return self._feasible

    def reset(self, master_seed: int, episode_index: int) -> tuple[np.ndarray, str]:
        """Start a fresh episode; returns the encoded context panels (one row
        per panel, in generation order) and the episode id."""
        cfg = self.config
        self._spec = generate_episode(master_seed, episode_index, cfg)
        self._feasible = FeasibleSet.full(cfg.num_objects)
        for panel in self._spec.context:
            self._feasible = self._feasible.filtered(panel)
        self._env_rng = seeded_rng(master_seed, episode_index, DOMAIN_ENV)
        self._truth_mask = mask_of(self._spec.ground_truth)
        self._status = Status.AWAITING_FIRST_ACTION
        self._step_index = 0
        self._steps: list[StepRecord] = []
        self._total_reward = 0.0
        self._solve_step: int | None = None
        self._master_seed = int(master_seed)
        self._episode_index = int(episode_index)
        self._episode_id = f"{master_seed}:{episode_index}:{cfg.digest()}"
        obs = np.stack([encode_observation(p, cfg.num_objects) for p in self._spec.context])
        return obs, self._episode_id

    def _binarize_trial(self, trial: np.ndarray) -> frozenset[int]:
        if self.config.trial_binarization == "threshold":
            selected = trial > 0.5
        else:
            selected = self._env_rng.random(self.config.num_objects) < trial
        return frozenset(int(i) for i in np.nonzero(selected)[0])

    def step(self, action: Action) -> tuple[np.ndarray, float, bool, dict]:
        """Advance one step; returns ``(observation, reward, done, info)``."""
        cfg = self.config
        if self._spec is None or self._status in (Status.SOLVED, Status.EXHAUSTED):
            raise StateError(f"step() called in state {self._status.value!r}")
        trial = prob_vector(action.trial, cfg.num_objects, "trial vector")
        belief = prob_vector(action.belief, cfg.num_objects, "belief vector")

        subset = self._binarize_trial(trial)
        solved = is_solved(belief, self._spec.ground_truth)
        if solved:
            # The proposed trial is not executed; success costs nothing.
            reward = float(cfg.solve_bonus)
            self._status = Status.SOLVED
            self._solve_step = len(self._steps) + 1
            done = True
            executed = None
            oracle = oracle_belief(
                self._feasible, cfg.oracle_cardinality_prior, cfg.blicket_count_range
            )
            obs = np.zeros(cfg.num_objects + 1, dtype=np.int8)
        else:
            machine_on = bool(mask_of(subset) & self._truth_mask)
            executed = Panel(subset, machine_on)
            before = self._feasible
            self._feasible = before.filtered(executed)
            reference = before if cfg.reward_oracle == "pre_trial" else self._feasible
            oracle = oracle_belief(
                reference, cfg.oracle_cardinality_prior, cfg.blicket_count_range
            )
            reward = step_reward(False, belief, oracle, cfg)
            self._step_index += 1
            done = self._step_index >= cfg.max_steps
            self._status = Status.EXHAUSTED if done else Status.RUNNING
            obs = encode_observation(executed, cfg.num_objects)

        info = {
            "oracle_belief": np.asarray(oracle, dtype=float).copy(),
            "feasible_count": len(self._feasible),
            "solved": solved,
        }
        self._steps.append(
            StepRecord(
                trial=[float(x) for x in trial],
                belief=[float(x) for x in belief],
                executed=executed,
                reward=float(reward),
                oracle_belief=[float(x) for x in oracle],
                feasible_count=len(self._feasible),
                solved=solved,
            )
        )
        self._total_reward += float(reward)
        return obs, float(reward), bool(done), info

    def export_transcript(self) -> EpisodeTranscript:
        """Full record of a finished episode; replaying it reproduces every
        reward and the termination."""
        if self._spec is None or self._status not in (Status.SOLVED, Status.EXHAUSTED):
            raise StateError("export_transcript() requires a finished episode")
        return EpisodeTranscript(
            master_seed=self._master_seed,
            episode_index=self._episode_index,
            episode_id=self._episode_id,
            config=self.config,
            spec=self._spec,
            steps=list(self._steps),
            status=self._status,
            total_reward=self._total_reward,
            solve_step=self._solve_step,
        )
