"""Batch evaluation: accuracy and reward over a seeded episode stream, with
steps-to-solve and trial-size analytics.

Episodes are embarrassingly parallel; per-episode seeding makes the report a
deterministic reduction ordered by episode index, so any worker count yields
byte-identical output.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .agents import AGENT_NAMES, HeuristicAgent, make_agent
from .core import Config, ContractError, decode_observation
from .env import BlicketEnv, EpisodeTranscript
from .sampler import QueryLabel

_Z95 = 1.959963984540054  # two-sided 95% normal quantile


def accuracy_ci(p: float, n: int) -> tuple[float, float]:
    """95% normal-approximation interval for a proportion."""
    if n <= 0:
        return (0.0, 1.0)
    half = _Z95 * float(np.sqrt(p * (1.0 - p) / n))
    return (max(0.0, p - half), min(1.0, p + half))


def mean_ci(values: np.ndarray) -> tuple[float, float]:
    """95% normal-approximation interval for a mean."""
    n = values.size
    m = float(values.mean()) if n else 0.0
    if n < 2:
        return (m, m)
    half = _Z95 * float(values.std(ddof=1) / np.sqrt(n))
    return (m - half, m + half)


@dataclass
class EpisodeSummary:
    """The per-episode facts the report is built from."""

    solved: bool
    solve_step: int | None
    total_reward: float
    first_reward: float
    first_solved: bool
    trial_sizes: list[int]
    query_labels: list[str]

    @classmethod
    def from_transcript(cls, t: EpisodeTranscript) -> "EpisodeSummary":
        return cls(
            solved=t.status.value == "solved",
            solve_step=t.solve_step,
            total_reward=t.total_reward,
            first_reward=t.steps[0].reward,
            first_solved=t.steps[0].solved,
            trial_sizes=[len(s.executed.objects) for s in t.steps if s.executed is not None],
            query_labels=[label.value for label in t.spec.query_labels],
        )


@dataclass
class MetricsReport:
    agent: str
    episodes: int
    master_seed: int
    agent_seed: int
    config_digest: str
    episode_accuracy: float
    episode_accuracy_ci95: tuple[float, float]
    episode_reward: float
    episode_reward_ci95: tuple[float, float]
    context_accuracy: float
    context_accuracy_ci95: tuple[float, float]
    context_reward: float
    context_reward_ci95: tuple[float, float]
    steps_to_solve: dict[str, int]
    objects_per_trial: dict[str, dict[str, float]]
    query_labels: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "episodes": self.episodes,
            "master_seed": self.master_seed,
            "agent_seed": self.agent_seed,
            "config_digest": self.config_digest,
            "episode_accuracy": self.episode_accuracy,
            "episode_accuracy_ci95": list(self.episode_accuracy_ci95),
            "episode_reward": self.episode_reward,
            "episode_reward_ci95": list(self.episode_reward_ci95),
            "context_accuracy": self.context_accuracy,
            "context_accuracy_ci95": list(self.context_accuracy_ci95),
            "context_reward": self.context_reward,
            "context_reward_ci95": list(self.context_reward_ci95),
            "steps_to_solve": dict(self.steps_to_solve),
            "objects_per_trial": {k: dict(v) for k, v in self.objects_per_trial.items()},
            "query_labels": dict(self.query_labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(
            agent=d["agent"],
            episodes=d["episodes"],
            master_seed=d["master_seed"],
            agent_seed=d["agent_seed"],
            config_digest=d["config_digest"],
            episode_accuracy=d["episode_accuracy"],
            episode_accuracy_ci95=tuple(d["episode_accuracy_ci95"]),
            episode_reward=d["episode_reward"],
            episode_reward_ci95=tuple(d["episode_reward_ci95"]),
            context_accuracy=d["context_accuracy"],
            context_accuracy_ci95=tuple(d["context_accuracy_ci95"]),
            context_reward=d["context_reward"],
            context_reward_ci95=tuple(d["context_reward_ci95"]),
            steps_to_solve=dict(d["steps_to_solve"]),
            objects_per_trial={k: dict(v) for k, v in d["objects_per_trial"].items()},
            query_labels=dict(d["query_labels"]),
        )

    def json_bytes(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2) + "\n").encode()


def run_episode(agent: HeuristicAgent, env: BlicketEnv, master_seed: int, episode_index: int) -> EpisodeTranscript:
    """Drive one agent through one episode and return the transcript."""
    context_obs, _ = env.reset(master_seed, episode_index)
    agent.begin_episode([decode_observation(row) for row in context_obs], episode_index)
    done = False
    while not done:
        obs, _, done, info = env.step(agent.act())
        if not done:
            agent.observe(decode_observation(obs))
    return env.export_transcript()


def _run_episode_batch(args) -> list[tuple[int, EpisodeSummary, dict | None]]:
    agent_name, agent_seed, agent_kwargs, master_seed, config_dict, indices, keep = args
    cfg = Config.from_dict(config_dict)
    env = BlicketEnv(cfg)
    agent = make_agent(agent_name, seed=agent_seed, num_objects=cfg.num_objects, **agent_kwargs)
    out = []
    for i in indices:
        transcript = run_episode(agent, env, master_seed, int(i))
        summary = EpisodeSummary.from_transcript(transcript)
        out.append((int(i), summary, transcript.to_dict() if keep else None))
    return out


def evaluate(
    agent: str,
    master_seed: int,
    episodes: int,
    config: Config | None = None,
    agent_seed: int | None = None,
    agent_kwargs: dict | None = None,
    workers: int = 1,
    transcripts_path=None,
) -> MetricsReport:
    """Run ``episodes`` full episodes and aggregate the benchmark metrics.

    ``context_accuracy`` counts episodes whose *first* emitted belief already
    solves the problem; ``context_reward`` is the mean first-step reward.
    """
    if episodes < 1:
        raise ContractError("episodes must be >= 1")
    if agent not in AGENT_NAMES:
        raise ContractError(f"unknown agent {agent!r}; choose from {', '.join(AGENT_NAMES)}")
    cfg = config or Config()
    aseed = master_seed if agent_seed is None else agent_seed
    kwargs = agent_kwargs or {}
    keep = transcripts_path is not None

    indices = np.arange(episodes)
    if workers <= 1:
        chunks = [indices]
    else:
        chunks = [c for c in np.array_split(indices, workers) if c.size]
    jobs = [
        (agent, aseed, kwargs, master_seed, cfg.to_dict(), chunk.tolist(), keep)
        for chunk in chunks
    ]
    if len(jobs) == 1:
        results = [_run_episode_batch(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_episode_batch, jobs))

    rows = sorted((row for batch in results for row in batch), key=lambda r: r[0])
    summaries = [r[1] for r in rows]

    if keep:
        with open(transcripts_path, "w", encoding="utf-8") as fh:
            for _, _, tdict in rows:
                fh.write(json.dumps(tdict, separators=(",", ":")) + "\n")

    return _assemble_report(agent, aseed, master_seed, cfg, summaries)


def _assemble_report(
    agent: str, agent_seed: int, master_seed: int, cfg: Config, summaries: list[EpisodeSummary]
) -> MetricsReport:
    n = len(summaries)
    solved = np.array([s.solved for s in summaries], dtype=bool)
    totals = np.array([s.total_reward for s in summaries], dtype=float)
    firsts = np.array([s.first_reward for s in summaries], dtype=float)
    first_solved = np.array([s.first_solved for s in summaries], dtype=bool)

    episode_acc = float(solved.mean())
    context_acc = float(first_solved.mean())

    label_counts = Counter()
    for s in summaries:
        label_counts.update(s.query_labels)

    return MetricsReport(
        agent=agent,
        episodes=n,
        master_seed=int(master_seed),
        agent_seed=int(agent_seed),
        config_digest=cfg.digest(),
        episode_accuracy=episode_acc,
        episode_accuracy_ci95=accuracy_ci(episode_acc, n),
        episode_reward=float(totals.mean()),
        episode_reward_ci95=mean_ci(totals),
        context_accuracy=context_acc,
        context_accuracy_ci95=accuracy_ci(context_acc, n),
        context_reward=float(firsts.mean()),
        context_reward_ci95=mean_ci(firsts),
        steps_to_solve=_steps_histogram_from_summaries(summaries, cfg.max_steps),
        objects_per_trial=_trial_sizes_from_summaries(summaries),
        query_labels={label.value: label_counts.get(label.value, 0) for label in QueryLabel},
    )


def _steps_histogram_from_summaries(summaries: Sequence[EpisodeSummary], max_steps: int) -> dict[str, int]:
    hist = {str(k): 0 for k in range(1, max_steps + 1)}
    hist["unsolved"] = 0
    for s in summaries:
        if s.solved:
            hist[str(s.solve_step)] += 1
        else:
            hist["unsolved"] += 1
    return hist


def _quartiles(sizes: list[int]) -> dict[str, float]:
    arr = np.asarray(sizes, dtype=float)
    q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
    return {
        "count": int(arr.size),
        "min": float(arr.min()),
        "q1": float(q1),
        "median": float(med),
        "q3": float(q3),
        "max": float(arr.max()),
    }


def _trial_sizes_from_summaries(summaries: Sequence[EpisodeSummary]) -> dict[str, dict[str, float]]:
    by_step: dict[int, list[int]] = {}
    for s in summaries:
        for step, size in enumerate(s.trial_sizes, start=1):
            by_step.setdefault(step, []).append(size)
    return {str(step): _quartiles(sizes) for step, sizes in sorted(by_step.items())}


def steps_histogram(transcripts: Sequence[EpisodeTranscript]) -> dict[str, int]:
    """Count solved episodes by solving step, unsolved ones in their own bucket."""
    if not transcripts:
        return {}
    summaries = [EpisodeSummary.from_transcript(t) for t in transcripts]
    max_steps = max(t.config.max_steps for t in transcripts)
    return _steps_histogram_from_summaries(summaries, max_steps)


def trial_size_stats(transcripts: Sequence[EpisodeTranscript]) -> dict[str, dict[str, float]]:
    """Quartile summary of executed trial sizes per step index."""
    summaries = [EpisodeSummary.from_transcript(t) for t in transcripts]
    return _trial_sizes_from_summaries(summaries)


def _flatten_report(d: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows: list[tuple[str, object]] = []
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten_report(value, prefix=f"{name}."))
        elif isinstance(value, list):
            for i, v in enumerate(value):
                rows.append((f"{name}.{i}", v))
        else:
            rows.append((name, value))
    return rows


def write_report(report: MetricsReport, fmt: str, path) -> None:
    """Write a report as pretty JSON or as a flat metric,value CSV."""
    if fmt == "json":
        with open(path, "wb") as fh:
            fh.write(report.json_bytes())
    elif fmt == "csv":
        rows = _flatten_report(report.to_dict())
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("metric,value\n")
            for name, value in rows:
                fh.write(f"{name},{value!r}\n" if isinstance(value, float) else f"{name},{value}\n")
    else:
        raise ContractError(f"unknown report format {fmt!r} (expected json or csv)")
