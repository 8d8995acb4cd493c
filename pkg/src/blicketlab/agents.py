"""The five scripted baseline agents behind a single contract.

Each agent is constructed once with a base seed and re-seeded per episode
from ``(seed, episode_index)``, so replaying an episode with the same seed
and history always reproduces the same actions, independent of how episodes
are scheduled across workers.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import Action, ContractError, Panel
from .oracle import FeasibleSet
from .sampler import DOMAIN_AGENT, seeded_rng

UNKNOWN, BLICKET, NON_BLICKET = 0, 1, 2


class HeuristicAgent:
    """Contract: ``begin_episode(context)`` once, then alternate ``act`` /
    ``observe`` with the executed panels."""

    name = "heuristic"

    def __init__(self, seed: int = 0, num_objects: int = 9):
        self.seed = int(seed)
        self.num_objects = int(num_objects)

    def begin_episode(self, context: Sequence[Panel], episode_index: int) -> None:
        self._rng = seeded_rng(self.seed, int(episode_index), DOMAIN_AGENT)
        self._panels: list[Panel] = []
        self._start()
        for panel in context:
            self.observe(panel)

    def observe(self, panel: Panel) -> None:
        self._panels.append(panel)
        self._ingest(panel)

    def act(self) -> Action:
        raise NotImplementedError

    def _start(self) -> None:
        pass

    def _ingest(self, panel: Panel) -> None:
        pass


class RandomAgent(HeuristicAgent):
    """Ignores all observations; samples both action halves i.i.d. uniform."""

    name = "random"

    def act(self) -> Action:
        return Action(
            trial=self._rng.random(self.num_objects),
            belief=self._rng.random(self.num_objects),
        )


class BayesAgent(HeuristicAgent):
    """Bernoulli naive Bayes over the panels seen so far.

    Each panel is a training row (presence bits -> machine status). The
    belief for object i is the posterior probability of "machine on" for a
    synthetic panel containing only object i, with Laplace smoothing (alpha=1)
    on the feature likelihoods and maximum-likelihood class priors. Trials
    are uniform random subsets.
    """

    name = "bayes"

    def act(self) -> Action:
        X = np.array(
            [[1.0 if i in p.objects else 0.0 for i in range(self.num_objects)] for p in self._panels]
        )
        y = np.array([p.machine_on for p in self._panels], dtype=bool)
        n_on = int(y.sum())
        n_off = int(len(y) - n_on)
        if n_on == 0:
            belief = np.zeros(self.num_objects)
        elif n_off == 0:
            belief = np.ones(self.num_objects)
        else:
            theta_on = (X[y].sum(axis=0) + 1.0) / (n_on + 2.0)
            theta_off = (X[~y].sum(axis=0) + 1.0) / (n_off + 2.0)
            # log-likelihood of the one-hot input "only object i present"
            ll_on = (
                np.log(n_on / len(y))
                + np.log(theta_on)
                + np.log(1.0 - theta_on).sum()
                - np.log(1.0 - theta_on)
            )
            ll_off = (
                np.log(n_off / len(y))
                + np.log(theta_off)
                + np.log(1.0 - theta_off).sum()
                - np.log(1.0 - theta_off)
            )
            belief = 1.0 / (1.0 + np.exp(ll_off - ll_on))
        return Action(trial=self._rng.random(self.num_objects), belief=belief)


class NaiveAgent(HeuristicAgent):
    """Tests one object at a time and records only certain conclusions.

    Evidence rules: the sole object of an activated panel is a Blicket; every
    member of an inactive panel is a non-Blicket. With
    ``use_inactive_evidence=False`` the second rule is limited to the agent's
    own singleton tests, i.e. multi-object inactive panels teach it nothing.
    Beliefs are 1/0 for settled objects and 0.5 for unknown ones, so the
    agent never solves by guessing.
    """

    name = "naive"

    def __init__(self, seed: int = 0, num_objects: int = 9, use_inactive_evidence: bool = True):
        super().__init__(seed, num_objects)
        self.use_inactive_evidence = bool(use_inactive_evidence)

    def _start(self) -> None:
        self._knowledge = np.full(self.num_objects, UNKNOWN, dtype=np.int8)
        self._tested: set[int] = set()

    def _ingest(self, panel: Panel) -> None:
        if panel.machine_on:
            if len(panel.objects) == 1:
                self._knowledge[next(iter(panel.objects))] = BLICKET
        elif self.use_inactive_evidence or len(panel.objects) == 1:
            for i in panel.objects:
                self._knowledge[i] = NON_BLICKET

    def act(self) -> Action:
        pool = [
            i
            for i in range(self.num_objects)
            if self._knowledge[i] == UNKNOWN and i not in self._tested
        ]
        trial = np.zeros(self.num_objects)
        if pool:
            pick = int(self._rng.choice(pool))
            self._tested.add(pick)
            trial[pick] = 1.0
        belief = np.full(self.num_objects, 0.5)
        belief[self._knowledge == BLICKET] = 1.0
        belief[self._knowledge == NON_BLICKET] = 0.0
        return Action(trial=trial, belief=belief)


class SearchRandomAgent(HeuristicAgent):
    """Belief = membership frequency over all assignments consistent with the
    observed panels; trials are uniform random subsets."""

    name = "search-random"

    def _start(self) -> None:
        self._feasible = FeasibleSet.full(self.num_objects)

    def _ingest(self, panel: Panel) -> None:
        self._feasible = self._feasible.filtered(panel)

    def _search_belief(self) -> np.ndarray:
        return self._feasible.belief()

    def act(self) -> Action:
        return Action(trial=self._rng.random(self.num_objects), belief=self._search_belief())


class SearchNaiveAgent(SearchRandomAgent):
    """Search-based belief with a one-object trial policy: always test the
    most uncertain undetermined object (closest to 0.5, ties broken by the
    lowest index); once every belief is 0 or 1 it proposes empty trials."""

    name = "search-naive"

    def act(self) -> Action:
        belief = self._search_belief()
        trial = np.zeros(self.num_objects)
        interior = np.nonzero((belief > 0.0) & (belief < 1.0))[0]
        if interior.size:
            pick = interior[np.argmin(np.abs(belief[interior] - 0.5))]
            trial[int(pick)] = 1.0
        return Action(trial=trial, belief=belief)


AGENT_TYPES = {
    cls.name: cls
    for cls in (RandomAgent, BayesAgent, NaiveAgent, SearchRandomAgent, SearchNaiveAgent)
}
AGENT_NAMES = tuple(AGENT_TYPES)


def make_agent(name: str, seed: int = 0, **kwargs) -> HeuristicAgent:
    try:
        cls = AGENT_TYPES[name]
    except KeyError:
        raise ContractError(
            f"unknown agent {name!r}; choose from {', '.join(AGENT_NAMES)}"
        ) from None
    return cls(seed=seed, **kwargs)
