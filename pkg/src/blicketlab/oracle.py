"""Exhaustive hypothesis bookkeeping: the set of Blicket assignments that
remain consistent with every panel observed so far, the per-object membership
frequencies derived from it, the solvedness test, and the step reward.

A hypothesis is a subset of object indices; with 9 objects the full space is
512 bitmasks, so everything here is exact enumeration, no approximation.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .core import (
    Config,
    InconsistencyError,
    Panel,
    belief_divergence,
    mask_of,
    members_of,
)


class FeasibleSet:
    """Hypotheses (as bitmasks) surviving every observed panel.

    Values are immutable: :meth:`filtered` returns a new set with one more
    panel applied, which keeps filtering monotone by construction.
    """

    __slots__ = ("num_objects", "masks", "observations")

    def __init__(self, num_objects: int, masks, observations: tuple = ()):
        self.num_objects = int(num_objects)
        self.masks = np.asarray(masks, dtype=np.uint32)
        self.observations = tuple(observations)

    @classmethod
    def full(cls, num_objects: int = 9) -> "FeasibleSet":
        return cls(num_objects, np.arange(1 << num_objects, dtype=np.uint32))

    def __len__(self) -> int:
        return int(self.masks.size)

    def filtered(self, panel: Panel) -> "FeasibleSet":
        """Retain exactly the hypotheses consistent with ``panel``."""
        fires = (self.masks & np.uint32(panel.mask)) != 0
        keep = self.masks[fires == panel.machine_on]
        if keep.size == 0:
            raise InconsistencyError(
                f"panel {panel.to_dict()} is inconsistent with every remaining hypothesis"
            )
        return FeasibleSet(self.num_objects, keep, self.observations + (panel,))

    def belief(self, cardinality_range: tuple[int, int] | None = None) -> np.ndarray:
        """Per-object membership frequency across the feasible hypotheses."""
        masks = self.masks
        if cardinality_range is not None:
            lo, hi = cardinality_range
            sizes = self._membership(masks).sum(axis=1)
            masks = masks[(sizes >= lo) & (sizes <= hi)]
            if masks.size == 0:
                raise InconsistencyError(
                    f"no feasible hypothesis with cardinality in [{lo}, {hi}]"
                )
        return self._membership(masks).mean(axis=0)

    def _membership(self, masks: np.ndarray) -> np.ndarray:
        return (masks[:, None] >> np.arange(self.num_objects)) & 1

    def contains(self, members: Iterable[int]) -> bool:
        return bool(np.any(self.masks == np.uint32(mask_of(members))))

    def assignments(self) -> list[frozenset[int]]:
        return [members_of(int(m)) for m in self.masks]


def is_consistent(hypothesis: Iterable[int], panel: Panel) -> bool:
    """The machine fires iff the panel shares at least one object with the
    hypothesis; a hypothesis is consistent when that matches the outcome."""
    return bool(frozenset(hypothesis) & panel.objects) == bool(panel.machine_on)


def filter_feasible(feasible: FeasibleSet, panel: Panel) -> FeasibleSet:
    """Functional alias for :meth:`FeasibleSet.filtered`."""
    return feasible.filtered(panel)


def oracle_belief(
    feasible: FeasibleSet,
    use_cardinality_prior: bool = False,
    cardinality_range: tuple[int, int] = (3, 8),
) -> np.ndarray:
    """Membership frequency per object; optionally restricted to hypotheses
    whose cardinality matches the generative range."""
    return feasible.belief(cardinality_range if use_cardinality_prior else None)


def is_solved(belief, truth: Iterable[int]) -> bool:
    """True iff thresholding the belief recovers the ground truth exactly.

    Entries at exactly 0.5 are undecided and block a solve, so an agent that
    never commits is never credited.
    """
    b = np.asarray(belief, dtype=float)
    want = np.zeros(b.size, dtype=bool)
    want[list(truth)] = True
    return bool(np.all(np.where(want, b > 0.5, b < 0.5)))


def step_reward(solved: bool, belief, oracle, config: Config | None = None) -> float:
    """Reward for one step: the solve bonus alone on success, otherwise the
    step penalty minus the belief-to-oracle divergence (a value in [-2, -1])."""
    cfg = config or Config()
    if solved:
        return float(cfg.solve_bonus)
    return float(cfg.step_penalty - belief_divergence(belief, oracle))
