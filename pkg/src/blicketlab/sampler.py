"""Seed-deterministic episode generation.

An episode is 9 distinct object specs, a hidden Blicket assignment, and 4
context panels accepted by rejection sampling against four constraints:

  C1  informative mix: at least one activated and one inactive panel;
  C2  unsolvable from context: the oracle belief over the context keeps at
      least one coordinate strictly inside (0, 1);
  C3  anti-covariation: co-occurrence counting misclassifies >= 1 object;
  C4  query richness: a screening-off candidate exists (a non-Blicket seen
      only in activated panels alongside at least one Blicket).

Panel sizes and subsets are uniform before rejection. Identical
``(master_seed, episode_index)`` keys yield identical episodes regardless of
evaluation order or parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .core import (
    COLORS,
    Config,
    GenerationError,
    MATERIALS,
    ObjectSpec,
    Panel,
    SHAPES,
    mask_of,
    members_of,
)
from .oracle import FeasibleSet

# Stream domains keep the generation, environment, and agent RNG streams of
# one episode independent of each other.
DOMAIN_GENERATION = 0
DOMAIN_ENV = 1
DOMAIN_AGENT = 2

_CONTEXT_BATCH = 128


def seeded_rng(*key: int) -> np.random.Generator:
    """Deterministic PCG64 stream addressed by a structured integer key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


class ContextExhaustedError(GenerationError):
    """No admissible context found for one assignment within the panel budget."""


class QueryLabel(str, Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"
    SCREENING_OFF = "screening-off"
    BACKWARD_BLOCKING = "backward-blocking"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class EpisodeSpec:
    """Replayable description of one generated episode."""

    seed: int
    episode_index: int
    objects: tuple[ObjectSpec, ...]
    ground_truth: frozenset[int]
    context: tuple[Panel, ...]
    query_labels: tuple[QueryLabel, ...]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "episode_index": self.episode_index,
            "objects": [o.to_dict() for o in self.objects],
            "ground_truth": sorted(self.ground_truth),
            "context": [p.to_dict() for p in self.context],
            "query_labels": [label.value for label in self.query_labels],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EpisodeSpec":
        return cls(
            seed=int(d["seed"]),
            episode_index=int(d["episode_index"]),
            objects=tuple(ObjectSpec(**o) for o in d["objects"]),
            ground_truth=frozenset(d["ground_truth"]),
            context=tuple(Panel.from_dict(p) for p in d["context"]),
            query_labels=tuple(QueryLabel(s) for s in d["query_labels"]),
        )


def sample_objects(rng: np.random.Generator, num_objects: int = 9) -> tuple[ObjectSpec, ...]:
    """Draw distinct shape-material-color triples uniformly without replacement."""
    pool = len(SHAPES) * len(MATERIALS) * len(COLORS)
    per_shape = len(MATERIALS) * len(COLORS)
    idx = rng.choice(pool, size=num_objects, replace=False)
    return tuple(
        ObjectSpec(
            SHAPES[i // per_shape],
            MATERIALS[(i % per_shape) // len(COLORS)],
            COLORS[i % len(COLORS)],
        )
        for i in map(int, idx)
    )


def sample_assignment(
    rng: np.random.Generator,
    num_objects: int = 9,
    count_range: tuple[int, int] = (3, 8),
) -> frozenset[int]:
    """Uniform Blicket count in ``count_range``, then a uniform subset."""
    n = int(rng.integers(count_range[0], count_range[1] + 1))
    return frozenset(int(i) for i in rng.choice(num_objects, size=n, replace=False))


def covariation_classification(panels: Sequence[Panel], num_objects: int = 9) -> np.ndarray:
    """The co-occurrence heuristic: call an object a Blicket iff it appears in
    more activated than inactive panels; unseen objects are non-Blickets."""
    activated = np.zeros(num_objects, dtype=int)
    inactive = np.zeros(num_objects, dtype=int)
    for p in panels:
        counts = activated if p.machine_on else inactive
        for i in p.objects:
            counts[i] += 1
    return activated > inactive


def screening_off_candidates(
    panels: Sequence[Panel], truth: frozenset[int], num_objects: int = 9
) -> list[int]:
    """Non-Blickets that appear only in activated panels, co-present with at
    least one Blicket: their apparent evidence is explained away."""
    out = []
    for x in range(num_objects):
        if x in truth:
            continue
        containing = [p for p in panels if x in p.objects]
        if not containing:
            continue
        if all(p.machine_on for p in containing) and any(
            p.objects & truth for p in containing
        ):
            out.append(x)
    return out


def _context_belief(panels: Sequence[Panel], num_objects: int) -> np.ndarray:
    fs = FeasibleSet.full(num_objects)
    for p in panels:
        fs = fs.filtered(p)
    return fs.belief()


def context_is_admissible(
    panels: Sequence[Panel], truth: frozenset[int], num_objects: int = 9
) -> bool:
    """Check constraints C1-C4 for a candidate context."""
    on_flags = [p.machine_on for p in panels]
    if not (any(on_flags) and not all(on_flags)):
        return False
    probs = _context_belief(panels, num_objects)
    if not np.any((probs > 0.0) & (probs < 1.0)):
        return False
    truth_vec = np.zeros(num_objects, dtype=bool)
    truth_vec[list(truth)] = True
    if np.array_equal(covariation_classification(panels, num_objects), truth_vec):
        return False
    if not screening_off_candidates(panels, truth, num_objects):
        return False
    return True


def sample_context(
    rng: np.random.Generator, truth: frozenset[int], config: Config | None = None
) -> tuple[Panel, ...]:
    """Rejection-sample context panels for one assignment.

    Draws panel sets (uniform size, uniform subset, outcome derived from the
    truth) until one passes C1-C4 or the attempt budget is spent. Assignments
    with fewer than ``min_panel_size + 1`` non-Blickets are rejected up front:
    any inactive panel must consist entirely of non-Blickets, so C1 pins at
    least ``min_panel_size`` of them inside an inactive panel, and C4 then
    needs one more outside every inactive panel. Burning the panel budget on
    such assignments would change nothing but the runtime.
    """
    cfg = config or Config()
    n = cfg.num_objects
    k = cfg.num_context_panels
    size_lo, size_hi = cfg.context_panel_size_range
    if n - len(truth) < size_lo + 1:
        raise ContextExhaustedError(
            f"assignment {sorted(truth)} leaves {n - len(truth)} non-Blickets; "
            f"constraints C1+C4 need at least {size_lo + 1}"
        )

    truth_mask = mask_of(truth)
    weights = 1 << np.arange(n, dtype=np.int64)
    drawn = 0
    while drawn < cfg.context_attempt_budget:
        batch = min(_CONTEXT_BATCH, cfg.context_attempt_budget - drawn)
        drawn += batch
        sizes = rng.integers(size_lo, size_hi + 1, size=(batch, k))
        ranks = rng.random((batch, k, n)).argsort(axis=-1).argsort(axis=-1)
        member = ranks < sizes[..., None]
        masks = (member * weights).sum(axis=-1)
        on = (masks & truth_mask) != 0
        candidates = np.nonzero(on.any(axis=1) & ~on.all(axis=1))[0]
        for b in candidates:
            panels = tuple(
                Panel(members_of(int(masks[b, j])), bool(on[b, j])) for j in range(k)
            )
            if context_is_admissible(panels, truth, n):
                return panels
    raise ContextExhaustedError(
        f"no admissible context for assignment {sorted(truth)} "
        f"within {cfg.context_attempt_budget} draws"
    )


def classify_query_types(
    context: Sequence[Panel], truth: frozenset[int], num_objects: int = 9
) -> tuple[QueryLabel, ...]:
    """Label each object by the kind of evidence the context carries for it.

    direct             provable from a single panel: alone on an activated
                       machine, or member of an inactive panel;
    indirect           pinned by the cross-panel feasible set only;
    screening-off      a non-Blicket whose activated panels each came after a
                       companion was already proven a Blicket;
    backward-blocking  shared an activated panel with a companion only later
                       proven by a singleton activated panel, so its own
                       evidence is retrospectively demoted;
    undetermined       oracle probability strictly inside (0, 1), none of the
                       above.
    """
    panels = tuple(context)
    # prefix_beliefs[j] = oracle belief after panels[0..j-1].
    prefix_beliefs = []
    fs = FeasibleSet.full(num_objects)
    prefix_beliefs.append(fs.belief())
    for p in panels:
        fs = fs.filtered(p)
        prefix_beliefs.append(fs.belief())
    full = prefix_beliefs[-1]

    singleton_on: dict[int, int] = {}
    for j, p in enumerate(panels):
        if p.machine_on and len(p.objects) == 1:
            y = next(iter(p.objects))
            singleton_on.setdefault(y, j)

    labels = []
    for x in range(num_objects):
        containing = [j for j, p in enumerate(panels) if x in p.objects]
        if x in singleton_on or any(not panels[j].machine_on for j in containing):
            labels.append(QueryLabel.DIRECT)
            continue
        if full[x] == 0.0 or full[x] == 1.0:
            labels.append(QueryLabel.INDIRECT)
            continue
        # Interior probability from here on; every containing panel is
        # activated (an inactive one would have made the object direct).
        companions = [(j, panels[j].objects - {x}) for j in containing]
        if x not in truth and any(
            any(prefix_beliefs[j][y] == 1.0 for y in others)
            for j, others in companions
        ):
            labels.append(QueryLabel.SCREENING_OFF)
            continue
        if any(
            len(others) >= 1 and any(singleton_on.get(y, -1) > j for y in others)
            for j, others in companions
        ):
            labels.append(QueryLabel.BACKWARD_BLOCKING)
            continue
        labels.append(QueryLabel.UNDETERMINED)
    return tuple(labels)


def generate_episode(
    master_seed: int, episode_index: int, config: Config | None = None
) -> EpisodeSpec:
    """Compose the samplers under one seeded stream; fully deterministic."""
    cfg = config or Config()
    rng = seeded_rng(master_seed, episode_index, DOMAIN_GENERATION)
    objects = sample_objects(rng, cfg.num_objects)
    last_exc = None
    for _ in range(cfg.assignment_redraw_budget):
        truth = sample_assignment(rng, cfg.num_objects, cfg.blicket_count_range)
        try:
            context = sample_context(rng, truth, cfg)
            break
        except ContextExhaustedError as exc:
            last_exc = exc
    else:
        raise GenerationError(
            f"no admissible assignment after {cfg.assignment_redraw_budget} re-draws "
            f"(master_seed={master_seed}, episode_index={episode_index})"
        ) from last_exc
    labels = classify_query_types(context, truth, cfg.num_objects)
    return EpisodeSpec(
        seed=int(master_seed),
        episode_index=int(episode_index),
        objects=objects,
        ground_truth=truth,
        context=context,
        query_labels=labels,
    )
