"""Shared domain types, Bernoulli Jensen-Shannon divergence, belief
thresholding, and the binary observation codec used by every other module.

Everything here is a pure function on immutable values and is safe to call
from any number of concurrent workers.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.special import rel_entr

SHAPES = ("cube", "sphere", "cylinder")
MATERIALS = ("metal", "rubber")
COLORS = ("gray", "red", "blue", "green", "brown", "cyan", "purple", "yellow")

_LN2 = float(np.log(2.0))


class BlicketError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BlicketError, ValueError):
    """An input lies outside its mathematical domain (e.g. probability > 1)."""


class ContractError(BlicketError, ValueError):
    """A structurally malformed value crossed a module boundary."""


class StateError(BlicketError, RuntimeError):
    """An operation was invoked in a state that does not permit it."""


class GenerationError(BlicketError, RuntimeError):
    """Episode generation exhausted its rejection-sampling budget."""


class InconsistencyError(BlicketError, RuntimeError):
    """No hypothesis is consistent with the observations (corrupt input)."""


class ConfigMismatchError(BlicketError, RuntimeError):
    """A recorded artifact was produced under a different configuration."""


def mask_of(members: Iterable[int]) -> int:
    """Pack object indices into a bitmask."""
    mask = 0
    for i in members:
        mask |= 1 << int(i)
    return mask


def members_of(mask: int) -> frozenset[int]:
    """Unpack a bitmask into the set of object indices it contains."""
    out = set()
    i = 0
    m = int(mask)
    while m:
        if m & 1:
            out.add(i)
        m >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class ObjectSpec:
    """Visual identity of one object: a unique shape-material-color triple."""

    shape: str
    material: str
    color: str

    def __post_init__(self):
        if (
            self.shape not in SHAPES
            or self.material not in MATERIALS
            or self.color not in COLORS
        ):
            raise ContractError(
                f"unknown attribute triple {(self.shape, self.material, self.color)}"
            )

    def to_dict(self) -> dict:
        return {"shape": self.shape, "material": self.material, "color": self.color}


@dataclass(frozen=True)
class Panel:
    """One experiment: the objects placed on the machine and its outcome."""

    objects: frozenset[int]
    machine_on: bool

    def __post_init__(self):
        objs = frozenset(int(i) for i in self.objects)
        if any(i < 0 for i in objs):
            raise ContractError(f"negative object index in panel: {sorted(objs)}")
        object.__setattr__(self, "objects", objs)
        object.__setattr__(self, "machine_on", bool(self.machine_on))

    @property
    def mask(self) -> int:
        return mask_of(self.objects)

    def to_dict(self) -> dict:
        return {"objects": sorted(self.objects), "machine_on": self.machine_on}

    @classmethod
    def from_dict(cls, d: dict) -> "Panel":
        return cls(frozenset(d["objects"]), bool(d["machine_on"]))


class Decision(str, Enum):
    """Ternary read-out of one belief entry."""

    BLICKET = "blicket"
    NON_BLICKET = "non-blicket"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Config:
    """Environment configuration; the defaults reproduce the reference setup.

    ``discount`` is informational only: the environment never discounts, the
    value is exposed for external trainers that want the canonical setting.
    """

    num_objects: int = 9
    num_context_panels: int = 4
    max_steps: int = 10
    blicket_count_range: tuple[int, int] = (3, 8)
    context_panel_size_range: tuple[int, int] = (2, 6)
    solve_bonus: float = 20.0
    step_penalty: float = -1.0
    trial_binarization: str = "threshold"  # "threshold" | "sample"
    oracle_cardinality_prior: bool = False
    reward_oracle: str = "post_trial"  # "post_trial" | "pre_trial"
    context_attempt_budget: int = 10_000
    assignment_redraw_budget: int = 100
    discount: float = 0.99

    def __post_init__(self):
        object.__setattr__(self, "blicket_count_range", tuple(self.blicket_count_range))
        object.__setattr__(
            self, "context_panel_size_range", tuple(self.context_panel_size_range)
        )
        if not 1 <= self.num_objects <= 16:
            raise ContractError("num_objects must be in [1, 16] (exhaustive search)")
        if self.max_steps < 1:
            raise ContractError("max_steps must be >= 1")
        lo, hi = self.blicket_count_range
        if not 0 <= lo <= hi <= self.num_objects:
            raise ContractError(f"empty blicket count range {self.blicket_count_range}")
        lo, hi = self.context_panel_size_range
        if not 0 <= lo <= hi <= self.num_objects:
            raise ContractError(
                f"empty context panel size range {self.context_panel_size_range}"
            )
        if self.trial_binarization not in ("threshold", "sample"):
            raise ContractError(f"unknown trial_binarization {self.trial_binarization!r}")
        if self.reward_oracle not in ("post_trial", "pre_trial"):
            raise ContractError(f"unknown reward_oracle {self.reward_oracle!r}")
        if self.context_attempt_budget < 1 or self.assignment_redraw_budget < 1:
            raise ContractError("rejection budgets must be >= 1")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ContractError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def digest(self) -> str:
        """Short stable hash identifying this configuration in artifacts."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass
class Action:
    """Composite action: softened trial proposal plus Blicketness belief."""

    trial: np.ndarray
    belief: np.ndarray

    @classmethod
    def from_flat(cls, values: Sequence[float], num_objects: int = 9) -> "Action":
        arr = np.asarray(values, dtype=float)
        if arr.shape != (2 * num_objects,):
            raise ContractError(
                f"action must be {2 * num_objects} floats (trial then belief), "
                f"got shape {arr.shape}"
            )
        return cls(trial=arr[:num_objects].copy(), belief=arr[num_objects:].copy())

    def to_flat(self) -> list[float]:
        return [float(x) for x in self.trial] + [float(x) for x in self.belief]


def prob_vector(values, num_objects: int, what: str = "vector") -> np.ndarray:
    """Validate and return a probability vector of the expected length."""
    arr = np.asarray(values, dtype=float)
    if arr.shape != (num_objects,):
        raise ContractError(f"{what} must have length {num_objects}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ContractError(f"{what} entries must lie in [0, 1]")
    return arr


def _bernoulli_kl_bits(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    # rel_entr handles the 0*log(0/x) = 0 convention; m > 0 wherever a > 0.
    return (rel_entr(a, m) + rel_entr(1.0 - a, 1.0 - m)) / _LN2


def jsd_bernoulli(p, q):
    """Jensen-Shannon divergence between Bernoulli(p) and Bernoulli(q), base 2.

    Symmetric, zero iff ``p == q``, and bounded by 1 (the base-2 maximum,
    attained on disjoint support). Accepts scalars or equal-shape arrays.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    for name, v in (("p", p), ("q", q)):
        if not np.all(np.isfinite(v)) or np.any(v < 0.0) or np.any(v > 1.0):
            raise DomainError(f"{name} must lie in [0, 1]")
    m = 0.5 * (p + q)
    div = 0.5 * (_bernoulli_kl_bits(p, m) + _bernoulli_kl_bits(q, m))
    # Two float artifacts to undo: cancellation can land a few ulps below
    # zero when p and q are nearly identical, and a subnormal p + q can
    # underflow the midpoint to 0, turning a divergence that is truly below
    # double precision into an infinity.
    div = np.where(np.isfinite(div), div, 0.0)
    div = np.maximum(div, 0.0)
    return float(div) if div.ndim == 0 else div


def belief_divergence(belief, oracle) -> float:
    """Mean per-object JSD between a belief vector and the oracle belief.

    Averaging keeps the aggregate in [0, 1], so the per-step shaping penalty
    stays within one reward unit.
    """
    b = np.asarray(belief, dtype=float)
    o = np.asarray(oracle, dtype=float)
    if b.shape != o.shape or b.ndim != 1:
        raise ContractError(f"belief/oracle length mismatch: {b.shape} vs {o.shape}")
    return float(np.mean(jsd_bernoulli(b, o)))


def threshold_decisions(belief) -> tuple[Decision, ...]:
    """Read each belief entry as blicket (> 0.5), non-blicket (< 0.5), or
    undecided (exactly 0.5). Undecided never counts as a correct answer."""
    out = []
    for v in np.asarray(belief, dtype=float):
        if v > 0.5:
            out.append(Decision.BLICKET)
        elif v < 0.5:
            out.append(Decision.NON_BLICKET)
        else:
            out.append(Decision.UNDECIDED)
    return tuple(out)


def encode_observation(panel: Panel, num_objects: int = 9) -> np.ndarray:
    """Encode a panel as presence bits followed by the machine-status bit."""
    if panel.objects and max(panel.objects) >= num_objects:
        raise ContractError(f"panel references object >= {num_objects}")
    bits = np.zeros(num_objects + 1, dtype=np.int8)
    for i in panel.objects:
        bits[i] = 1
    bits[num_objects] = 1 if panel.machine_on else 0
    return bits


def decode_observation(bits) -> Panel:
    """Inverse of :func:`encode_observation`."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size < 2 or not np.all((arr == 0) | (arr == 1)):
        raise ContractError("observation vector must be binary with length >= 2")
    objects = frozenset(int(i) for i in np.nonzero(arr[:-1])[0])
    return Panel(objects, bool(arr[-1]))
