"""Attribute vectors, AI confidence, max-normalization and online re-estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import DegenerateInputError, DomainError

H_MIN = 1.0
CO2_MIN = 1e-6
DEFAULT_SMOOTHING = 0.5


class ActionKind(str, Enum):
    LEARNING = "Learning"
    OPERATING = "Operating"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class AttributeVector:
    """Estimated run time (s), CO2 footprint (g CO2e) and human interactions of an action.

    ``h`` is a count for a single execution but estimates averaged over
    several executions are fractional, so any finite real >= 0 is accepted.
    """

    e_t: float
    e_co2: float
    h: float

    def __post_init__(self):
        e_t = _finite("e_t", self.e_t)
        e_co2 = _finite("e_co2", self.e_co2)
        h = _finite("h", self.h)
        if e_t <= 0:
            raise DomainError(f"e_t must be > 0, got {e_t!r}")
        if e_co2 < 0:
            raise DomainError(f"e_co2 must be >= 0, got {e_co2!r}")
        if h < 0:
            raise DomainError(f"h must be >= 0, got {h!r}")
        object.__setattr__(self, "e_t", e_t)
        object.__setattr__(self, "e_co2", e_co2)
        object.__setattr__(self, "h", h)


def check_confidence(epsilon: float) -> float:
    epsilon = _finite("epsilon", epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    return epsilon


@dataclass(frozen=True)
class CandidateAction:
    id: str
    kind: ActionKind
    attrs: AttributeVector

    def __post_init__(self):
        object.__setattr__(self, "kind", ActionKind(self.kind))


def check_candidates(candidates: Iterable[CandidateAction]) -> tuple[CandidateAction, ...]:
    """Validate a normalization context: non-empty with unique ids."""
    candidates = tuple(candidates)
    if not candidates:
        raise DomainError("candidate set is empty")
    ids = [c.id for c in candidates]
    if len(set(ids)) != len(ids):
        raise DomainError(f"duplicate action ids in candidate set: {ids}")
    return candidates


def normalize(values: Sequence[float]) -> list[float]:
    """Divide every value by the maximum, so the largest maps to exactly 1."""
    values = [float(v) for v in values]
    if not values:
        raise DomainError("cannot normalize an empty sequence")
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"cannot normalize non-finite value {v!r}")
        if v < 0:
            raise DomainError(f"cannot normalize negative value {v!r}")
    top = max(values)
    if top <= 0:
        raise DegenerateInputError("cannot normalize an all-zero sequence")
    return [v / top for v in values]


def inverse_attr(x: float, floor: float = 0.0) -> float:
    """Return ``1/x`` after raising ``x`` to ``floor``."""
    x = max(_finite("x", x), floor)
    if x <= 0:
        raise DomainError(f"cannot invert non-positive value {x!r}")
    return 1.0 / x


def inverse_h(h: float, h_min: float = H_MIN) -> float:
    return inverse_attr(h, h_min)


def inverse_co2(e_co2: float, co2_min: float = CO2_MIN) -> float:
    return inverse_attr(e_co2, co2_min)


def update_estimate(prev: float, observed: float, smoothing: float = DEFAULT_SMOOTHING) -> float:
    """Exponentially weighted moving average step."""
    prev = _finite("prev", prev)
    observed = _finite("observed", observed)
    smoothing = _finite("smoothing", smoothing)
    if not 0.0 <= smoothing <= 1.0:
        raise DomainError(f"smoothing must lie in [0, 1], got {smoothing!r}")
    if smoothing == 1.0:
        return observed
    if smoothing == 0.0:
        return prev
    value = (1.0 - smoothing) * prev + smoothing * observed
    # rounding can push the blend a hair outside its endpoints
    return min(max(value, min(prev, observed)), max(prev, observed))


def update_attributes(
    prev: AttributeVector, observed: AttributeVector, smoothing: float = DEFAULT_SMOOTHING
) -> AttributeVector:
    return AttributeVector(
        e_t=update_estimate(prev.e_t, observed.e_t, smoothing),
        e_co2=update_estimate(prev.e_co2, observed.e_co2, smoothing),
        h=update_estimate(prev.h, observed.h, smoothing),
    )
