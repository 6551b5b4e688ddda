"""One-agent technique: weighted-sum global score of each recovery action."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import DomainError
from .measurement import (
    CO2_MIN,
    CandidateAction,
    check_candidates,
    check_confidence,
    inverse_attr,
    inverse_co2,
    normalize,
)

WEIGHT_SUM_TOL = 1e-9
# relative tolerance under which two scores count as a tie
SCORE_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class WeightVector:
    w_t: float
    w_h: float
    w_co2: float

    def __post_init__(self):
        parts = (self.w_t, self.w_h, self.w_co2)
        for name, w in zip(("w_t", "w_h", "w_co2"), parts):
            if not math.isfinite(w) or not 0.0 <= w <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {w!r}")
        if abs(sum(parts) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights must sum to 1, got {sum(parts)!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_t, self.w_h, self.w_co2)

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        """Parse ``"w_t,w_h,w_co2"``."""
        try:
            parts = [float(x) for x in text.split(",")]
        except ValueError as exc:
            raise DomainError(f"malformed weights {text!r}") from exc
        if len(parts) != 3:
            raise DomainError(f"expected three comma-separated weights, got {text!r}")
        return cls(*parts)


EQUAL_WEIGHTS = WeightVector(1 / 3, 1 / 3, 1 / 3)
VERTICES = (WeightVector(1.0, 0.0, 0.0), WeightVector(0.0, 1.0, 0.0), WeightVector(0.0, 0.0, 1.0))


class WsmMode(str, Enum):
    FIXED = "fixed"
    SEARCH = "search"


@dataclass(frozen=True)
class ScoredAction:
    action_id: str
    score: float
    weights: WeightVector


@dataclass(frozen=True)
class WsmDecision:
    selected: str
    scored: tuple[ScoredAction, ...]
    mode: WsmMode
    tie_note: str | None = None

    def score_of(self, action_id: str) -> ScoredAction:
        for s in self.scored:
            if s.action_id == action_id:
                return s
        raise KeyError(action_id)


def normalized_terms(
    ctx: Sequence[CandidateAction], co2_min: float = CO2_MIN
) -> dict[str, tuple[float, float, float]]:
    """Map action id to (N(E_t^-1), N(H), N(E_CO2^-1)) computed over ``ctx``."""
    ctx = check_candidates(ctx)
    n_t = normalize([inverse_attr(a.attrs.e_t) for a in ctx])
    n_h = normalize([a.attrs.h for a in ctx])
    n_co2 = normalize([inverse_co2(a.attrs.e_co2, co2_min) for a in ctx])
    return {a.id: (t, h, c) for a, t, h, c in zip(ctx, n_t, n_h, n_co2)}


def _terms_for(action: CandidateAction, ctx: Sequence[CandidateAction]) -> tuple[float, float, float]:
    ctx = check_candidates(ctx)
    if action not in ctx:
        raise DomainError(f"action {action.id!r} is not part of the normalization context")
    return normalized_terms(ctx)[action.id]


def _combine(terms: tuple[float, float, float], epsilon: float, w: WeightVector) -> float:
    n_t, n_h, n_co2 = terms
    return w.w_t * epsilon * n_t + (1.0 - epsilon) * (w.w_h * n_h + w.w_co2 * n_co2)


def _vertex_values(terms: tuple[float, float, float], epsilon: float) -> tuple[float, float, float]:
    n_t, n_h, n_co2 = terms
    return (epsilon * n_t, (1.0 - epsilon) * n_h, (1.0 - epsilon) * n_co2)


def _best_vertex(terms, epsilon) -> tuple[WeightVector, float]:
    values = _vertex_values(terms, epsilon)
    # max() keeps the first maximum, which gives the w_t, w_h, w_co2 tie order
    i = max(range(3), key=lambda k: values[k])
    return VERTICES[i], values[i]


def score(
    action: CandidateAction,
    epsilon: float,
    weights: WeightVector,
    ctx: Sequence[CandidateAction],
) -> ScoredAction:
    """Global score of ``action``; H enters un-inverted."""
    epsilon = check_confidence(epsilon)
    return ScoredAction(action.id, _combine(_terms_for(action, ctx), epsilon, weights), weights)


def best_weights(
    action: CandidateAction, epsilon: float, ctx: Sequence[CandidateAction]
) -> tuple[WeightVector, float]:
    """Weight vector on the simplex maximizing the score of ``action``.

    The score is linear in the weights, so the optimum sits on a vertex.
    """
    epsilon = check_confidence(epsilon)
    return _best_vertex(_terms_for(action, ctx), epsilon)


def _is_tie(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=SCORE_TIE_RTOL, abs_tol=1e-300)


def select_action(
    candidates: Sequence[CandidateAction],
    epsilon: float,
    mode: WsmMode | str = WsmMode.FIXED,
    weights: WeightVector = EQUAL_WEIGHTS,
) -> WsmDecision:
    """Pick the highest scoring candidate.

    Ties go to the smaller ``e_t``, then to the lexicographically smaller id.
    """
    mode = WsmMode(mode)
    candidates = check_candidates(candidates)
    if len(candidates) < 2:
        raise DomainError(f"need at least 2 candidates, got {len(candidates)}")
    epsilon = check_confidence(epsilon)
    terms = normalized_terms(candidates)

    scored = []
    for a in candidates:
        if mode is WsmMode.FIXED:
            scored.append(ScoredAction(a.id, _combine(terms[a.id], epsilon, weights), weights))
        else:
            w, s = _best_vertex(terms[a.id], epsilon)
            scored.append(ScoredAction(a.id, s, w))

    top = max(s.score for s in scored)
    by_id = {a.id: a for a in candidates}
    tied = [s.action_id for s in scored if _is_tie(s.score, top)]
    tied.sort(key=lambda i: (by_id[i].attrs.e_t, i))
    note = None
    if len(tied) > 1:
        note = f"tie between {', '.join(tied)}; broken by smaller e_t then id"
    return WsmDecision(tied[0], tuple(scored), mode, note)
