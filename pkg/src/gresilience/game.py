"""Two-agent technique: the 2x2 coordination game between a resilience player
(rows, mixes with probability ``q`` on a1) and a greenness player (columns,
mixes with probability ``p`` on a1)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .measurement import (
    CO2_MIN,
    H_MIN,
    CandidateAction,
    check_confidence,
    inverse_attr,
    inverse_co2,
    inverse_h,
)

MATCHED = 2
MISMATCHED = 1
DENOM_TOL = 1e-12
DEFAULT_MAX_ROUNDS = 10

Cell = tuple[int, int]


def _check_alpha(alpha: int) -> int:
    if alpha not in (MISMATCHED, MATCHED):
        raise DomainError(f"alpha must be 1 or 2, got {alpha!r}")
    return alpha


def resilience_payoff(action: CandidateAction, epsilon: float, alpha: int) -> float:
    return check_confidence(epsilon) * _check_alpha(alpha) * inverse_attr(action.attrs.e_t)


def greenness_payoff(
    action: CandidateAction,
    epsilon: float,
    alpha: int,
    h_min: float = H_MIN,
    co2_min: float = CO2_MIN,
) -> float:
    eps = check_confidence(epsilon)
    return (1.0 - eps) * _check_alpha(alpha) * inverse_h(action.attrs.h, h_min) * inverse_co2(
        action.attrs.e_co2, co2_min
    )


@dataclass(frozen=True)
class PayoffMatrix:
    """``cells[i][j]`` holds (payoff to P_r, payoff to P_g) when P_r plays
    action ``i`` and P_g plays action ``j``."""

    cells: tuple[tuple[tuple[float, float], tuple[float, float]], tuple[tuple[float, float], tuple[float, float]]]
    ids: tuple[str, str] = ("a1", "a2")
    e_t: tuple[float, float] | None = None

    def __post_init__(self):
        cells = tuple(tuple((float(r), float(g)) for r, g in row) for row in self.cells)
        if len(cells) != 2 or any(len(row) != 2 for row in cells):
            raise DomainError("payoff matrix must be 2x2")
        for row in cells:
            for pair in row:
                for v in pair:
                    if not math.isfinite(v) or v < 0:
                        raise DomainError(f"payoffs must be finite and >= 0, got {v!r}")
        if self.ids[0] == self.ids[1]:
            raise DomainError(f"row/column actions must differ, got {self.ids}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "ids", tuple(self.ids))

    def r(self, i: int, j: int) -> float:
        return self.cells[i][j][0]

    def g(self, i: int, j: int) -> float:
        return self.cells[i][j][1]

    @classmethod
    def from_arrays(cls, r, g, ids=("a1", "a2"), e_t=None) -> "PayoffMatrix":
        r = np.asarray(r, dtype=float)
        g = np.asarray(g, dtype=float)
        cells = tuple(tuple((r[i, j], g[i, j]) for j in range(2)) for i in range(2))
        return cls(cells, tuple(ids), e_t)

    def to_dict(self) -> dict:
        return {
            "ids": list(self.ids),
            "cells": [
                [{"row": self.ids[i], "col": self.ids[j], "r": self.r(i, j), "g": self.g(i, j)} for j in range(2)]
                for i in range(2)
            ],
        }


def has_matching_structure(m: PayoffMatrix, rel_tol: float = 1e-12) -> bool:
    """True if every matched payoff is exactly twice the corresponding mismatched one."""
    checks = (
        (m.r(0, 0), m.r(0, 1)),
        (m.r(1, 1), m.r(1, 0)),
        (m.g(0, 0), m.g(1, 0)),
        (m.g(1, 1), m.g(0, 1)),
    )
    return all(math.isclose(d, 2 * o, rel_tol=rel_tol, abs_tol=0.0) for d, o in checks)


def build_payoff_matrix(
    a1: CandidateAction,
    a2: CandidateAction,
    epsilon: float,
    h_min: float = H_MIN,
    co2_min: float = CO2_MIN,
) -> PayoffMatrix:
    if a1.id == a2.id:
        raise DomainError(f"actions must have distinct ids, both are {a1.id!r}")

    def pr(a, alpha):
        return resilience_payoff(a, epsilon, alpha)

    def pg(a, alpha):
        return greenness_payoff(a, epsilon, alpha, h_min, co2_min)

    cells = (
        ((pr(a1, MATCHED), pg(a1, MATCHED)), (pr(a1, MISMATCHED), pg(a2, MISMATCHED))),
        ((pr(a2, MISMATCHED), pg(a1, MISMATCHED)), (pr(a2, MATCHED), pg(a2, MATCHED))),
    )
    return PayoffMatrix(cells, (a1.id, a2.id), (a1.attrs.e_t, a2.attrs.e_t))


def find_psne(m: PayoffMatrix) -> list[Cell]:
    """All cells where no player gains strictly by deviating alone."""
    found = []
    for i in range(2):
        for j in range(2):
            if m.r(i, j) >= m.r(1 - i, j) and m.g(i, j) >= m.g(i, 1 - j):
                found.append((i, j))
    return found


@dataclass(frozen=True)
class MixedStrategy:
    p: float
    q: float
    interior: bool

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")


def _indifference(numerator: float, denominator: float) -> tuple[float, bool]:
    if abs(denominator) <= DENOM_TOL:
        # the opponent's mixing cannot make this player indifferent
        return 0.5, False
    x = numerator / denominator
    clamped = min(max(x, 0.0), 1.0)
    return clamped, 0.0 < x < 1.0


def solve_msne(m: PayoffMatrix) -> MixedStrategy:
    """Mixed equilibrium from equating each player's two expected payoffs.

    ``p`` makes P_r indifferent between its rows, ``q`` makes P_g indifferent
    between its columns. Values are clamped into [0, 1]; ``interior`` is False
    whenever clamping happened or an indifference equation has no slope.
    """
    p, p_ok = _indifference(
        m.r(1, 1) - m.r(0, 1),
        m.r(0, 0) - m.r(0, 1) - m.r(1, 0) + m.r(1, 1),
    )
    q, q_ok = _indifference(
        m.g(1, 1) - m.g(1, 0),
        m.g(0, 0) - m.g(1, 0) - m.g(0, 1) + m.g(1, 1),
    )
    return MixedStrategy(p, q, p_ok and q_ok)


@dataclass(frozen=True)
class ExpectedPayoffs:
    r_a1: float
    r_a2: float
    g_a1: float
    g_a2: float

    @property
    def r_gap(self) -> float:
        return abs(self.r_a1 - self.r_a2)

    @property
    def g_gap(self) -> float:
        return abs(self.g_a1 - self.g_a2)


def expected_payoffs(m: PayoffMatrix, s: MixedStrategy) -> ExpectedPayoffs:
    p, q = s.p, s.q
    return ExpectedPayoffs(
        r_a1=p * m.r(0, 0) + (1 - p) * m.r(0, 1),
        r_a2=p * m.r(1, 0) + (1 - p) * m.r(1, 1),
        g_a1=q * m.g(0, 0) + (1 - q) * m.g(1, 0),
        g_a2=q * m.g(0, 1) + (1 - q) * m.g(1, 1),
    )


@dataclass(frozen=True)
class GameSolution:
    matrix: PayoffMatrix
    psne: tuple[Cell, ...]
    mixed: MixedStrategy
    expected: ExpectedPayoffs

    def to_dict(self) -> dict:
        ids = self.matrix.ids
        return {
            "matrix": self.matrix.to_dict(),
            "psne": [[ids[i], ids[j]] for i, j in self.psne],
            "p": self.mixed.p,
            "q": self.mixed.q,
            "interior": self.mixed.interior,
            "expected_payoffs": {
                "P_r": {ids[0]: self.expected.r_a1, ids[1]: self.expected.r_a2},
                "P_g": {ids[0]: self.expected.g_a1, ids[1]: self.expected.g_a2},
            },
        }


def solve(m: PayoffMatrix) -> GameSolution:
    mixed = solve_msne(m)
    return GameSolution(m, tuple(find_psne(m)), mixed, expected_payoffs(m, mixed))


@dataclass(frozen=True)
class PlayOutcome:
    action_id: str
    rounds: int
    fallback: bool


def fallback_action(m: PayoffMatrix) -> str:
    """Matched PSNE with the largest payoff sum.

    Falls back to all matched cells when no matched cell is an equilibrium.
    Ties go to the smaller run time, then the smaller id.
    """
    diag = [i for i, j in find_psne(m) if i == j] or [0, 1]
    e_t = m.e_t or (0.0, 0.0)

    def key(i):
        return (-(m.r(i, i) + m.g(i, i)), e_t[i], m.ids[i])

    return m.ids[min(diag, key=key)]


def play(
    m: PayoffMatrix,
    s: MixedStrategy,
    rng: np.random.Generator | int,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
) -> PlayOutcome:
    """Sample both players until they pick the same action.

    Each round P_r draws first, then P_g. After ``max_rounds`` mismatches the
    matched equilibrium with the best total payoff is used.
    """
    if max_rounds < 1:
        raise DomainError(f"max_rounds must be >= 1, got {max_rounds!r}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    for rounds in range(1, max_rounds + 1):
        r_pick = 0 if rng.random() < s.q else 1
        g_pick = 0 if rng.random() < s.p else 1
        if r_pick == g_pick:
            return PlayOutcome(m.ids[r_pick], rounds, False)
    return PlayOutcome(fallback_action(m), max_rounds, True)


def action_pair(candidates: Sequence[CandidateAction]) -> tuple[CandidateAction, CandidateAction]:
    if len(candidates) != 2:
        raise DomainError(f"the game needs exactly 2 candidate actions, got {len(candidates)}")
    return candidates[0], candidates[1]
