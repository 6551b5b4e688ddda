"""Experiment protocol: run one disruption-to-recovery episode per technique
and compare techniques on the same scenario and seed."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from . import fsm, game, wsm
from .errors import DomainError
from .fsm import EpisodeTimeline, RecoveryState
from .measurement import (
    CO2_MIN,
    DEFAULT_SMOOTHING,
    H_MIN,
    ActionKind,
    AttributeVector,
    CandidateAction,
    update_attributes,
)
from .simulator import (
    Disruption,
    ScenarioConfig,
    SimState,
    detect_degradation,
    execute_action,
    initial_state,
    inject_disruption,
    measure,
)

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 100
ACTION_IDS = {ActionKind.LEARNING: "a1", ActionKind.OPERATING: "a2"}


class Technique(str, Enum):
    WSM = "WSM"
    GAME = "Game"

    @classmethod
    def parse(cls, text: str) -> "Technique":
        for t in cls:
            if t.value.lower() == text.lower():
                return t
        raise DomainError(f"unknown technique {text!r}")


@dataclass(frozen=True)
class TechniqueOptions:
    wsm_mode: wsm.WsmMode = wsm.WsmMode.FIXED
    weights: wsm.WeightVector = wsm.EQUAL_WEIGHTS
    max_rounds: int = game.DEFAULT_MAX_ROUNDS
    smoothing: float = DEFAULT_SMOOTHING
    h_min: float = H_MIN
    co2_min: float = CO2_MIN


@dataclass(frozen=True)
class IterationRecord:
    technique: str
    iteration: int
    state_before: str
    state_after: str
    action_id: str
    action_kind: str
    perf_start: float
    perf_end: float
    e_t_est: float
    e_co2_est: float
    h_est: float
    epsilon: float
    clock_start_s: float
    clock_end_s: float
    co2_cum_g: float
    human_cum: int
    # WSM detail
    w_t: float | None = None
    w_h: float | None = None
    w_co2: float | None = None
    score_selected: float | None = None
    scores: dict[str, float] | None = None
    # game detail
    p: float | None = None
    q: float | None = None
    rounds: int | None = None
    psne_fallback: bool | None = None


@dataclass(frozen=True)
class EpisodeSummary:
    iterations_to_recover: int
    total_elapsed_s: float
    total_co2_g: float
    total_human: int
    recovered: bool
    timeline: EpisodeTimeline = field(default_factory=EpisodeTimeline)


@dataclass(frozen=True)
class ExperimentLog:
    scenario: str
    seed: int
    technique: str
    records: tuple[IterationRecord, ...]
    summary: EpisodeSummary
    final_state: str
    deferred_disruptions: tuple[Disruption, ...] = ()


def summarize(records: Sequence[IterationRecord], recovered: bool, timeline=None) -> EpisodeSummary:
    """Aggregate iteration records into episode totals."""
    if not records:
        return EpisodeSummary(0, 0.0, 0.0, 0, recovered, timeline or EpisodeTimeline())
    return EpisodeSummary(
        iterations_to_recover=len(records),
        total_elapsed_s=records[-1].clock_end_s - records[0].clock_start_s,
        total_co2_g=records[-1].co2_cum_g,
        total_human=records[-1].human_cum,
        recovered=recovered,
        timeline=timeline or EpisodeTimeline(),
    )


def _rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    sim_seq, decision_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(sim_seq), np.random.default_rng(decision_seq)


def _decide(technique, candidates, epsilon, opts, rng) -> tuple[ActionKind, dict]:
    by_id = {c.id: c for c in candidates}
    if technique is Technique.WSM:
        d = wsm.select_action(candidates, epsilon, opts.wsm_mode, opts.weights)
        chosen = d.score_of(d.selected)
        detail = dict(
            w_t=chosen.weights.w_t,
            w_h=chosen.weights.w_h,
            w_co2=chosen.weights.w_co2,
            score_selected=chosen.score,
            scores={s.action_id: s.score for s in d.scored},
        )
        if d.tie_note:
            log.debug(d.tie_note)
        return by_id[d.selected].kind, detail
    a1, a2 = candidates
    m = game.build_payoff_matrix(a1, a2, epsilon, opts.h_min, opts.co2_min)
    mixed = game.solve_msne(m)
    outcome = game.play(m, mixed, rng, opts.max_rounds)
    detail = dict(p=mixed.p, q=mixed.q, rounds=outcome.rounds, psne_fallback=outcome.fallback)
    return by_id[outcome.action_id].kind, detail


def _steady_phase(cfg: ScenarioConfig, s: SimState):
    """Tick until degradation is detected or every disruption has passed.

    Returns (state, sample, t_e, t_d, deferred) with t_d None when nothing degraded.
    """
    pending = list(cfg.disruptions)
    t_e = None
    k = 0
    while pending:
        k += 1
        s.clock = k * cfg.tick
        while pending and pending[0].time <= s.clock:
            d = pending.pop(0)
            s = inject_disruption(s, d)
            t_e = d.time
            log.debug("t=%s injected %s", s.clock, d.kind.value)
        sample = measure(s, cfg.noise_amplitude)
        if detect_degradation(sample, cfg):
            return s, sample, (s.clock if t_e is None else t_e), s.clock, tuple(pending)
        fsm.transition(RecoveryState.STEADY, fsm.perf_acceptable())
    return s, None, t_e, None, ()


def run_experiment(
    cfg: ScenarioConfig,
    technique: Technique | str,
    options: TechniqueOptions | None = None,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> ExperimentLog:
    technique = Technique.parse(technique) if isinstance(technique, str) else technique
    opts = options or TechniqueOptions()
    if max_iterations < 1:
        raise DomainError(f"max_iterations must be >= 1, got {max_iterations!r}")
    sim_rng, decision_rng = _rng_streams(cfg.seed)
    s = initial_state(cfg, sim_rng)

    def finish(records, state, recovered, timeline, deferred=()):
        return ExperimentLog(
            scenario=cfg.name,
            seed=cfg.seed,
            technique=technique.value,
            records=tuple(records),
            summary=summarize(records, recovered, timeline),
            final_state=state.value,
            deferred_disruptions=tuple(deferred),
        )

    s, sample, t_e, t_d, deferred = _steady_phase(cfg, s)
    if t_d is None:
        return finish([], RecoveryState.STEADY, True, EpisodeTimeline(t_e=t_e))
    if deferred:
        log.info("deferring %d disruption(s) scheduled during recovery", len(deferred))

    state = fsm.transition(RecoveryState.STEADY, fsm.degradation_detected())
    if sample >= cfg.recovery_threshold:
        state = fsm.transition(state, fsm.policy_recovered())
        return finish([], state, True, EpisodeTimeline(t_e, t_d, s.clock), deferred)
    state = fsm.transition(state, fsm.trade_off_requested())

    estimates: dict[ActionKind, AttributeVector] = {k: cfg.expected_attributes(k) for k in ActionKind}
    records = []
    t_r = None
    for i in range(1, max_iterations + 1):
        state_before = state
        candidates = [CandidateAction(ACTION_IDS[k], k, estimates[k]) for k in ActionKind]
        epsilon = s.epsilon
        kind, detail = _decide(technique, candidates, epsilon, opts, decision_rng)
        if state is RecoveryState.TRADE_OFF:
            state = fsm.transition(state, fsm.action_selected(kind))
        else:
            state = fsm.transition(state, fsm.perf_not_acceptable(kind))
        used = estimates[kind]
        clock_start, perf_start = s.clock, sample
        s, observed = execute_action(s, kind, cfg)
        estimates[kind] = update_attributes(used, observed, opts.smoothing)
        state = fsm.transition(state, fsm.measurement_taken())
        sample = measure(s, cfg.noise_amplitude)
        if sample >= cfg.recovery_threshold:
            state = fsm.transition(state, fsm.perf_acceptable())
            t_r = s.clock
        records.append(
            IterationRecord(
                technique=technique.value,
                iteration=i,
                state_before=state_before.value,
                state_after=state.value,
                action_id=ACTION_IDS[kind],
                action_kind=kind.value,
                perf_start=perf_start,
                perf_end=sample,
                e_t_est=used.e_t,
                e_co2_est=used.e_co2,
                h_est=used.h,
                epsilon=epsilon,
                clock_start_s=clock_start,
                clock_end_s=s.clock,
                co2_cum_g=s.co2_cum,
                human_cum=s.human_interactions_cum,
                **detail,
            )
        )
        if fsm.is_terminal(state):
            break
    recovered = fsm.is_terminal(state)
    return finish(records, state, recovered, EpisodeTimeline(t_e, t_d, t_r), deferred)


@dataclass(frozen=True)
class SummaryDelta:
    first: str
    second: str
    iterations: int
    elapsed_s: float
    co2_g: float
    human_interactions: int
    agreement: float | None


@dataclass(frozen=True)
class ComparisonReport:
    scenario: str
    seed: int
    labels: tuple[str, ...]
    summaries: tuple[EpisodeSummary, ...]
    deltas: tuple[SummaryDelta, ...]


def agreement_rate(a: Sequence[IterationRecord], b: Sequence[IterationRecord]) -> float | None:
    """Share of common iteration indices where both picked the same action kind."""
    common = min(len(a), len(b))
    if common == 0:
        return None
    same = sum(x.action_kind == y.action_kind for x, y in zip(a[:common], b[:common]))
    return same / common


def _labels(logs: Sequence[ExperimentLog]) -> tuple[str, ...]:
    names = [lg.technique for lg in logs]
    return tuple(n if names.count(n) == 1 else f"{n}#{i + 1}" for i, n in enumerate(names))


def compare(logs: Sequence[ExperimentLog]) -> ComparisonReport:
    """Summaries plus pairwise deltas (earlier log minus later log)."""
    if len(logs) < 2:
        raise DomainError(f"compare needs at least 2 logs, got {len(logs)}")
    first = logs[0]
    for lg in logs[1:]:
        if (lg.scenario, lg.seed) != (first.scenario, first.seed):
            raise DomainError(
                f"logs differ in scenario/seed: {first.scenario}/{first.seed} vs {lg.scenario}/{lg.seed}"
            )
    labels = _labels(logs)
    deltas = []
    for i in range(len(logs)):
        for j in range(i + 1, len(logs)):
            a, b = logs[i].summary, logs[j].summary
            deltas.append(
                SummaryDelta(
                    first=labels[i],
                    second=labels[j],
                    iterations=a.iterations_to_recover - b.iterations_to_recover,
                    elapsed_s=a.total_elapsed_s - b.total_elapsed_s,
                    co2_g=a.total_co2_g - b.total_co2_g,
                    human_interactions=a.total_human - b.total_human,
                    agreement=agreement_rate(logs[i].records, logs[j].records),
                )
            )
    return ComparisonReport(first.scenario, first.seed, labels, tuple(lg.summary for lg in logs), tuple(deltas))
