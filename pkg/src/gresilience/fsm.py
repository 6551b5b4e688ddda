"""Recovery state diagram: steady -> disruptive -> trade-off -> act/measure loop -> recovered."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError, InvalidTransitionError
from .measurement import ActionKind


class RecoveryState(str, Enum):
    STEADY = "Steady"
    DISRUPTIVE = "Disruptive"
    TRADE_OFF = "TradeOff"
    LEARNING = "Learning"
    OPERATING = "Operating"
    MEASURING = "Measuring"
    RECOVERED = "Recovered"


class EventType(str, Enum):
    DEGRADATION_DETECTED = "DegradationDetected"
    POLICY_RECOVERED = "PolicyRecovered"
    TRADE_OFF_REQUESTED = "TradeOffRequested"
    ACTION_SELECTED = "ActionSelected"
    MEASUREMENT_TAKEN = "MeasurementTaken"
    PERF_ACCEPTABLE = "PerfAcceptable"
    PERF_NOT_ACCEPTABLE = "PerfNotAcceptable"


_CARRIES_KIND = {EventType.ACTION_SELECTED, EventType.PERF_NOT_ACCEPTABLE}


@dataclass(frozen=True)
class RecoveryEvent:
    type: EventType
    kind: ActionKind | None = None

    def __post_init__(self):
        object.__setattr__(self, "type", EventType(self.type))
        if self.type in _CARRIES_KIND:
            if self.kind is None:
                raise DomainError(f"{self.type.value} requires an action kind")
            object.__setattr__(self, "kind", ActionKind(self.kind))
        elif self.kind is not None:
            raise DomainError(f"{self.type.value} does not carry an action kind")

    def __str__(self):
        return f"{self.type.value}({self.kind.value})" if self.kind else self.type.value


def degradation_detected() -> RecoveryEvent:
    return RecoveryEvent(EventType.DEGRADATION_DETECTED)


def policy_recovered() -> RecoveryEvent:
    return RecoveryEvent(EventType.POLICY_RECOVERED)


def trade_off_requested() -> RecoveryEvent:
    return RecoveryEvent(EventType.TRADE_OFF_REQUESTED)


def action_selected(kind: ActionKind) -> RecoveryEvent:
    return RecoveryEvent(EventType.ACTION_SELECTED, kind)


def measurement_taken() -> RecoveryEvent:
    return RecoveryEvent(EventType.MEASUREMENT_TAKEN)


def perf_acceptable() -> RecoveryEvent:
    return RecoveryEvent(EventType.PERF_ACCEPTABLE)


def perf_not_acceptable(kind: ActionKind) -> RecoveryEvent:
    return RecoveryEvent(EventType.PERF_NOT_ACCEPTABLE, kind)


S = RecoveryState
E = EventType

_KIND_STATE = {ActionKind.LEARNING: S.LEARNING, ActionKind.OPERATING: S.OPERATING}

# (state, event type) -> next state; None means "the state named by the event's kind"
TRANSITIONS: dict[tuple[RecoveryState, EventType], RecoveryState | None] = {
    (S.STEADY, E.DEGRADATION_DETECTED): S.DISRUPTIVE,
    # a healthy measurement while steady: no degradation, stay put
    (S.STEADY, E.PERF_ACCEPTABLE): S.STEADY,
    (S.DISRUPTIVE, E.POLICY_RECOVERED): S.RECOVERED,
    (S.DISRUPTIVE, E.TRADE_OFF_REQUESTED): S.TRADE_OFF,
    (S.TRADE_OFF, E.ACTION_SELECTED): None,
    (S.LEARNING, E.MEASUREMENT_TAKEN): S.MEASURING,
    (S.OPERATING, E.MEASUREMENT_TAKEN): S.MEASURING,
    (S.MEASURING, E.PERF_ACCEPTABLE): S.RECOVERED,
    (S.MEASURING, E.PERF_NOT_ACCEPTABLE): None,
}


def transition(state: RecoveryState, event: RecoveryEvent) -> RecoveryState:
    state = RecoveryState(state)
    key = (state, event.type)
    if key in TRANSITIONS:
        target = TRANSITIONS[key]
        return _KIND_STATE[event.kind] if target is None else target
    raise InvalidTransitionError(state.value, str(event))


def is_terminal(state: RecoveryState) -> bool:
    return RecoveryState(state) is S.RECOVERED


def all_events() -> list[RecoveryEvent]:
    """Every distinct event value, with each kind for kind-carrying events."""
    events = []
    for t in EventType:
        if t in _CARRIES_KIND:
            events.extend(RecoveryEvent(t, k) for k in ActionKind)
        else:
            events.append(RecoveryEvent(t))
    return events


@dataclass(frozen=True)
class EpisodeTimeline:
    t_e: float | None = None
    t_d: float | None = None
    t_r: float | None = None

    def __post_init__(self):
        present = [t for t in (self.t_e, self.t_d, self.t_r) if t is not None]
        if any(b < a for a, b in zip(present, present[1:])):
            raise DomainError(f"timeline must be non-decreasing, got {self}")
