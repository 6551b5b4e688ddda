"""Choosing recovery actions that trade greenness (CO2, human labor) against
resilience (recovery time), by weighted-sum scoring or a two-player game."""

from .errors import ConfigError, DegenerateInputError, DomainError, GResilienceError, InvalidTransitionError
from .fsm import RecoveryEvent, RecoveryState, is_terminal, transition
from .game import (
    MixedStrategy,
    PayoffMatrix,
    build_payoff_matrix,
    expected_payoffs,
    find_psne,
    greenness_payoff,
    play,
    resilience_payoff,
    solve_msne,
)
from .harness import ExperimentLog, IterationRecord, Technique, TechniqueOptions, compare, run_experiment
from .measurement import ActionKind, AttributeVector, CandidateAction, inverse_attr, normalize, update_estimate
from .report import emit
from .simulator import ScenarioConfig, load_config
from .wsm import WeightVector, WsmMode, best_weights, score, select_action

__version__ = "0.1.0"
