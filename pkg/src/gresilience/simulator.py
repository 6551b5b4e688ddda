"""Seeded discrete-time stand-in for a collaborative robot classifying objects
on a conveyor belt, with light-loss and extra-human disruptions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigError
from .measurement import ActionKind, AttributeVector


class DisruptionKind(str, Enum):
    LIGHT_LOSS = "LightLoss"
    EXTRA_HUMAN = "ExtraHuman"


@dataclass(frozen=True)
class Disruption:
    time: float
    kind: DisruptionKind
    perf_drop: float
    epsilon_drop: float


@dataclass(frozen=True)
class ActionSpec:
    base_duration_s: float
    power_w: float
    human_interactions: int
    learning_gain: float = 0.0


@dataclass(frozen=True)
class ScenarioConfig:
    initial_perf: float
    steady_threshold: float
    recovery_threshold: float
    initial_epsilon: float
    tick: float
    disruptions: tuple[Disruption, ...]
    learning: ActionSpec
    operating: ActionSpec
    carbon_intensity: float
    noise_amplitude: float
    seed: int
    name: str = "scenario"

    def __post_init__(self):
        validate_config(self)

    def action(self, kind: ActionKind) -> ActionSpec:
        return self.learning if ActionKind(kind) is ActionKind.LEARNING else self.operating

    def expected_attributes(self, kind: ActionKind) -> AttributeVector:
        """Attributes an action should exhibit according to its definition."""
        spec = self.action(kind)
        energy = spec.power_w * spec.base_duration_s / 3600.0
        return AttributeVector(spec.base_duration_s, energy * self.carbon_intensity, spec.human_interactions)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "initial_perf": self.initial_perf,
            "steady_threshold": self.steady_threshold,
            "recovery_threshold": self.recovery_threshold,
            "initial_epsilon": self.initial_epsilon,
            "tick": self.tick,
            "disruptions": [
                {"time": d.time, "kind": d.kind.value, "perf_drop": d.perf_drop, "epsilon_drop": d.epsilon_drop}
                for d in self.disruptions
            ],
            "learning": _action_dict(self.learning),
            "operating": _action_dict(self.operating),
            "carbon_intensity": self.carbon_intensity,
            "noise_amplitude": self.noise_amplitude,
            "seed": self.seed,
        }


def _action_dict(a: ActionSpec) -> dict[str, Any]:
    return {
        "base_duration_s": a.base_duration_s,
        "power_w": a.power_w,
        "human_interactions": a.human_interactions,
        "learning_gain": a.learning_gain,
    }


def _unit(name: str, v: float):
    if not (math.isfinite(v) and 0.0 <= v <= 1.0):
        raise ConfigError(name, f"must lie in [0, 1], got {v!r}")


def _positive(name: str, v: float):
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(name, f"must be > 0, got {v!r}")


def validate_config(cfg: ScenarioConfig) -> None:
    for name in ("initial_perf", "steady_threshold", "recovery_threshold", "initial_epsilon"):
        _unit(name, getattr(cfg, name))
    if cfg.recovery_threshold > cfg.steady_threshold:
        raise ConfigError("recovery_threshold", "must not exceed steady_threshold")
    _positive("tick", cfg.tick)
    _positive("carbon_intensity", cfg.carbon_intensity)
    if not (math.isfinite(cfg.noise_amplitude) and cfg.noise_amplitude >= 0):
        raise ConfigError("noise_amplitude", f"must be >= 0, got {cfg.noise_amplitude!r}")
    for prefix, spec in (("learning", cfg.learning), ("operating", cfg.operating)):
        _positive(f"{prefix}.base_duration_s", spec.base_duration_s)
        _positive(f"{prefix}.power_w", spec.power_w)
        if spec.human_interactions < 0:
            raise ConfigError(f"{prefix}.human_interactions", "must be >= 0")
        _unit(f"{prefix}.learning_gain", spec.learning_gain)
    if cfg.operating.learning_gain != 0:
        raise ConfigError("operating.learning_gain", "operating does not learn; must be 0")
    last = -math.inf
    for i, d in enumerate(cfg.disruptions):
        if not (math.isfinite(d.time) and d.time >= 0):
            raise ConfigError(f"disruptions[{i}].time", f"must be >= 0, got {d.time!r}")
        if d.time <= last:
            raise ConfigError(f"disruptions[{i}].time", "disruption times must be strictly increasing")
        last = d.time
        _unit(f"disruptions[{i}].perf_drop", d.perf_drop)
        _unit(f"disruptions[{i}].epsilon_drop", d.epsilon_drop)


_TOP_FIELDS = {
    "name": str,
    "initial_perf": float,
    "steady_threshold": float,
    "recovery_threshold": float,
    "initial_epsilon": float,
    "tick": float,
    "disruptions": list,
    "learning": dict,
    "operating": dict,
    "carbon_intensity": float,
    "noise_amplitude": float,
    "seed": int,
}
_OPTIONAL = {"name"}
_DISRUPTION_FIELDS = {"time": float, "kind": str, "perf_drop": float, "epsilon_drop": float}
_ACTION_FIELDS = {"base_duration_s": float, "power_w": float, "human_interactions": int, "learning_gain": float}
_ACTION_OPTIONAL = {"learning_gain"}


def _take(data: Any, fields: dict, optional: set, where: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(where or "<root>", "expected an object")
    prefix = f"{where}." if where else ""
    for key in data:
        if key not in fields:
            raise ConfigError(f"{prefix}{key}", "unknown field")
    out = {}
    for key, typ in fields.items():
        if key not in data:
            if key in optional:
                continue
            raise ConfigError(f"{prefix}{key}", "missing required field")
        v = data[key]
        if typ is float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{prefix}{key}", f"expected a number, got {v!r}")
            v = float(v)
        elif typ is int:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{prefix}{key}", f"expected an integer, got {v!r}")
        elif not isinstance(v, typ):
            raise ConfigError(f"{prefix}{key}", f"expected {typ.__name__}, got {v!r}")
        out[key] = v
    return out


def config_from_dict(data: dict) -> ScenarioConfig:
    """Build a validated config; unknown or missing fields raise ConfigError naming the field."""
    top = _take(data, _TOP_FIELDS, _OPTIONAL, "")
    disruptions = []
    for i, raw in enumerate(top["disruptions"]):
        d = _take(raw, _DISRUPTION_FIELDS, set(), f"disruptions[{i}]")
        try:
            kind = DisruptionKind(d["kind"])
        except ValueError:
            raise ConfigError(f"disruptions[{i}].kind", f"unknown disruption kind {d['kind']!r}") from None
        disruptions.append(Disruption(d["time"], kind, d["perf_drop"], d["epsilon_drop"]))
    top["disruptions"] = tuple(disruptions)
    for key in ("learning", "operating"):
        top[key] = ActionSpec(**_take(top[key], _ACTION_FIELDS, _ACTION_OPTIONAL, key))
    return ScenarioConfig(**top)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read scenario: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    return config_from_dict(data)


@dataclass
class SimState:
    clock: float
    perf: float
    epsilon: float
    co2_cum: float = 0.0
    energy_cum: float = 0.0
    human_interactions_cum: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0), repr=False, compare=False)


def initial_state(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> SimState:
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    return SimState(clock=0.0, perf=cfg.initial_perf, epsilon=cfg.initial_epsilon, rng=rng)


def _clamp01(x: float) -> float:
    return min(max(x, 0.0), 1.0)


def _noise(s: SimState, amplitude: float) -> float:
    # always draw, so the random stream does not depend on the amplitude
    return float(s.rng.uniform(-1.0, 1.0)) * amplitude


def inject_disruption(s: SimState, d: Disruption) -> SimState:
    return replace(s, perf=max(0.0, s.perf - d.perf_drop), epsilon=max(0.0, s.epsilon - d.epsilon_drop))


def execute_action(s: SimState, kind: ActionKind, cfg: ScenarioConfig) -> tuple[SimState, AttributeVector]:
    """Run one recovery action and return the new state with the observed attributes.

    Learning raises the confidence; with either action the performance then
    follows the confidence plus bounded noise.
    """
    kind = ActionKind(kind)
    spec = cfg.action(kind)
    duration = spec.base_duration_s
    energy = spec.power_w * duration / 3600.0
    epsilon = s.epsilon
    if kind is ActionKind.LEARNING:
        epsilon = min(1.0, epsilon + spec.learning_gain)
    perf = _clamp01(epsilon + _noise(s, cfg.noise_amplitude))
    energy_cum = s.energy_cum + energy
    new = replace(
        s,
        clock=s.clock + duration,
        perf=perf,
        epsilon=epsilon,
        energy_cum=energy_cum,
        co2_cum=energy_cum * cfg.carbon_intensity,
        human_interactions_cum=s.human_interactions_cum + spec.human_interactions,
    )
    return new, AttributeVector(duration, energy * cfg.carbon_intensity, spec.human_interactions)


def measure(s: SimState, noise_amplitude: float) -> float:
    return _clamp01(s.perf + _noise(s, noise_amplitude))


def detect_degradation(sample: float, cfg: ScenarioConfig) -> bool:
    return sample < cfg.steady_threshold
