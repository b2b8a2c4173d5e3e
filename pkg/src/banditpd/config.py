"""Experiment configuration: a strict, versioned JSON schema plus named presets."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .algorithm import ESTIMATORS
from .schedule import ScheduleError, make_schedule

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass
class ScheduleConfig:
    variant: str = "corollary1"
    g: float | None = 0.1
    g1: float | None = None
    g2: float | None = None
    g3: float | None = None


@dataclass
class GraphConfig:
    edge_prob: float = 0.1
    chain_augment: bool = True
    redraw_per_round: bool = False


@dataclass
class MetricsConfig:
    cadence: int | None = None  # None: 1 for n <= 20, else 10
    static_regret: bool = True
    dynamic_regret: bool = False
    benchmark_tol: float = 1e-9


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    n: int = 10
    p: int = 4
    T: int = 10_000
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    F1: float | None = None  # None: certified from the problem data
    lam: float = 5e-6
    box_half_width: float = 2.0
    m_i: int = 2
    labels: str = "first_decision"  # or "hidden_target"
    init: str = "origin"  # or "uniform"
    graph: GraphConfig = field(default_factory=GraphConfig)
    estimators: list[str] = field(default_factory=lambda: ["one_point"])
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    seeds: list[int] = field(default_factory=lambda: [0])
    workers: int = 1
    output_dir: str | None = None
    version: int = CONFIG_VERSION

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return _build(cls, data, "config")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def cadence(self) -> int:
        if self.metrics.cadence is not None:
            return self.metrics.cadence
        return 1 if self.n <= 20 else 10

    def make_schedule(self, F1: float, horizon: int | None = None):
        s = self.schedule
        return make_schedule(s.variant, r=self.box_half_width, p=self.p, F1=F1, g=s.g,
                             g1=s.g1, g2=s.g2, g3=s.g3, horizon=horizon)

    def validate(self) -> None:
        """Check every precondition the run will rely on; raise :class:`ConfigError`."""
        if self.version != CONFIG_VERSION:
            raise ConfigError(f"version: unsupported config version {self.version}")
        _require(self.n >= 2, "n: need at least 2 agents")
        _require(self.p >= 1, "p: dimension must be positive")
        _require(self.T >= 2, "T: need at least 2 rounds")
        _require(self.m_i >= 1, "m_i: need at least one constraint per agent")
        _require(self.box_half_width > 0, "box_half_width: must be positive")
        _require(self.lam >= 0, "lam: must be nonnegative")
        _require(self.F1 is None or self.F1 > 0, "F1: must be positive when given")
        _require(0.0 <= self.graph.edge_prob <= 1.0, "graph.edge_prob: must lie in [0, 1]")
        _require(self.labels in ("first_decision", "hidden_target"),
                 "labels: expected 'first_decision' or 'hidden_target'")
        _require(self.init in ("origin", "uniform"), "init: expected 'origin' or 'uniform'")
        _require(len(self.estimators) > 0, "estimators: need at least one")
        for e in self.estimators:
            _require(e in ESTIMATORS, f"estimators: unknown estimator {e!r}")
        _require(len(set(self.estimators)) == len(self.estimators), "estimators: duplicates")
        _require(len(self.seeds) > 0, "seeds: need at least one")
        for s in self.seeds:
            _require(isinstance(s, int) and 0 <= s < 2 ** 63, f"seeds: invalid seed {s!r}")
        _require(len(set(self.seeds)) == len(self.seeds), "seeds: duplicates")
        _require(self.workers >= 1, "workers: must be positive")
        _require(self.metrics.cadence is None or self.metrics.cadence >= 1, "metrics.cadence: must be >= 1")
        _require(self.metrics.benchmark_tol > 0, "metrics.benchmark_tol: must be positive")
        try:
            self.make_schedule(1.0, horizon=self.T)
        except ScheduleError as exc:
            raise ConfigError(f"schedule: {exc}") from None


def _require(ok: bool, msg: str) -> None:
    if not ok:
        raise ConfigError(msg)


_NESTED = {"schedule": ScheduleConfig, "graph": GraphConfig, "metrics": MetricsConfig}


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED and cls is ExperimentConfig:
            value = _build(_NESTED[key], value, f"{where}.{key}")
        elif key in ("estimators", "seeds"):
            if not isinstance(value, list):
                raise ConfigError(f"{where}.{key}: expected a list")
            value = list(value)
        kwargs[key] = value
    return cls(**kwargs)


def _desk(**kw) -> ExperimentConfig:
    base = dict(n=10, p=4, T=10_000)
    base.update(kw)
    return ExperimentConfig(**base)


PRESETS = {
    "fig1-desk": lambda: _desk(name="fig1-desk", estimators=["one_point", "two_point"]),
    "fig2-desk": lambda: _desk(name="fig2-desk"),
    "fig3-desk": lambda: _desk(name="fig3-desk"),
    "sublinear-desk": lambda: _desk(name="sublinear-desk", T=2 ** 14, seeds=[0, 1, 2, 3, 4]),
    "strong-cor1-desk": lambda: _desk(name="strong-cor1-desk", lam=1e-2, seeds=[0, 1, 2, 3, 4]),
    "strong-cor2-desk": lambda: _desk(name="strong-cor2-desk", lam=1e-2, seeds=[0, 1, 2, 3, 4],
                                      schedule=ScheduleConfig(variant="corollary2", g=0.1)),
    "full-scale": lambda: ExperimentConfig(name="full-scale", n=100, p=16, T=10_000,
                                      estimators=["one_point", "two_point"]),
}


def preset(name: str) -> ExperimentConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
