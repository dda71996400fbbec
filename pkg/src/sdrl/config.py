"""Run configuration: ``key = value`` lines, ``#`` or ``;`` comments.

Everything a run needs is built from a :class:`RunConfig`: the symbolic
description, initial state, task schedule, grounding and the three
hyperparameter groups.
"""

from __future__ import annotations

import configparser
import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .action_lang import ActionDescription, SymbolicState, initial_state
from .controller import ControllerConfig, EpsilonSchedule
from .loop import LoopConfig, Task
from .meta_controller import MetaConfig

ENVS = ("taxi", "synthetic", "montezuma_fixture")


class ConfigError(ValueError):
    """Unknown key, bad value or inconsistent settings."""


@dataclass(frozen=True)
class RunConfig:
    env: str = "taxi"
    seeds: tuple[int, ...] = tuple(range(1, 11))
    # loop
    explore_prob: float = 0.2
    episodes: int = 2000
    max_plan_len: int = 8
    inf_default: float = 10.0
    # controller
    alpha_c: float = 1.0
    gamma: float = 0.99
    max_steps: int = 50
    phi: float = 10.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: int = 10_000
    # meta-controller
    alpha: float = 0.1
    beta: float = 0.05
    psi: float = 100.0
    threshold: float = 0.9
    bootstrap: str = "next"
    return_mode: str = "env_return"
    return_window: int | None = None
    # taxi schedule
    base_dropoff_reward: float = 50.0
    decrement: float = 5.0
    episodes_per_task: int = 2000
    num_tasks: int = 10
    # synthetic graph (JSON file with nodes, edges, initial)
    graph: str | None = None

    def __post_init__(self):
        if self.env not in ENVS:
            raise ConfigError(f"env must be one of {ENVS}, got {self.env!r}")
        if not self.seeds:
            raise ConfigError("seeds must not be empty")
        if self.env == "synthetic" and not self.graph:
            raise ConfigError("env=synthetic needs graph=<path to JSON spec>")
        try:
            self.loop_config()
            self.controller_config()
            self.meta_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def loop_config(self) -> LoopConfig:
        return LoopConfig(self.explore_prob, self.episodes, self.max_plan_len, self.inf_default)

    def controller_config(self) -> ControllerConfig:
        eps = EpsilonSchedule(self.epsilon_start, self.epsilon_end, self.epsilon_decay)
        return ControllerConfig(self.alpha_c, self.gamma, eps, self.max_steps, self.phi)

    def meta_config(self) -> MetaConfig:
        return MetaConfig(self.alpha, self.beta, self.psi, self.threshold, self.bootstrap,
                          self.return_mode, return_window=self.return_window)


def parse_seeds(text: str) -> tuple[int, ...]:
    seeds: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def _convert(name: str, raw: str, ftype) -> object:
    if name == "seeds":
        return parse_seeds(raw)
    if raw.lower() in ("none", "") and ftype in ("int | None", "str | None"):
        return None
    if ftype in ("int", "int | None"):
        return int(raw)
    if ftype == "float":
        return float(raw)
    return raw


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines on top of ``base`` (default: RunConfig())."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    fields = {f.name: f.type for f in dataclasses.fields(RunConfig)}
    values = {}
    for key, raw in parser["run"].items():
        if key not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = _convert(key, raw.strip(), fields[key])
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return dataclasses.replace(base or RunConfig(), **values)


def resolve_path(name: str | Path) -> Path:
    """A file path, or the name of a file shipped in ``sdrl/data``."""
    path = Path(name)
    if path.exists():
        return path
    shipped = resources.files("sdrl.data").joinpath(str(name))
    if shipped.is_file():
        return Path(str(shipped))
    raise FileNotFoundError(f"no such file: {name}")


def load_config(path: str | Path) -> RunConfig:
    return parse_config(resolve_path(path).read_text())


@dataclass
class Experiment:
    """Everything a run needs, built from a config."""

    config: RunConfig
    description: ActionDescription
    initial: SymbolicState
    make_tasks: Callable[[], Sequence[Task]]
    grounding: Callable
    extras: dict = field(default_factory=dict)


TAXI_INITIAL = {"at": "start", "have_passenger": "false", "coupon_taken": "false", "delivered": "false"}


def build(cfg: RunConfig) -> Experiment:
    if cfg.env == "taxi":
        from .envs.taxi import TaskSchedule, TaxiEnv, load_description

        d = load_description()
        sched = TaskSchedule(cfg.base_dropoff_reward, cfg.decrement, cfg.episodes_per_task, cfg.num_tasks)

        def make_tasks():
            return [Task(TaxiEnv(sched.dropoff_reward(k)), sched.episodes_per_task, f"task{k}")
                    for k in range(1, sched.num_tasks + 1)]

        return Experiment(cfg, d, initial_state(d, TAXI_INITIAL), make_tasks,
                          TaxiEnv().grounding, {"schedule": sched})
    if cfg.env == "synthetic":
        from .envs.synthetic import GraphEnv, GraphSpec, MalformedSpec, make_synthetic

        raw = json.loads(resolve_path(cfg.graph).read_text())
        try:
            spec = GraphSpec(tuple(raw["nodes"]), tuple(map(tuple, raw["edges"])), raw["initial"])
        except (KeyError, TypeError) as exc:
            raise MalformedSpec(f"graph spec needs nodes, edges and initial: {exc}") from exc
        d, _, i = make_synthetic(spec)
        return Experiment(cfg, d, i, lambda: [Task(GraphEnv(spec), cfg.episodes, "graph")],
                          GraphEnv.grounding, {"spec": spec})
    from .envs.montezuma import load, symbolic_state

    d = load("montezuma_table3.bc")
    return Experiment(cfg, d, symbolic_state("mp", False), lambda: [], lambda s, e: False)
