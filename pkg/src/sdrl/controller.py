"""Tabular sub-policies trained on intrinsic rewards, plus success tracking."""

from __future__ import annotations

import csv
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

from ._validation import check_interval, check_positive_int
from .subtask import Subtask

WINDOW = 100


class InitiationError(RuntimeError):
    """The subtask's initiation predicate is false in the current env state."""


@dataclass(frozen=True)
class EpsilonSchedule:
    """Linear decay from ``start`` to ``end`` over ``decay_steps`` steps."""

    start: float = 1.0
    end: float = 0.05
    decay_steps: int = 10_000

    def __post_init__(self):
        check_interval("start", self.start, 0.0, 1.0)
        check_interval("end", self.end, 0.0, 1.0)
        if self.decay_steps < 0:
            raise ValueError("decay_steps must be >= 0")

    def __call__(self, step: int) -> float:
        if step >= self.decay_steps:
            return self.end
        return self.start + (self.end - self.start) * step / self.decay_steps


@dataclass(frozen=True)
class ControllerConfig:
    alpha_c: float = 1.0
    gamma: float = 0.99
    epsilon_greedy: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    max_steps: int = 50
    phi: float = 10.0

    def __post_init__(self):
        check_interval("alpha_c", self.alpha_c, 0.0, 1.0)
        check_interval("gamma", self.gamma, 0.0, 1.0, closed_right=False)
        check_positive_int("max_steps", self.max_steps)


class QTable:
    """Q(g, s, a) with default 0, plus a per-subtask step counter."""

    def __init__(self):
        self.values: dict[Hashable, dict[Hashable, dict[Any, float]]] = {}
        self.steps: defaultdict[Hashable, int] = defaultdict(int)

    def row(self, g: Hashable, s: Hashable) -> dict[Any, float]:
        return self.values.get(g, {}).get(s, {})

    def get(self, g: Hashable, s: Hashable, a) -> float:
        return self.row(g, s).get(a, 0.0)

    def set(self, g: Hashable, s: Hashable, a, value: float) -> None:
        self.values.setdefault(g, {}).setdefault(s, {})[a] = value

    def greedy(self, g: Hashable, s: Hashable, actions: Sequence) -> list:
        """All actions attaining the maximum, in ``actions`` order."""
        row = self.row(g, s)
        vals = [row.get(a, 0.0) for a in actions]
        top = max(vals)
        return [a for a, v in zip(actions, vals) if v == top]

    def __len__(self) -> int:
        return sum(len(r) for rows in self.values.values() for r in rows.values())


def intrinsic_reward(env_reward: float, terminated: bool, cfg: ControllerConfig) -> float:
    return cfg.phi if terminated else env_reward


def q_update(q: QTable, g, s, a, r_i: float, s_next, terminal: bool, cfg: ControllerConfig,
             actions: Sequence | None = None) -> QTable:
    """One tabular Q-learning step; ``actions`` bounds the max at ``s_next``."""
    if cfg.alpha_c == 0:
        return q
    if terminal:
        bootstrap = 0.0
    else:
        row = q.row(g, s_next)
        if actions is None:
            bootstrap = max(row.values(), default=0.0)
        else:
            bootstrap = max(row.get(b, 0.0) for b in actions)
    old = q.get(g, s, a)
    q.set(g, s, a, (1 - cfg.alpha_c) * old + cfg.alpha_c * (r_i + cfg.gamma * bootstrap))
    return q


class SuccessTracker:
    """Last-100 outcome windows per subtask, with the env return of each attempt."""

    def __init__(self, window: int = WINDOW):
        self.window = window
        self._log: dict[Hashable, deque] = {}

    def record(self, g: Hashable, success: bool, env_return: float = 0.0) -> None:
        self._log.setdefault(g, deque(maxlen=self.window)).append((bool(success), float(env_return)))

    def attempts(self, g: Hashable) -> int:
        return len(self._log.get(g, ()))

    def ratio(self, g: Hashable) -> float:
        log = self._log.get(g)
        if not log:
            raise ValueError(f"no data for subtask {g!r}")
        return sum(ok for ok, _ in log) / len(log)

    def mean_success_return(self, g: Hashable, last: int | None = None) -> float | None:
        """Mean env return of the successes in the window (or its ``last`` ones)."""
        returns = [r for ok, r in self._log.get(g, ()) if ok]
        if last:
            returns = returns[-last:]
        return sum(returns) / len(returns) if returns else None

    def __contains__(self, g) -> bool:
        return g in self._log


def success_ratio(t: SuccessTracker, g: Hashable) -> float:
    return t.ratio(g)


@dataclass
class SubtaskResult:
    trace: list[tuple[Any, Any, float, Any]]
    success: bool
    env_reward_sum: float
    done: bool = False

    @property
    def steps(self) -> int:
        return len(self.trace)


def execute_subtask(g: Subtask, env, q: QTable, cfg: ControllerConfig, rng) -> SubtaskResult:
    """Run the option from ``env.state`` with epsilon-greedy exploration.

    Stops on termination (success), after ``cfg.max_steps`` steps, or when the
    environment episode ends first (failure). Q is updated after every step.
    """
    s = env.state
    if not g.initiation(s):
        raise InitiationError(f"initiation unsatisfied for subtask {g.key}")
    if g.termination(s):
        return SubtaskResult([], True, 0.0)
    key = g.key
    actions = env.actions
    trace = []
    total = 0.0
    for _ in range(cfg.max_steps):
        eps = cfg.epsilon_greedy(q.steps[key])
        q.steps[key] += 1
        if rng.random() < eps:
            a = actions[rng.integers(len(actions))]
        else:
            best = q.greedy(key, s, actions)
            a = best[0] if len(best) == 1 else best[rng.integers(len(best))]
        s_next, r, done = env.step(a)
        total += r
        terminated = g.termination(s_next)
        r_i = intrinsic_reward(r, terminated, cfg)
        q_update(q, key, s, a, r_i, s_next, terminated or done, cfg, actions)
        trace.append((s, a, r_i, s_next))
        s = s_next
        if terminated:
            return SubtaskResult(trace, True, total, done)
        if done:
            return SubtaskResult(trace, False, total, True)
    return SubtaskResult(trace, False, total)


CONTROLLER_LOG_COLUMNS = ("episode", "subtask_key", "success", "steps", "env_reward_sum", "success_ratio")


class ControllerLog:
    def __init__(self, fh):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(CONTROLLER_LOG_COLUMNS)

    def write(self, episode: int, key: str, result: SubtaskResult, ratio: float) -> None:
        self._w.writerow([episode, key, int(result.success), result.steps,
                          f"{result.env_reward_sum:.6f}", f"{ratio:.6f}"])
