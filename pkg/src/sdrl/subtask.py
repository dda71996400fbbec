"""Options induced from symbolic transitions through a grounding oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Protocol

from .planner import SymbolicTransition


class GroundingOracle(Protocol):
    def __call__(self, symbolic: Any, env_state: Any) -> bool: ...


@dataclass(frozen=True)
class Subtask:
    """A transition ``<s, a, s'>`` viewed as an option.

    It can start wherever ``s`` grounds true and terminates (with probability
    one) as soon as ``s'`` grounds true.
    """

    transition: SymbolicTransition
    oracle: Callable[[Any, Any], bool]

    @property
    def id(self) -> SymbolicTransition:
        return self.transition

    @property
    def key(self) -> str:
        return subtask_key(self)

    def initiation(self, env_state) -> bool:
        return bool(self.oracle(self.transition.source, env_state))

    def termination(self, env_state) -> bool:
        return bool(self.oracle(self.transition.target, env_state))


def induce_option(t: SymbolicTransition, f: GroundingOracle) -> Subtask:
    return Subtask(t, f)


def subtask_key(s: Subtask | SymbolicTransition) -> str:
    """Canonical ``from|action|to`` string; injective over transitions."""
    t = s.transition if isinstance(s, Subtask) else s
    return f"{t.source}|{t.action}|{t.target}"


def format_subtask_table(
    transitions: Iterable[SymbolicTransition],
    learned: Callable[[SymbolicTransition], bool] | None = None,
    in_plan: Callable[[SymbolicTransition], bool] | None = None,
) -> str:
    """Tab-separated listing: number, key, from-atoms, action, to-atoms and two marks."""
    rows = ["no\tkey\tfrom\taction\tto\tlearned\tin_plan"]
    for n, t in enumerate(transitions, start=1):
        mark_l = "x" if learned and learned(t) else ""
        mark_p = "x" if in_plan and in_plan(t) else ""
        rows.append(f"{n}\t{subtask_key(t)}\t{t.source}\t{t.action}\t{t.target}\t{mark_l}\t{mark_p}")
    return "\n".join(rows) + "\n"
