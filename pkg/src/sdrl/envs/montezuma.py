"""Symbolic layer of the first Montezuma's Revenge room (planner fixture only)."""

from __future__ import annotations

from importlib import resources

from ..action_lang import ActionDescription, SymbolicState, parse_action_description
from ..planner import RhoTable, SymbolicTransition, successor

# (number, source location, key held, target location, in the optimal plan)
# Rows marked "with or without key" appear once per key status that the
# description allows; the key location itself cannot be re-entered with the key.
TABLE3 = (
    (1, "mp", False, "lrl", True),
    (2, "lrl", False, "lll", True),
    (3, "lll", False, "key", True),
    (4, "key", True, "lll", True),
    (5, "lll", False, "lrl", True),
    (5, "lll", True, "lrl", True),
    (6, "lrl", False, "mp", True),
    (6, "lrl", True, "mp", True),
    (7, "mp", True, "rd", True),
    (8, "lrl", False, "ls", False),
    (8, "lrl", True, "ls", False),
    (9, "ls", False, "key", False),
    (10, "mp", False, "rd", False),
    (11, "lrl", False, "key", False),
    (12, "key", True, "lrl", False),
    (13, "lrl", True, "rd", False),
)

OPTIMAL_SEQUENCE = (1, 2, 3, 4, 5, 6, 7)


def load(name: str = "montezuma.bc") -> ActionDescription:
    text = resources.files("sdrl.data").joinpath(name).read_text()
    return parse_action_description(text)


def symbolic_state(loc: str, key: bool) -> SymbolicState:
    return SymbolicState((("loc", loc), ("picked_key", "true" if key else "false")))


def table3_transitions(d: ActionDescription) -> dict[SymbolicTransition, int]:
    """Map each fixture transition to its subtask number."""
    out = {}
    for no, src, key, dst, _ in TABLE3:
        s = symbolic_state(src, key)
        action = f"move({dst})"
        t = successor(s, action, d)
        if t is None:
            raise ValueError(f"subtask {no} is not executable in the description")
        out[SymbolicTransition(s, action, t)] = no
    return out


def table3_rho(
    d: ActionDescription,
    step: float = -10.0,
    rewards: dict[int, float] | None = None,
    psi: float = 100.0,
    default_inf: float = 10.0,
) -> RhoTable:
    """Gain facts after learning: learnable steps cost ``step`` plus any
    environment reward (key +100, door +300); subtasks 8-13 are penalised."""
    rewards = {3: 100.0, 7: 300.0} if rewards is None else rewards
    rho = RhoTable(default_inf)
    for t, no in table3_transitions(d).items():
        rho[(t.source, t.action)] = -psi if no >= 8 else step + rewards.get(no, 0.0)
    return rho
