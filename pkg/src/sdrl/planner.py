"""Transition semantics and an exact bounded-horizon plan search.

Plan quality is the sum of gain rewards rho(s, a) along a plan. The planner
returns the quality-maximal plan of at most ``max_len`` transitions, provided
its quality strictly exceeds the goal threshold. Ties are broken by plan
length, then by the action-identifier sequence.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .action_lang import (
    DYNAMIC,
    NONEXECUTABLE,
    ActionDescription,
    InconsistentEffects,
    SymbolicState,
    _apply_defaults,
    _close,
)

__all__ = [
    "InconsistentEffects",
    "IntrinsicGoal",
    "Plan",
    "RhoTable",
    "SymbolicTransition",
    "find_plan",
    "format_plan",
    "parse_plan",
    "plan_quality",
    "quality_bounded",
    "reachable_transitions",
    "state_hash",
    "successors",
]


@dataclass(frozen=True, order=True)
class SymbolicTransition:
    source: SymbolicState
    action: str
    target: SymbolicState

    def __iter__(self):
        return iter((self.source, self.action, self.target))

    def __str__(self) -> str:
        return f"<{self.source}, {self.action}, {self.target}>"


@dataclass(frozen=True)
class Plan:
    transitions: tuple[SymbolicTransition, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))

    def __len__(self) -> int:
        return len(self.transitions)

    def __iter__(self) -> Iterator[SymbolicTransition]:
        return iter(self.transitions)

    def __getitem__(self, i):
        return self.transitions[i]

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(t.action for t in self.transitions)

    @property
    def states(self) -> tuple[SymbolicState, ...]:
        if not self.transitions:
            return ()
        return (self.transitions[0].source,) + tuple(t.target for t in self.transitions)

    def is_chained(self) -> bool:
        return all(a.target == b.source for a, b in zip(self.transitions, self.transitions[1:]))

    def __str__(self) -> str:
        return " -> ".join(self.actions) if self.transitions else "<empty plan>"


@dataclass
class RhoTable:
    """Gain-reward facts with an optimistic default for unseen transitions."""

    default_inf: float = 10.0
    facts: dict[tuple[SymbolicState, str], float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.default_inf > 0 or not math.isfinite(self.default_inf):
            raise ValueError(f"default_inf must be a finite positive number, got {self.default_inf}")

    def __getitem__(self, key: tuple[SymbolicState, str]) -> float:
        return self.facts.get(key, self.default_inf)

    def __setitem__(self, key: tuple[SymbolicState, str], value: float) -> None:
        self.facts[key] = float(value)

    def __contains__(self, key) -> bool:
        return key in self.facts

    def copy(self) -> "RhoTable":
        return RhoTable(self.default_inf, dict(self.facts))


@dataclass(frozen=True)
class IntrinsicGoal:
    """Strict lower bound on plan quality."""

    threshold: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise ValueError("goal threshold must be finite")

    def satisfied_by(self, quality: float) -> bool:
        return quality > self.threshold


def _cache(d: ActionDescription) -> dict:
    try:
        return d.__dict__["_successor_cache"]
    except KeyError:
        cache: dict = {}
        object.__setattr__(d, "_successor_cache", cache)
        return cache


def _successor(d: ActionDescription, s: SymbolicState, action: str) -> SymbolicState | None:
    for law in d.laws_of(NONEXECUTABLE):
        if law.action == action and law.holds(s):
            return None
    effects: dict[str, str] = {}
    for law in d.laws_of(DYNAMIC):
        if law.action == action and law.holds(s):
            f, v = law.head.fluent, law.head.value
            if effects.get(f, v) != v:
                raise InconsistentEffects(action, f"{f}={effects[f]} and {f}={v}")
            effects[f] = v
    values = dict(effects)
    for f in d.inertial:
        values.setdefault(f, s[f])
    _apply_defaults(d, values, d.fluent_names)
    _close(d, values, dict(effects), action)
    return SymbolicState.from_mapping(d, values)


def successors(s: SymbolicState, d: ActionDescription) -> tuple[tuple[str, SymbolicState], ...]:
    """Executable actions in ``s`` with their successor states, in action order.

    Raises:
        InconsistentEffects: if two satisfied effects (or an effect and a static
            law) assign different values to one fluent.
    """
    cache = _cache(d)
    if s not in cache:
        out = []
        for action in d.actions:
            nxt = _successor(d, s, action)
            if nxt is not None:
                out.append((action, nxt))
        cache[s] = tuple(out)
    return cache[s]


def successor(s: SymbolicState, action: str, d: ActionDescription) -> SymbolicState | None:
    return dict(successors(s, d)).get(action)


def reachable_transitions(i: SymbolicState, d: ActionDescription) -> list[SymbolicTransition]:
    seen = {i}
    frontier = [i]
    out = []
    while frontier:
        s = frontier.pop()
        for a, t in successors(s, d):
            out.append(SymbolicTransition(s, a, t))
            if t not in seen:
                seen.add(t)
                frontier.append(t)
    return sorted(out)


def plan_quality(p: Plan | Iterable[SymbolicTransition], rho: RhoTable | Mapping) -> float:
    return math.fsum(rho[(t.source, t.action)] for t in p)


def find_plan(
    i: SymbolicState,
    g: IntrinsicGoal | float,
    d: ActionDescription,
    rho: RhoTable,
    max_len: int,
) -> Plan | None:
    """Best non-empty plan of at most ``max_len`` steps from ``i`` beating ``g``.

    The empty plan is never returned: ``None`` is the "nothing better" signal
    and the caller keeps its incumbent (initially empty, quality 0).

    The search is exact: a memoised recursion over (state, remaining depth)
    keeps, for each pair, the best plan under the ordering
    (higher quality, fewer steps, smaller action sequence). That ordering is
    preserved under prefixing a fixed transition, so the recursion is optimal.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    threshold = g.threshold if isinstance(g, IntrinsicGoal) else float(g)
    memo: dict[tuple[SymbolicState, int], tuple] = {}

    def best(s: SymbolicState, k: int) -> tuple:
        # (-quality, length, actions, rho terms, transitions)
        key = (s, k)
        if key in memo:
            return memo[key]
        result = (-0.0, 0, (), (), ())
        if k > 0:
            for a, t in successors(s, d):
                sub = best(t, k - 1)
                terms = (rho[(s, a)],) + sub[3]
                cand = (-math.fsum(terms), sub[1] + 1, (a,) + sub[2], terms,
                        (SymbolicTransition(s, a, t),) + sub[4])
                if cand[:3] < result[:3]:
                    result = cand
        memo[key] = result
        return result

    top = None
    for a, t in successors(i, d):
        sub = best(t, max_len - 1)
        terms = (rho[(i, a)],) + sub[3]
        cand = (-math.fsum(terms), sub[1] + 1, (a,) + sub[2], terms,
                (SymbolicTransition(i, a, t),) + sub[4])
        if top is None or cand[:3] < top[:3]:
            top = cand
    if top is None or not -top[0] > threshold:
        return None
    return Plan(top[4])


def quality_bounded(i: SymbolicState, d: ActionDescription, rho: RhoTable, eps: float = 1e-9) -> bool:
    """False iff a cycle with positive total rho is reachable from ``i``.

    Longest-path relaxation: with no positive cycle every distance settles
    after |V| - 1 rounds, so any change in round |V| exposes one.
    """
    edges = [(t.source, t.target, rho[(t.source, t.action)]) for t in reachable_transitions(i, d)]
    nodes = {i} | {e[0] for e in edges} | {e[1] for e in edges}
    dist = {n: 0.0 for n in nodes}
    for _ in range(len(nodes)):
        changed = False
        for u, v, w in edges:
            if dist[u] + w > dist[v] + eps:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return True
    return False


def state_hash(s: SymbolicState) -> str:
    return hashlib.sha1(str(s).encode()).hexdigest()[:10]


def format_plan(p: Plan, rho: RhoTable | None = None, quality: float | None = None) -> str:
    """Serialise a plan: a state listing, one ``hash action hash'`` line per step, quality."""
    if quality is None:
        quality = plan_quality(p, rho) if rho is not None else 0.0
    lines = ["# states"]
    seen = set()
    for s in p.states:
        h = state_hash(s)
        if h not in seen:
            seen.add(h)
            lines.append(f"{h} {s}")
    lines.append("# transitions")
    lines.extend(f"{state_hash(t.source)} {t.action} {state_hash(t.target)}" for t in p)
    lines.append(f"quality {quality:.6f}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str, d: ActionDescription) -> tuple[Plan, float]:
    """Inverse of :func:`format_plan`; checks chaining and executability."""
    states: dict[str, SymbolicState] = {}
    transitions = []
    quality = math.nan
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            section = line[1:].strip()
            continue
        if line.startswith("quality "):
            quality = float(line.split()[1])
        elif section == "states":
            h, atoms = line.split(maxsplit=1)
            values = dict(a.split("=", 1) for a in atoms.split(","))
            states[h] = SymbolicState.from_mapping(d, values)
        elif section == "transitions":
            h1, action, h2 = line.split()
            t = SymbolicTransition(states[h1], action, states[h2])
            if successor(t.source, action, d) != t.target:
                raise ValueError(f"not a valid transition: {t}")
            transitions.append(t)
        else:
            raise ValueError(f"unexpected line {line!r}")
    plan = Plan(transitions)
    if not plan.is_chained():
        raise ValueError("plan transitions are not chained")
    return plan, quality
