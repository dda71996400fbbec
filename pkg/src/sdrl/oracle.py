"""Brute-force ground truth for tests: plan enumeration, optimal plans,
positive-loop detection and value iteration on small MDPs.

Nothing here learns. Reward tables come from fixtures or from exhaustive
search of the concrete environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Hashable, Iterable, Mapping

from .action_lang import ActionDescription, SymbolicState, all_states
from .planner import Plan, SymbolicTransition, reachable_transitions, successors

RewardTable = Mapping[tuple[SymbolicState, str], float]


class NotEnumerable(TypeError):
    """The environment cannot list its states or simulate a transition."""


@dataclass(frozen=True)
class PlanSet:
    plans: tuple[Plan, ...]
    max_len: int

    def __len__(self) -> int:
        return len(self.plans)

    def __iter__(self):
        return iter(self.plans)


def enumerate_plans(i: SymbolicState, d: ActionDescription, max_len: int) -> PlanSet:
    """Every chained, executable transition sequence from ``i`` of length
    at most ``max_len``, including the empty plan, in depth-first order."""
    if max_len < 0:
        raise ValueError("max_len must be >= 0")
    out: list[Plan] = []

    def expand(s: SymbolicState, prefix: tuple[SymbolicTransition, ...]) -> None:
        out.append(Plan(prefix))
        if len(prefix) == max_len:
            return
        for a, t in successors(s, d):
            expand(t, prefix + (SymbolicTransition(s, a, t),))

    expand(i, ())
    return PlanSet(tuple(out), max_len)


def count_plans(i: SymbolicState, d: ActionDescription, max_len: int) -> int:
    """Number of plans of length <= ``max_len``, counted without building them."""

    @lru_cache(maxsize=None)
    def count(s: SymbolicState, k: int) -> int:
        if k == 0:
            return 1
        return 1 + sum(count(t, k - 1) for _, t in successors(s, d))

    return count(i, max_len)


def plan_return(p: Plan, r_e: RewardTable) -> float:
    return math.fsum(r_e[(t.source, t.action)] for t in p)


def brute_force_optimal(ps: PlanSet | Iterable[Plan], r_e: RewardTable) -> tuple[Plan, float]:
    """Plan with the highest total r_e; ties go to the shorter plan, then to
    the smaller action sequence (the planner's order)."""
    best = None
    for p in ps:
        total = plan_return(p, r_e)
        key = (-total, len(p), p.actions)
        if best is None or key < best[0]:
            best = (key, p, total)
    if best is None:
        raise ValueError("empty plan set")
    return best[1], best[2]


def detect_positive_loop(d: ActionDescription, r_e: RewardTable,
                         initial: SymbolicState | None = None) -> bool:
    """True iff a cycle with strictly positive total r_e is reachable.

    Reachability is from ``initial``; with no initial state every state of
    the description counts. Bellman-Ford on negated weights: a negative
    cycle is exactly a positive-reward loop.
    """
    if initial is not None:
        roots = [initial]
    else:
        roots = list(all_states(d))
    edges: set[SymbolicTransition] = set()
    for root in roots:
        edges.update(reachable_transitions(root, d))
    nodes = set(roots) | {t.source for t in edges} | {t.target for t in edges}
    weight = [(t.source, t.target, -r_e[(t.source, t.action)]) for t in sorted(edges)]
    dist = {n: 0.0 for n in nodes}  # virtual source joined to every node
    for _ in range(len(nodes) - 1):
        changed = False
        for u, v, w in weight:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            return False
    return any(dist[u] + w < dist[v] for u, v, w in weight)


@dataclass
class Policy:
    """Optimal state values and, per state, every optimal action."""

    values: dict[Hashable, float]
    actions: dict[Hashable, tuple]
    terminal: frozenset

    def __getitem__(self, s):
        return self.actions[s]


def value_iteration_policy(env, gamma: float,
                           terminal: Callable[[Any], bool] | None = None,
                           reward: Callable[[Any, Any, float, Any], float] | None = None,
                           states: Iterable | None = None,
                           tol: float = 1e-12, tie_tol: float = 1e-9,
                           max_iter: int = 100_000) -> Policy:
    """Value iteration on an enumerable, deterministic environment.

    ``env`` must offer ``states()``, ``actions`` and ``transition(s, a) ->
    (s', r, done)``. ``terminal(s)`` marks absorbing states (value 0);
    ``reward(s, a, r, s')`` rewrites the environment reward, which is how a
    subtask's intrinsic reward is plugged in. Transitions with ``done`` end
    the episode. ``states`` restricts the MDP; a transition leaving it ends
    the episode as well.
    """
    if not (hasattr(env, "states") and hasattr(env, "transition") and hasattr(env, "actions")):
        raise NotEnumerable(f"{type(env).__name__} does not expose states(), actions and transition()")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    terminal = terminal or (lambda s: False)
    states = list(env.states() if states is None else states)
    inside = set(states)
    dead = frozenset(s for s in states if terminal(s))
    model = {}
    for s in states:
        if s in dead:
            continue
        row = []
        for a in env.actions:
            nxt, r, done = env.transition(s, a)
            if reward is not None:
                r = reward(s, a, r, nxt)
            row.append((a, nxt, r, done or nxt in dead or nxt not in inside))
        model[s] = row
    v = {s: 0.0 for s in states}

    def q(row_item):
        a, nxt, r, stop = row_item
        return r if stop else r + gamma * v.get(nxt, 0.0)

    for _ in range(max_iter):
        delta = 0.0
        for s, row in model.items():
            new = max(q(x) for x in row)
            delta = max(delta, abs(new - v[s]))
            v[s] = new
        if delta < tol:
            break
    else:
        raise RuntimeError("value iteration did not converge")
    acts = {}
    for s, row in model.items():
        qs = [(x[0], q(x)) for x in row]
        top = max(val for _, val in qs)
        acts[s] = tuple(a for a, val in qs if val >= top - tie_tol)
    return Policy(v, acts, dead)


def subtask_policy(env, subtask, gamma: float, phi: float) -> Policy:
    """Optimal policy of a subtask's own MDP.

    The MDP covers the environment states where every fluent the transition
    leaves unchanged keeps its source value; leaving that frame ends the
    attempt. Reaching the target pays ``phi``, as the intrinsic reward does.
    """
    src, dst = subtask.transition.source, subtask.transition.target
    frame = SymbolicState(tuple((f, v) for f, v in src.items() if dst[f] == v))
    states = [s for s in env.states() if subtask.oracle(frame, s)]
    return value_iteration_policy(
        env, gamma, terminal=subtask.termination,
        reward=lambda s, a, r, nxt: phi if subtask.termination(nxt) else r,
        states=states)


# Taxi ground truth ------------------------------------------------------

def taxi_concrete_state(symbolic: SymbolicState, env):
    """The unique concrete Taxi state grounding ``symbolic``."""
    from .envs.taxi import IN_TAXI, TaxiState

    cell = env.places[symbolic["at"]]
    if symbolic["delivered"] == "true":
        passenger = env.destination
    elif symbolic["have_passenger"] == "true":
        passenger = IN_TAXI
    else:
        passenger = env.source
    return TaxiState(cell, passenger, env.destination, symbolic["coupon_taken"] == "false")


def best_return(env, start, goal: Callable[[Any], bool], depth: int = 30) -> float:
    """Highest undiscounted return of a primitive action sequence of length
    <= ``depth`` that leads from ``start`` to a state satisfying ``goal``."""

    @lru_cache(maxsize=None)
    def go(s, k: int) -> float:
        if goal(s):
            return 0.0
        if k == 0:
            return -math.inf
        best = -math.inf
        for a in env.actions:
            nxt, r, done = env.transition(s, a)
            if done and not goal(nxt):
                continue
            best = max(best, r + go(nxt, k - 1))
        return best

    return go(start, depth)


def taxi_r_e(d: ActionDescription, initial: SymbolicState, env, depth: int = 30) -> dict:
    """Exact extrinsic reward of every reachable symbolic Taxi transition:
    the best primitive-level return from the grounded source to the target."""
    table = {}
    for t in reachable_transitions(initial, d):
        start = taxi_concrete_state(t.source, env)
        table[(t.source, t.action)] = best_return(env, start, lambda s, t=t: env.grounding(t.target, s), depth)
    return table


def taxi_episode_optimum(env, depth: int = 30) -> float:
    """Best total reward of any primitive action sequence of length <= ``depth``
    from the reset state; an episode may end early only by a drop-off."""

    @lru_cache(maxsize=None)
    def go(s, k: int) -> float:
        if k == 0:
            return 0.0
        best = 0.0
        for a in env.actions:
            nxt, r, done = env.transition(s, a)
            best = max(best, r if done else r + go(nxt, k - 1))
        return best

    return go(env.initial(), depth)
