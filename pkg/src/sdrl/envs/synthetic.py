"""Labelled-graph fixtures with exact extrinsic rewards.

A spec is a finite labelled graph: nodes, an initial node and edges
``(source, label, target, r_e)``. The symbolic domain has one fluent ``node``
and one action per label; the environment's primitive actions are the same
labels, so every subtask is learnable in a single step and earns exactly its
edge's r_e.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..action_lang import ActionDescription, SymbolicState, initial_state, parse_action_description
from ..planner import SymbolicTransition


class MalformedSpec(ValueError):
    pass


@dataclass(frozen=True)
class GraphSpec:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, str, float], ...]
    initial: str

    def __post_init__(self):
        if not self.nodes:
            raise MalformedSpec("graph has no nodes")
        if len(set(self.nodes)) != len(self.nodes):
            raise MalformedSpec("duplicate node names")
        if self.initial not in self.nodes:
            raise MalformedSpec(f"initial node {self.initial!r} is not a node")
        seen = set()
        for e in self.edges:
            if len(e) != 4:
                raise MalformedSpec(f"edge {e!r} is not (source, label, target, r_e)")
            src, label, dst, _ = e
            if src not in self.nodes or dst not in self.nodes:
                raise MalformedSpec(f"edge {e!r} uses an unknown node")
            if not label.isidentifier() or not label[0].islower():
                raise MalformedSpec(f"label {label!r} must be a lower-case identifier")
            if (src, label) in seen:
                raise MalformedSpec(f"two edges labelled {label!r} leave {src!r}")
            seen.add((src, label))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted({e[1] for e in self.edges}))

    def to_text(self) -> str:
        lines = [f"sort node_t = {{{', '.join(self.nodes)}}}", "fluent node : node_t"]
        lines += [f"action {a}" for a in self.labels]
        for src, label, dst, _ in self.edges:
            lines.append(f"dynamic {label} causes node={dst} if node={src}")
        outgoing = {(e[0], e[1]) for e in self.edges}
        for label in self.labels:
            for n in self.nodes:
                if (n, label) not in outgoing:
                    lines.append(f"nonexecutable {label} if node={n}")
        lines.append("inertial node")
        return "\n".join(lines) + "\n"


class GraphEnv:
    """Deterministic env: taking an edge's label follows it and pays its r_e;
    a label with no edge at the current node is a no-op paying 0."""

    def __init__(self, spec: GraphSpec):
        self.spec = spec
        self.actions = spec.labels or ("noop",)
        self._edges = {(s, a): (t, float(r)) for s, a, t, r in spec.edges}
        self.state = spec.initial

    def reset(self, rng=None) -> str:
        self.state = self.spec.initial
        return self.state

    def transition(self, state: str, action: str) -> tuple[str, float, bool]:
        nxt, r = self._edges.get((state, action), (state, 0.0))
        return nxt, r, False

    def step(self, action: str) -> tuple[str, float, bool]:
        self.state, r, done = self.transition(self.state, action)
        return self.state, r, done

    def states(self) -> Sequence[str]:
        return self.spec.nodes

    @staticmethod
    def grounding(symbolic: SymbolicState, env_state: str) -> bool:
        if set(symbolic) != {"node"}:
            raise KeyError(f"unknown fluents in {symbolic}")
        return symbolic["node"] == env_state


def make_synthetic(spec: GraphSpec | Mapping) -> tuple[ActionDescription, GraphEnv, SymbolicState]:
    """Build (description, environment, initial symbolic state) from a graph spec."""
    if not isinstance(spec, GraphSpec):
        try:
            spec = GraphSpec(tuple(spec["nodes"]), tuple(map(tuple, spec["edges"])), spec["initial"])
        except (KeyError, TypeError) as exc:
            raise MalformedSpec(f"spec needs nodes, edges and initial: {exc}") from exc
    d = parse_action_description(spec.to_text())
    return d, GraphEnv(spec), initial_state(d, {"node": spec.initial})


def r_e_table(d: ActionDescription, spec: GraphSpec) -> dict[tuple[SymbolicState, str], float]:
    """Ground-truth extrinsic reward per symbolic (state, action)."""
    return {(SymbolicState((("node", s),)), a): float(r) for s, a, _, r in spec.edges}


def random_spec(rng: np.random.Generator, max_states: int = 6, max_actions: int = 4,
                rewards: Sequence[int] = (-2, -1, 0, 1, 2), edge_prob: float = 0.5) -> GraphSpec:
    """Random graph with at most ``max_states`` nodes and ``max_actions`` labels."""
    n = int(rng.integers(2, max_states + 1))
    k = int(rng.integers(1, max_actions + 1))
    nodes = tuple(f"n{i}" for i in range(n))
    edges = []
    for i in range(n):
        for j in range(k):
            if rng.random() < edge_prob:
                edges.append((nodes[i], f"a{j}", nodes[int(rng.integers(n))],
                              float(rewards[int(rng.integers(len(rewards)))])))
    if not any(e[0] == nodes[0] for e in edges):
        edges.append((nodes[0], "a0", nodes[int(rng.integers(1, n))],
                      float(rewards[int(rng.integers(len(rewards)))])))
    return GraphSpec(nodes, tuple(edges), nodes[0])


def transitions_of(spec: GraphSpec) -> list[SymbolicTransition]:
    return [SymbolicTransition(SymbolicState((("node", s),)), a, SymbolicState((("node", t),)))
            for s, a, t, _ in spec.edges]
