"""Taxi with a coupon, on the classic 5x5 map.

Cells are ``(row, col)`` with ``(0, 0)`` top-left. The taxi always starts at
``(0, 4)``; the coupon lies at ``(4, 4)``::

    +---------+
    |R: | : :G|
    | : | : : |
    | : : : : |
    | | : | : |
    |Y| : |B: |
    +---------+
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from importlib import resources
from typing import Iterator, NamedTuple

from ..action_lang import ActionDescription, SymbolicState, parse_action_description

Cell = tuple[int, int]
SIZE = 5
IN_TAXI = "in_taxi"
ACTIONS = ("N", "S", "E", "W", "pickup", "dropoff", "collect")
MOVES = {"N": (-1, 0), "S": (1, 0), "E": (0, 1), "W": (0, -1)}
LANDMARKS: dict[str, Cell] = {"R": (0, 0), "G": (0, 4), "Y": (4, 0), "B": (4, 3)}

# (row, left col): a wall between columns col and col + 1 on that row
WALLS = frozenset({(3, 0), (4, 0), (0, 1), (1, 1), (3, 2), (4, 2)})

START: Cell = (0, 4)
COUPON: Cell = (4, 4)
SOURCE: Cell = LANDMARKS["R"]
DESTINATION: Cell = (0, 3)

MOVE_REWARD = -1.0
ILLEGAL_REWARD = -10.0
COUPON_REWARD = 10.0


class TaxiState(NamedTuple):
    taxi: Cell
    passenger: Cell | str  # a cell, or IN_TAXI
    destination: Cell
    coupon_available: bool


@dataclass(frozen=True)
class TaskSchedule:
    base_dropoff_reward: float = 50.0
    decrement: float = 5.0
    episodes_per_task: int = 2000
    num_tasks: int = 10
    reset_cell: Cell = START

    def dropoff_reward(self, task: int) -> float:
        """Reward for a successful drop-off in ``task`` (1-based)."""
        if not 1 <= task <= self.num_tasks:
            raise ValueError(f"task must be in 1..{self.num_tasks}, got {task}")
        return self.base_dropoff_reward - self.decrement * (task - 1)

    def task_of(self, episode: int) -> int:
        return min(episode // self.episodes_per_task, self.num_tasks - 1) + 1

    @property
    def total_episodes(self) -> int:
        return self.episodes_per_task * self.num_tasks


def blocked(cell: Cell, move: str) -> bool:
    r, c = cell
    dr, dc = MOVES[move]
    nr, nc = r + dr, c + dc
    if not (0 <= nr < SIZE and 0 <= nc < SIZE):
        return True
    if dc == 1:
        return (r, c) in WALLS
    if dc == -1:
        return (r, nc) in WALLS
    return False


def taxi_step(s: TaxiState, action: str, dropoff_reward: float = 50.0) -> tuple[TaxiState, float, bool]:
    if action in MOVES:
        if blocked(s.taxi, action):
            return s, MOVE_REWARD, False
        dr, dc = MOVES[action]
        return s._replace(taxi=(s.taxi[0] + dr, s.taxi[1] + dc)), MOVE_REWARD, False
    if action == "pickup":
        if s.passenger != IN_TAXI and s.passenger == s.taxi and s.passenger != s.destination:
            return s._replace(passenger=IN_TAXI), MOVE_REWARD, False
        return s, ILLEGAL_REWARD, False
    if action == "dropoff":
        if s.passenger == IN_TAXI and s.taxi == s.destination:
            return s._replace(passenger=s.destination), dropoff_reward, True
        return s, ILLEGAL_REWARD, False
    if action == "collect":
        if s.coupon_available and s.taxi == COUPON:
            return s._replace(coupon_available=False), COUPON_REWARD, False
        return s, ILLEGAL_REWARD, False
    raise ValueError(f"unknown taxi action {action!r}")


class TaxiEnv:
    actions = ACTIONS

    def __init__(self, dropoff_reward: float = 50.0, source: Cell = SOURCE,
                 destination: Cell = DESTINATION, start: Cell = START):
        self.dropoff_reward = dropoff_reward
        self.source = source
        self.destination = destination
        self.start = start
        self.state = self.initial()

    def initial(self) -> TaxiState:
        return TaxiState(self.start, self.source, self.destination, True)

    def reset(self, rng=None) -> TaxiState:
        self.state = self.initial()
        return self.state

    def transition(self, s: TaxiState, action: str) -> tuple[TaxiState, float, bool]:
        return taxi_step(s, action, self.dropoff_reward)

    def step(self, action: str) -> tuple[TaxiState, float, bool]:
        self.state, r, done = taxi_step(self.state, action, self.dropoff_reward)
        return self.state, r, done

    def states(self) -> Iterator[TaxiState]:
        for r in range(SIZE):
            for c in range(SIZE):
                for p in (self.source, IN_TAXI, self.destination):
                    for coupon in (True, False):
                        yield TaxiState((r, c), p, self.destination, coupon)

    @property
    def places(self) -> dict[str, Cell]:
        return {"start": self.start, "pass_src": self.source, "dest": self.destination,
                "coupon_site": COUPON}

    def grounding(self, symbolic: SymbolicState, s: TaxiState) -> bool:
        return taxi_grounding(symbolic, s, self.places)

    def render(self, s: TaxiState | None = None) -> str:
        s = s or self.state
        rows = ["+" + "-" * (2 * SIZE - 1) + "+"]
        for r in range(SIZE):
            line = "|"
            for c in range(SIZE):
                ch = " "
                if (r, c) == COUPON and s.coupon_available:
                    ch = "$"
                if (r, c) == s.destination:
                    ch = "D"
                if s.passenger == (r, c):
                    ch = "P"
                if s.taxi == (r, c):
                    ch = "t" if s.passenger != IN_TAXI else "T"
                line += ch
                if c < SIZE - 1:
                    line += "|" if (r, c) in WALLS else ":"
            rows.append(line + "|")
        rows.append(rows[0])
        return "\n".join(rows)


def taxi_grounding(symbolic: SymbolicState, s: TaxiState, places: dict[str, Cell] | None = None) -> bool:
    """True iff every atom of ``symbolic`` holds in ``s``."""
    places = places or {"start": START, "pass_src": SOURCE, "dest": DESTINATION, "coupon_site": COUPON}
    for fluent, value in symbolic.items():
        if fluent == "at":
            ok = s.taxi == places[value]
        elif fluent == "have_passenger":
            ok = (s.passenger == IN_TAXI) == (value == "true")
        elif fluent == "coupon_taken":
            ok = (not s.coupon_available) == (value == "true")
        elif fluent == "delivered":
            ok = (s.passenger == s.destination) == (value == "true")
        else:
            raise KeyError(f"unknown taxi fluent {fluent!r}")
        if not ok:
            return False
    return True


def load_description() -> ActionDescription:
    return parse_action_description(resources.files("sdrl.data").joinpath("taxi.bc").read_text())


def shortest_path_length(a: Cell, b: Cell) -> int:
    """BFS distance between two cells under the walls."""
    dist = {a: 0}
    queue = deque([a])
    while queue:
        cell = queue.popleft()
        if cell == b:
            return dist[cell]
        for m in MOVES:
            if not blocked(cell, m):
                nxt = (cell[0] + MOVES[m][0], cell[1] + MOVES[m][1])
                if nxt not in dist:
                    dist[nxt] = dist[cell] + 1
                    queue.append(nxt)
    raise ValueError(f"{b} unreachable from {a}")
