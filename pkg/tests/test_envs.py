import itertools

import pytest

from sdrl.envs.synthetic import GraphEnv, GraphSpec, MalformedSpec, make_synthetic, r_e_table
from sdrl.envs.taxi import (
    COUPON,
    DESTINATION,
    IN_TAXI,
    SIZE,
    SOURCE,
    START,
    TaskSchedule,
    TaxiEnv,
    TaxiState,
    blocked,
    shortest_path_length,
    taxi_grounding,
    taxi_step,
)
from sdrl.oracle import brute_force_optimal, enumerate_plans


def test_dropoff_schedule():
    sched = TaskSchedule()
    assert [sched.dropoff_reward(k) for k in range(1, 11)] == [50 - 5 * (k - 1) for k in range(1, 11)]
    assert sched.dropoff_reward(2) == 45
    assert sched.task_of(0) == 1 and sched.task_of(2000) == 2 and sched.total_episodes == 20000
    with pytest.raises(ValueError):
        sched.dropoff_reward(11)


def test_moves_cost_one():
    s = TaxiEnv().initial()
    for m in "NSEW":
        assert taxi_step(s, m)[1] == -1


def test_blocked_move_keeps_position():
    s = TaxiState((0, 1), SOURCE, DESTINATION, True)
    assert blocked((0, 1), "E")
    nxt, r, done = taxi_step(s, "E")
    assert nxt == s and r == -1 and not done


def test_dropoff_task_two():
    s = TaxiState(DESTINATION, IN_TAXI, DESTINATION, True)
    nxt, r, done = taxi_step(s, "dropoff", TaskSchedule().dropoff_reward(2))
    assert r == 45 and done and nxt.passenger == DESTINATION


@pytest.mark.parametrize("action", ["pickup", "dropoff"])
def test_improper_actions(action):
    s = TaxiState((2, 2), SOURCE, DESTINATION, True)
    assert taxi_step(s, action) == (s, -10, False)


def test_coupon_once():
    s = TaxiState(COUPON, SOURCE, DESTINATION, True)
    s1, r1, _ = taxi_step(s, "collect")
    s2, r2, _ = taxi_step(s1, "collect")
    assert (r1, r2) == (10, -10) and not s1.coupon_available and s2 == s1


def test_determinism():
    env = TaxiEnv()
    for s in env.states():
        for a in env.actions:
            assert env.transition(s, a) == env.transition(s, a)


def test_walls_symmetric():
    for r, c in itertools.product(range(SIZE), range(SIZE - 1)):
        assert blocked((r, c), "E") == blocked((r, c + 1), "W")


def test_route_lengths():
    assert shortest_path_length(START, COUPON) == 4
    assert shortest_path_length(COUPON, SOURCE) == 8
    assert shortest_path_length(SOURCE, DESTINATION) == 7


def test_grounding(taxi_d, taxi_i):
    from sdrl.planner import successor
    at_coupon = successor(taxi_i, "goto(coupon_site)", taxi_d)
    s = TaxiEnv().initial()
    assert taxi_grounding(at_coupon, s._replace(taxi=COUPON))
    assert not taxi_grounding(at_coupon, s)
    with pytest.raises(KeyError):
        from sdrl.action_lang import SymbolicState
        taxi_grounding(SymbolicState((("fuel", "low"),)), s)


def test_render():
    text = TaxiEnv().render()
    assert text.count("\n") == 6 and "$" in text and "t" in text


def test_synthetic_unique_plan():
    spec = GraphSpec(("a", "b"), (("a", "go", "b", 5.0),), "a")
    d, env, i = make_synthetic(spec)
    best, total = brute_force_optimal(enumerate_plans(i, d, 3), r_e_table(d, spec))
    assert best.actions == ("go",) and total == 5
    env.reset()
    assert env.step("go") == ("b", 5.0, False)
    assert env.step("go") == ("b", 0.0, False)


@pytest.mark.parametrize("raw", [
    {"nodes": [], "edges": [], "initial": "a"},
    {"nodes": ["a"], "edges": [], "initial": "z"},
    {"nodes": ["a"], "edges": [["a", "go", "q", 1]], "initial": "a"},
    {"nodes": ["a"], "edges": [["a", "Go", "a", 1]], "initial": "a"},
    {"nodes": ["a"], "edges": [["a", "go", "a", 1], ["a", "go", "a", 2]], "initial": "a"},
    {"nodes": ["a"]},
])
def test_malformed_specs(raw):
    with pytest.raises(MalformedSpec):
        make_synthetic(raw)


def test_graph_grounding():
    from sdrl.action_lang import SymbolicState
    assert GraphEnv.grounding(SymbolicState((("node", "a"),)), "a")
    with pytest.raises(KeyError):
        GraphEnv.grounding(SymbolicState((("x", "a"),)), "a")
