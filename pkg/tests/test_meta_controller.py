import pytest

from sdrl.meta_controller import MetaConfig, MetaTable, converged, extrinsic_reward, fixed_point, r_update

CFG = MetaConfig()


@pytest.mark.parametrize("ratio, env_return, expected", [(0.5, -10, -100), (0.95, -10, -10), (0.9, -10, -10)])
def test_extrinsic_reward(ratio, env_return, expected):
    assert extrinsic_reward(ratio, env_return, CFG) == expected


def test_single_update_ordering():
    m = MetaTable()
    r_update(m, "s", "g", 5.0, "t", MetaConfig(alpha=1.0, beta=1.0))
    assert m.r("s", "g") == 5.0
    assert m.rho("s", "g") == 0.0  # 5 + 0 - 5, read after R moved


def test_zero_reward_zero_table():
    m = MetaTable()
    r_update(m, "s", "g", 0.0, "t", CFG)
    assert m.r("s", "g") == 0.0 and m.rho("s", "g") == 0.0


def test_zero_rates_leave_values():
    m = MetaTable()
    m.r_values["s"] = {"g": 2.0}
    m.gain[("s", "g")] = 3.0
    r_update(m, "s", "g", 7.0, "t", MetaConfig(alpha=0.0, beta=0.0))
    assert m.r("s", "g") == 2.0 and m.rho("s", "g") == 3.0


def test_update_touches_one_pair():
    m = MetaTable()
    m.r_values = {"s": {"g": 1.0, "h": 2.0}, "t": {"g": 3.0}}
    m.gain = {("s", "h"): 4.0, ("t", "g"): 5.0}
    r_update(m, "s", "g", 1.0, "t", MetaConfig(alpha=0.3, beta=0.2))
    assert m.r_values["s"]["h"] == 2.0 and m.r_values["t"] == {"g": 3.0}
    assert m.gain[("s", "h")] == 4.0 and m.gain[("t", "g")] == 5.0


def test_current_state_bootstrap():
    m = MetaTable()
    m.r_values = {"s": {"h": 4.0}, "t": {"g": 10.0}}
    r_update(m, "s", "g", 1.0, "t", MetaConfig(alpha=1.0, beta=0.0, bootstrap="current"))
    assert m.r("s", "g") == 5.0


def test_converged():
    assert converged(None, [0.0, 0.0])
    assert not converged(None, [0.0, 2e-6], tol=1e-6)
    assert converged(None, [(1.0, 1.0), (0.0, 0.0)], sweep=1)


def test_fixed_point_is_stationary():
    r_e = {("a", "x", "b"): 2.0, ("b", "y", "a"): -1.0}
    h = {"a": 3.0, "b": -2.0}
    m = fixed_point(r_e, h.get)
    for (s, g, nxt), r in r_e.items():
        r_update(m, s, g, r, nxt, MetaConfig(alpha=0.5, beta=0.5))
    assert converged(m, tol=1e-12)


def test_monotone_at_threshold():
    below = extrinsic_reward(0.89, -20.0, CFG)
    at = extrinsic_reward(0.9, -20.0, CFG)
    assert at >= below


def test_config_validation():
    with pytest.raises(ValueError):
        MetaConfig(bootstrap="sideways")
    with pytest.raises(ValueError):
        MetaConfig(threshold=0.0)
    with pytest.raises(ValueError):
        extrinsic_reward(1.5, 0.0, CFG)
