import json

import pytest

from sdrl.cli import main
from sdrl.config import ConfigError, RunConfig, load_config, parse_config, parse_seeds
from sdrl.planner import parse_plan
from sdrl.envs.montezuma import load
from sdrl.envs.synthetic import make_synthetic


def test_validate_montezuma(capsys):
    assert main(["validate", "montezuma.bc"]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_reports_diagnostics(tmp_path, capsys):
    f = tmp_path / "bad.bc"
    f.write_text("fluent f : bool\naction go\n")
    assert main(["validate", str(f)]) == 1
    assert "uncovered fluent" in capsys.readouterr().out


def test_plan_quality_seventy(capsys):
    assert main(["plan", "montezuma.bc", "--from", "loc=mp", "--max-len", "7"]) == 0
    out = capsys.readouterr().out
    assert out.rstrip().endswith("quality 70.000000")
    plan, q = parse_plan(out, load())
    assert len(plan) == 7 and q == 70


def test_plan_none(capsys):
    assert main(["plan", "montezuma.bc", "--from", "loc=mp", "--max-len", "2", "--goal", "20"]) == 1


@pytest.mark.parametrize("argv", [
    [], ["bogus"], ["plan"], ["plan", "missing.bc"], ["plan", "montezuma.bc", "--max-len", "0"],
    ["plan", "montezuma.bc", "--from", "loc"], ["run"], ["run", "--config", "missing.cfg"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_runtime_error(tmp_path):
    f = tmp_path / "broken.bc"
    f.write_text("fluent f : bool\naction go\ndynamic stop causes f=true\n")
    assert main(["validate", str(f)]) == 1


def test_bad_config_key(tmp_path):
    f = tmp_path / "x.cfg"
    f.write_text("env = taxi\nspeed = 3\n")
    assert main(["run", "--config", str(f)]) == 2


def test_montezuma_fixture_run(tmp_path, capsys):
    assert main(["run", "--config", "montezuma.cfg", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "quality 330.000000" in out
    assert (tmp_path / "plan_fixture.txt").exists()


def test_oracle_taxi(capsys):
    assert main(["oracle", "--config", "taxi.cfg", "--task", "8"]) == 0
    out = capsys.readouterr().out
    assert "optimal plan: goto(coupon_site) -> collect" in out
    assert "positive loop: no" in out


def test_synthetic_run(tmp_path, capsys):
    graph = tmp_path / "g.json"
    graph.write_text(json.dumps({"nodes": ["a", "b"], "edges": [["a", "go", "b", 5]], "initial": "a"}))
    cfg = tmp_path / "g.cfg"
    cfg.write_text(f"env = synthetic\ngraph = {graph}\nseeds = 1-2\nepisodes = 100\nalpha = 0.5\nbeta = 0.5\n")
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    report = (out / "report.txt").read_text().splitlines()
    assert report == ["seed 1\tconverged\tgo", "seed 2\tconverged\tgo"]
    for seed in (1, 2):
        assert (out / f"curve_seed{seed}.csv").exists() and (out / f"subtasks_seed{seed}.tsv").exists()
    d = make_synthetic(json.loads(graph.read_text()))[0]
    plan, _ = parse_plan((out / "plan_seed1.txt").read_text(), d)
    assert plan.actions == ("go",)
    assert main(["oracle", "--config", str(cfg)]) == 0
    assert "optimal total: 5.000000" in capsys.readouterr().out


def test_parse_seeds():
    assert parse_seeds("1-3, 7") == (1, 2, 3, 7)


def test_config_defaults_and_overrides():
    cfg = parse_config("explore_prob = 0.3  # comment\nreturn_window = none\n")
    assert cfg.explore_prob == 0.3 and cfg.return_window is None
    assert cfg.loop_config().explore_prob == 0.3
    assert load_config("taxi.cfg").max_steps == 200


@pytest.mark.parametrize("text", ["explore_prob = 2", "env = atari", "max_steps = many", "seeds = ",
                                  "env = synthetic"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_run_config_is_frozen():
    with pytest.raises(Exception):
        RunConfig().env = "x"
