"""The planning and learning loop: plan, execute subtasks, score, replan."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from ._validation import check_interval, check_nonnegative_int, check_positive, check_positive_int
from .action_lang import ActionDescription, SymbolicState
from .controller import ControllerConfig, ControllerLog, QTable, SuccessTracker, execute_subtask
from .meta_controller import MetaConfig, MetaLog, MetaTable, extrinsic_reward, r_update
from .planner import (
    IntrinsicGoal,
    Plan,
    RhoTable,
    SymbolicTransition,
    find_plan,
    format_plan,
    plan_quality,
    quality_bounded,
    state_hash,
)
from .subtask import induce_option, subtask_key

CONVERGED = "converged"
CAP_LIMITED = "cap_limited"
BUDGET_EXHAUSTED = "budget_exhausted"
STATUS_TEXT = {
    CONVERGED: "converged",
    CAP_LIMITED: "quality still improving at cap",
    BUDGET_EXHAUSTED: "budget exhausted",
}
CURVE_COLUMNS = ("episode", "cumulative_env_reward", "plan_quality", "plan_length", "terminated_flag")


class MissingGain(RuntimeError):
    """A plan transition has no learned gain although it was executed."""


@dataclass(frozen=True)
class LoopConfig:
    """``close_episode`` feeds the initial state back as the successor of the
    last transition of a completed plan, making each episode one cycle of a
    continuing task for the average-reward meta-controller."""

    explore_prob: float = 0.2
    episodes: int = 2000
    max_plan_len: int = 8
    inf_default: float = 10.0
    close_episode: bool = True

    def __post_init__(self):
        check_interval("explore_prob", self.explore_prob, 0.0, 1.0)
        check_nonnegative_int("episodes", self.episodes)
        check_positive_int("max_plan_len", self.max_plan_len)
        check_positive("inf_default", self.inf_default)


@dataclass
class LoopState:
    initial: SymbolicState
    facts: RhoTable
    incumbent: Plan = field(default_factory=Plan)
    goal: IntrinsicGoal = field(default_factory=IntrinsicGoal)
    episode_index: int = 0
    exhausted: bool = False  # the last planner call found nothing better


@dataclass
class Learners:
    """Controller and meta-controller state of one run."""

    controller: ControllerConfig
    meta_cfg: MetaConfig
    q: QTable = field(default_factory=QTable)
    tracker: SuccessTracker = field(default_factory=SuccessTracker)
    meta: MetaTable = field(default_factory=MetaTable)
    controller_log: ControllerLog | None = None
    meta_log: MetaLog | None = None


@dataclass
class IterationReport:
    episode: int
    plan: Plan
    replanned: bool
    exhausted: bool
    executed: int
    completed: bool
    env_reward: float
    quality: float


def update_facts(facts: RhoTable, plan: Plan | Sequence[SymbolicTransition], meta: MetaTable) -> RhoTable:
    """Copy the learned gain of every transition in ``plan`` into ``facts``."""
    for t in plan:
        key = (t.source, subtask_key(t))
        if key not in meta.gain:
            raise MissingGain(f"no learned gain for executed transition {t}")
        facts[(t.source, t.action)] = meta.gain[key]
    return facts


def run_iteration(state: LoopState, d: ActionDescription, env, grounding: Callable,
                  learners: Learners, cfg: LoopConfig, rng: np.random.Generator,
                  ) -> tuple[LoopState, IterationReport]:
    """One episode. The env must already be reset."""
    episode = state.episode_index
    replanned = not state.incumbent or rng.random() < cfg.explore_prob
    active = state.incumbent
    if replanned:
        candidate = find_plan(state.initial, state.goal, d, state.facts, cfg.max_plan_len)
        state.exhausted = candidate is None
        if candidate is not None:
            active = candidate

    executed: list[SymbolicTransition] = []
    total = 0.0
    completed = True
    mcfg = learners.meta_cfg
    for n, t in enumerate(active):
        g = induce_option(t, grounding)
        key = g.key
        result = execute_subtask(g, env, learners.q, learners.controller, rng)
        total += result.env_reward_sum
        learners.tracker.record(key, result.success, result.env_reward_sum)
        ratio = learners.tracker.ratio(key)
        if mcfg.return_mode == "constant":
            env_return = mcfg.return_constant
        else:
            env_return = learners.tracker.mean_success_return(key, mcfg.return_window)
            env_return = -mcfg.psi if env_return is None else env_return
        r_e = extrinsic_reward(ratio, env_return, mcfg)
        last = n == len(active) - 1
        s_next = state.initial if (result.success and last and cfg.close_episode) else t.target
        r_update(learners.meta, t.source, key, r_e, s_next, mcfg)
        executed.append(t)
        if learners.controller_log:
            learners.controller_log.write(episode, key, result, ratio)
        if learners.meta_log:
            learners.meta_log.write(episode, state_hash(t.source), key, r_e,
                                    learners.meta.r(t.source, key), learners.meta.rho(t.source, key))
        if not result.success:
            completed = False
            break

    update_facts(state.facts, executed, learners.meta)
    quality = plan_quality(active, state.facts)
    state.goal = IntrinsicGoal(quality)
    state.incumbent = active
    state.episode_index += 1
    return state, IterationReport(episode, active, replanned, state.exhausted,
                                  len(executed), completed, total, quality)


def status(state: LoopState, d: ActionDescription) -> str:
    if not state.exhausted:
        return BUDGET_EXHAUSTED
    return CONVERGED if quality_bounded(state.initial, d, state.facts) else CAP_LIMITED


@dataclass
class Task:
    env: Any
    episodes: int
    name: str = ""


@dataclass
class SeedResult:
    seed: int
    plans: list[Plan]  # incumbent at the end of each task
    statuses: list[str]
    curve_csv: str
    controller_csv: str
    meta_csv: str
    state: LoopState
    learners: Learners


def run_seed(d: ActionDescription, initial: SymbolicState, tasks: Sequence[Task], grounding: Callable,
             cfg: LoopConfig, controller: ControllerConfig, meta_cfg: MetaConfig, seed: int,
             learners: Learners | None = None, state: LoopState | None = None,
             logs: bool = True) -> SeedResult:
    """Run the loop over a task schedule with one seeded random source.

    The loop continues after the planner finds nothing better: the incumbent
    keeps being executed (and learned from) until the episode budget is spent.
    """
    rng = np.random.default_rng(seed)
    curve, cbuf, mbuf = io.StringIO(), io.StringIO(), io.StringIO()
    writer = csv.writer(curve, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    if learners is None:
        learners = Learners(controller, meta_cfg, meta=MetaTable(gain_default=cfg.inf_default))
    if logs:
        learners.controller_log = ControllerLog(cbuf)
        learners.meta_log = MetaLog(mbuf)
    if state is None:
        state = LoopState(initial, RhoTable(cfg.inf_default))
    plans, statuses = [], []
    for task in tasks:
        for _ in range(task.episodes):
            task.env.reset()
            try:
                state, rep = run_iteration(state, d, task.env, grounding, learners, cfg, rng)
            except Exception as exc:
                raise RuntimeError(f"seed {seed}, episode {state.episode_index}: {exc}") from exc
            writer.writerow([rep.episode, f"{rep.env_reward:.6f}", f"{rep.quality:.6f}",
                             len(rep.plan), int(rep.exhausted)])
        plans.append(state.incumbent)
        statuses.append(status(state, d))
    learners.controller_log = learners.meta_log = None
    return SeedResult(seed, plans, statuses, curve.getvalue(), cbuf.getvalue(), mbuf.getvalue(),
                      state, learners)


@dataclass
class RunReport:
    seeds: list[int]
    results: list[SeedResult]
    files: list[Path] = field(default_factory=list)

    @property
    def final_plans(self) -> dict[int, Plan]:
        return {r.seed: r.plans[-1] if r.plans else Plan() for r in self.results}


def run(d: ActionDescription, initial: SymbolicState, make_tasks: Callable[[], Sequence[Task]],
        grounding: Callable | None, cfg: LoopConfig, controller: ControllerConfig, meta_cfg: MetaConfig,
        seeds: Sequence[int], out_dir: str | Path | None = None,
        grounding_of: Callable[[Sequence[Task]], Callable] | None = None) -> RunReport:
    """Run every seed on a fresh task schedule; optionally write per-seed files."""
    results = []
    files: list[Path] = []
    for seed in seeds:
        tasks = make_tasks()
        ground = grounding if grounding is not None else grounding_of(tasks)
        res = run_seed(d, initial, tasks, ground, cfg, controller, meta_cfg, seed)
        results.append(res)
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            for name, text in (
                (f"curve_seed{seed}.csv", res.curve_csv),
                (f"controller_seed{seed}.csv", res.controller_csv),
                (f"meta_seed{seed}.csv", res.meta_csv),
                (f"plan_seed{seed}.txt", format_plan(res.plans[-1] if res.plans else Plan(),
                                                     res.state.facts)),
            ):
                path = out / name
                path.write_text(text)
                files.append(path)
    return RunReport(list(seeds), results, files)
