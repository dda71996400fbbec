"""Symbolic planning over learned subtask gains, with tabular controllers
and an average-reward meta-controller."""

from .action_lang import (
    ActionDescription,
    ParseError,
    SymbolicState,
    format_action_description,
    initial_state,
    parse_action_description,
    validate,
)
from .config import RunConfig, build, load_config, parse_config
from .controller import ControllerConfig, EpsilonSchedule, QTable, SuccessTracker, execute_subtask
from .estimator import SDRLAgent
from .loop import LoopConfig, LoopState, run, run_iteration, run_seed, update_facts
from .meta_controller import MetaConfig, MetaTable, extrinsic_reward, r_update
from .planner import IntrinsicGoal, Plan, RhoTable, SymbolicTransition, find_plan, plan_quality
from .subtask import Subtask, induce_option

__all__ = [
    "ActionDescription", "ControllerConfig", "EpsilonSchedule", "IntrinsicGoal", "LoopConfig",
    "LoopState", "MetaConfig", "MetaTable", "ParseError", "Plan", "QTable", "RhoTable", "RunConfig",
    "SDRLAgent", "Subtask", "SuccessTracker", "SymbolicState", "SymbolicTransition", "build",
    "execute_subtask", "extrinsic_reward", "find_plan", "format_action_description", "induce_option",
    "initial_state", "load_config", "parse_action_description", "parse_config", "plan_quality",
    "r_update", "run", "run_iteration", "run_seed", "update_facts", "validate",
]
