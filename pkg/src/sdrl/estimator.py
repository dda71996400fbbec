"""scikit-learn style wrapper around one seeded run of the loop."""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .action_lang import SymbolicState
from .config import Experiment, RunConfig
from .loop import run_seed
from .planner import IntrinsicGoal, Plan, find_plan, plan_quality


class SDRLAgent(BaseEstimator):
    """Fit runs the planning/learning loop over an experiment's task schedule.

    ``predict`` maps symbolic start states to the best plan under the learned
    gain facts (the empty plan when no plan has positive quality).

    >>> from sdrl.config import build, load_config
    >>> exp = build(load_config("taxi.cfg"))
    >>> agent = SDRLAgent(max_steps=200).fit(exp)          # doctest: +SKIP
    >>> agent.predict([exp.initial])[0].actions            # doctest: +SKIP
    ('goto(coupon_site)', 'collect')
    """

    def __init__(self, explore_prob=0.2, max_plan_len=8, inf_default=10.0,
                 alpha_c=1.0, gamma=0.99, max_steps=50, phi=10.0,
                 epsilon_start=1.0, epsilon_end=0.05, epsilon_decay=10_000,
                 alpha=0.1, beta=0.05, psi=100.0, threshold=0.9, return_window=None,
                 random_state=0):
        self.explore_prob = explore_prob
        self.max_plan_len = max_plan_len
        self.inf_default = inf_default
        self.alpha_c = alpha_c
        self.gamma = gamma
        self.max_steps = max_steps
        self.phi = phi
        self.epsilon_start = epsilon_start
        self.epsilon_end = epsilon_end
        self.epsilon_decay = epsilon_decay
        self.alpha = alpha
        self.beta = beta
        self.psi = psi
        self.threshold = threshold
        self.return_window = return_window
        self.random_state = random_state

    @classmethod
    def from_config(cls, cfg: RunConfig) -> "SDRLAgent":
        names = cls._get_param_names()
        params = {k: getattr(cfg, k) for k in names if hasattr(cfg, k)}
        return cls(random_state=cfg.seeds[0], **params)

    def _run_config(self, base: RunConfig) -> RunConfig:
        # RunConfig validates every hyperparameter
        params = {k: v for k, v in self.get_params().items() if k != "random_state"}
        return replace(base, **params)

    def fit(self, X: Experiment, y=None) -> "SDRLAgent":
        if not isinstance(X, Experiment):
            raise TypeError(f"fit expects an Experiment (see sdrl.config.build), got {type(X).__name__}")
        cfg = self._run_config(X.config)
        result = run_seed(X.description, X.initial, X.make_tasks(), X.grounding, cfg.loop_config(),
                          cfg.controller_config(), cfg.meta_config(), int(self.random_state))
        self.description_ = X.description
        self.initial_ = X.initial
        self.plans_ = result.plans
        self.plan_ = result.state.incumbent
        self.statuses_ = result.statuses
        self.facts_ = result.state.facts
        self.meta_ = result.learners.meta
        self.q_ = result.learners.q
        self.curve_ = result.curve_csv
        return self

    def predict(self, X: Iterable[SymbolicState] | None = None) -> list[Plan]:
        check_is_fitted(self, "facts_")
        starts = [self.initial_] if X is None else list(X)
        return [find_plan(s, IntrinsicGoal(0.0), self.description_, self.facts_, self.max_plan_len) or Plan()
                for s in starts]

    def score(self, X=None, y=None) -> float:
        """Quality of the incumbent plan under the learned facts."""
        check_is_fitted(self, "facts_")
        return plan_quality(self.plan_, self.facts_)
