"""Extrinsic rewards and the average-reward (R-learning) meta-controller."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from ._validation import check_interval, check_positive

BOOTSTRAPS = ("next", "current")
RETURN_MODES = ("env_return", "constant")


@dataclass(frozen=True)
class MetaConfig:
    """Meta-controller hyperparameters.

    ``bootstrap`` chooses the state whose best R value enters the R target:
    ``"next"`` (the successor, standard R-learning) or ``"current"``.
    ``return_mode`` chooses r(s, g) for competent subtasks: the mean env
    return of recent successes, or the fixed ``return_constant``.
    """

    alpha: float = 0.1
    beta: float = 0.05
    psi: float = 100.0
    threshold: float = 0.9
    bootstrap: str = "next"
    return_mode: str = "env_return"
    return_constant: float = -10.0
    return_window: int | None = None

    def __post_init__(self):
        check_interval("alpha", self.alpha, 0.0, 1.0)
        check_interval("beta", self.beta, 0.0, 1.0)
        check_positive("psi", self.psi)
        check_interval("threshold", self.threshold, 0.0, 1.0, closed_left=False)
        if self.bootstrap not in BOOTSTRAPS:
            raise ValueError(f"bootstrap must be one of {BOOTSTRAPS}, got {self.bootstrap!r}")
        if self.return_mode not in RETURN_MODES:
            raise ValueError(f"return_mode must be one of {RETURN_MODES}, got {self.return_mode!r}")


@dataclass
class MetaTable:
    """R(s, g) values (default 0) and gain estimates rho^g(s).

    Gains exist only for pairs that have been updated; before its first update
    a pair reads ``gain_default``.
    """

    gain_default: float = 0.0
    r_values: dict[Hashable, dict[Hashable, float]] = field(default_factory=dict)
    gain: dict[tuple[Hashable, Hashable], float] = field(default_factory=dict)
    increments: list[tuple[float, float]] = field(default_factory=list)

    def r(self, s: Hashable, g: Hashable) -> float:
        return self.r_values.get(s, {}).get(g, 0.0)

    def max_r(self, s: Hashable) -> float:
        """Best R over the subtasks recorded for ``s``; 0 if there are none."""
        row = self.r_values.get(s)
        return max(row.values()) if row else 0.0

    def rho(self, s: Hashable, g: Hashable) -> float:
        return self.gain.get((s, g), self.gain_default)

    def copy(self) -> "MetaTable":
        return MetaTable(
            self.gain_default,
            {s: dict(row) for s, row in self.r_values.items()},
            dict(self.gain),
            list(self.increments),
        )


def extrinsic_reward(ratio: float, env_return: float, cfg: MetaConfig) -> float:
    check_interval("ratio", ratio, 0.0, 1.0)
    return -cfg.psi if ratio < cfg.threshold else env_return


def r_update(m: MetaTable, s: Hashable, g: Hashable, r_e: float, s_next: Hashable,
             cfg: MetaConfig, alpha: float | None = None, beta: float | None = None) -> MetaTable:
    """One R-learning step for the pair (s, g); R first, then rho on the new R.

    ``alpha``/``beta`` override the configured rates (for decaying schedules).
    The absolute increments are appended to ``m.increments``.
    """
    alpha = cfg.alpha if alpha is None else alpha
    beta = cfg.beta if beta is None else beta
    old_r = m.r(s, g)
    old_rho = m.rho(s, g)
    anchor = s_next if cfg.bootstrap == "next" else s
    new_r = old_r
    if alpha:
        new_r = (1 - alpha) * old_r + alpha * (r_e - old_rho + m.max_r(anchor))
        m.r_values.setdefault(s, {})[g] = new_r
    new_rho = old_rho
    if beta:
        new_rho = (1 - beta) * old_rho + beta * (r_e + m.max_r(s_next) - m.max_r(s))
    m.gain[(s, g)] = new_rho  # recorded even at beta = 0: the pair now has a gain
    m.increments.append((abs(new_r - old_r), abs(new_rho - old_rho)))
    return m


def converged(m: MetaTable | None, history: Sequence[tuple[float, ...] | float] | None = None,
              tol: float = 1e-6, sweep: int | None = None) -> bool:
    """True iff every increment in the last ``sweep`` updates is below ``tol``."""
    check_positive("tol", tol)
    if history is None:
        history = m.increments if m is not None else ()
    recent = history[-sweep:] if sweep else history
    for inc in recent:
        values = inc if isinstance(inc, Iterable) else (inc,)
        if any(abs(v) >= tol for v in values):
            return False
    return True


def fixed_point(r_e: Mapping[tuple[Hashable, Hashable, Hashable], float],
                h: Callable[[Hashable], float] | None = None,
                gain_default: float = 0.0) -> MetaTable:
    """Meta values at rest for a deterministic table ``(s, g, s') -> r_e``.

    With any potential ``h``, R(s, g) = h(s) and rho^g(s) = r_e + h(s') - h(s)
    make every increment of :func:`r_update` vanish (next-state bootstrap).
    """
    h = h or (lambda s: 0.0)
    m = MetaTable(gain_default)
    for (s, g, s_next), r in r_e.items():
        m.r_values.setdefault(s, {})[g] = h(s)
        m.gain[(s, g)] = r + h(s_next) - h(s)
    return m


META_LOG_COLUMNS = ("episode", "symbolic_state_hash", "subtask_key", "extrinsic_reward", "R", "rho_gain")


class MetaLog:
    def __init__(self, fh):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(META_LOG_COLUMNS)

    def write(self, episode: int, state_hash: str, key: str, r_e: float, r: float, rho: float) -> None:
        self._w.writerow([episode, state_hash, key, f"{r_e:.6f}", f"{r:.6f}", f"{rho:.6f}"])
