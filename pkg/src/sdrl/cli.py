"""``sdrl`` command line: run, plan, validate, oracle."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .action_lang import initial_state, parse_action_description, validate
from .config import ConfigError, parse_seeds, build, load_config, resolve_path
from .loop import STATUS_TEXT, run
from .planner import IntrinsicGoal, Plan, RhoTable, find_plan, format_plan, reachable_transitions
from .subtask import format_subtask_table, subtask_key


class UsageError(Exception):
    pass


def _assignment(text: str | None) -> dict[str, str]:
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise UsageError(f"--from expects fluent=value pairs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _read_description(name: str):
    return parse_action_description(resolve_path(name).read_text())


def cmd_validate(args) -> int:
    d = _read_description(args.description)
    problems = validate(d)
    for p in problems:
        print(p)
    if problems:
        return 1
    print(f"{args.description}: ok ({len(d.fluents)} fluents, {len(d.actions)} actions, {len(d.laws)} laws)")
    return 0


def cmd_plan(args) -> int:
    d = _read_description(args.description)
    i = initial_state(d, _assignment(args.from_))
    rho = RhoTable(args.inf_default)
    p = find_plan(i, IntrinsicGoal(args.goal), d, rho, args.max_len)
    if p is None:
        print(f"no plan of at most {args.max_len} steps has quality above {args.goal}")
        return 1
    sys.stdout.write(format_plan(p, rho))
    return 0


def _fixture_report(exp, max_len: int) -> str:
    from .envs.montezuma import table3_rho, table3_transitions

    d = exp.description
    rho = table3_rho(d, psi=exp.config.psi, default_inf=exp.config.inf_default)
    p = find_plan(exp.initial, IntrinsicGoal(0.0), d, rho, max_len) or Plan()
    numbers = table3_transitions(d)
    on_plan = set(p)
    table = format_subtask_table(sorted(numbers, key=lambda t: (numbers[t], t)),
                                 learned=lambda t: rho[(t.source, t.action)] > -exp.config.psi,
                                 in_plan=lambda t: t in on_plan)
    return format_plan(p, rho) + "\n" + table


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seeds:
        cfg = replace(cfg, seeds=parse_seeds(args.seeds))
    exp = build(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.env == "montezuma_fixture":
        text = _fixture_report(exp, cfg.max_plan_len)
        (out / "plan_fixture.txt").write_text(text)
        sys.stdout.write(text)
        return 0
    report = run(exp.description, exp.initial, exp.make_tasks, exp.grounding, cfg.loop_config(),
                 cfg.controller_config(), cfg.meta_config(), cfg.seeds, out)
    lines = []
    for res in report.results:
        final = res.plans[-1] if res.plans else Plan()
        learned = res.learners.tracker
        executed = {t for p in res.plans for t in p}
        transitions = sorted(executed | set(reachable_transitions(exp.initial, exp.description)))
        threshold = cfg.threshold

        def is_learned(t, tr=learned):
            key = subtask_key(t)
            return key in tr and tr.ratio(key) >= threshold

        table = format_subtask_table(transitions, is_learned, lambda t, f=set(final): t in f)
        (out / f"subtasks_seed{res.seed}.tsv").write_text(table)
        status = STATUS_TEXT[res.statuses[-1]] if res.statuses else "budget exhausted"
        lines.append(f"seed {res.seed}\t{status}\t{final}")
    summary = "\n".join(lines) + "\n"
    (out / "report.txt").write_text(summary)
    sys.stdout.write(summary)
    return 0


def cmd_oracle(args) -> int:
    from . import oracle

    cfg = load_config(args.config)
    exp = build(cfg)
    d, i = exp.description, exp.initial
    max_len = args.max_len or cfg.max_plan_len
    if cfg.env == "taxi":
        sched = exp.extras["schedule"]
        env = exp.make_tasks()[args.task - 1].env if 1 <= args.task <= sched.num_tasks else None
        if env is None:
            raise UsageError(f"--task must be in 1..{sched.num_tasks}")
        r_e = oracle.taxi_r_e(d, i, env)
    elif cfg.env == "synthetic":
        from .envs.synthetic import r_e_table
        r_e = r_e_table(d, exp.extras["spec"])
    else:
        from .envs.montezuma import table3_rho
        rho = table3_rho(d, psi=cfg.psi, default_inf=cfg.inf_default)
        r_e = {(t.source, t.action): rho[(t.source, t.action)] for t in reachable_transitions(i, d)}
    ps = oracle.enumerate_plans(i, d, max_len)
    best, total = oracle.brute_force_optimal(ps, r_e)
    print(f"plans up to length {max_len}: {len(ps)}")
    print(f"positive loop: {'yes' if oracle.detect_positive_loop(d, r_e, i) else 'no'}")
    print(f"optimal plan: {best}")
    print(f"optimal total: {total:.6f}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdrl", description="Symbolic planning with hierarchical RL.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="sdrl_out", help="output directory (default: sdrl_out)")
    p.add_argument("--seeds", help="override the seed list, e.g. 1-3 or 1,4")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plan", help="one-shot plan search on a description")
    p.add_argument("description")
    p.add_argument("--from", dest="from_", help="initial fluent values, e.g. loc=mp")
    p.add_argument("--max-len", type=int, default=8)
    p.add_argument("--goal", type=float, default=0.0, help="quality must exceed this (default 0)")
    p.add_argument("--inf-default", type=float, default=10.0)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check an action description")
    p.add_argument("description")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="brute-force optimal plan report")
    p.add_argument("--config", required=True)
    p.add_argument("--task", type=int, default=1, help="Taxi task number (default 1)")
    p.add_argument("--max-len", type=int)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "max_len", None) is not None and args.max_len < 1:
            raise UsageError("--max-len must be >= 1")
        return args.func(args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"sdrl {args.command}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure, including ParseError
        print(f"sdrl {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
