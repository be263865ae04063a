"""Command-line entry point: ``ttcl generate|learn|eval|plan|inspect``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .apkm import FitConfig, task_actions
from .evaluation import ScenarioConfig, curve_csv, run_scenarios
from .fuzzy import DEFAULT_EPSILON, FuzzyConfig, fuzzy_point
from .pipeline import TaskModel, learn
from .solver import SolverConfig
from .ssttc import InfeasibleDurations, UnsupportedRelation, plan_bimanual
from .synth import PRESETS, ConfigError, GeneratorConfig, RejectionLimitExceeded, generate
from .temporal import CHANNELS, RELATIONS, Action, validate_demonstration

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GENERATION = 3
EXIT_QUERY = 4

DEFAULT_THETA = 0.5
DEFAULT_SEED = 0

log = logging.getLogger("ttcl")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _parse_pair(text: str) -> tuple[Action, Action]:
    parts = text.split(",")
    if len(parts) != 2:
        raise CliError(EXIT_INPUT, f"--pair expects 'verb:object,verb:object', got {text!r}")
    try:
        return Action.parse(parts[0]), Action.parse(parts[1])
    except ValueError as exc:
        raise CliError(EXIT_INPUT, str(exc)) from None


def _load_demos(path):
    try:
        task, demos = io.load_demos(path)
    except (OSError, io.FormatError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read demonstrations: {exc}") from None
    problems = [f"{d.id}: {v}" for d in demos for v in validate_demonstration(d)]
    if problems:
        raise CliError(EXIT_INPUT, "invalid demonstrations:\n  " + "\n  ".join(problems))
    return task, demos


def _load_model(path) -> TaskModel:
    try:
        return TaskModel.from_dict(io.read_json(path))
    except (OSError, io.FormatError, KeyError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read model: {exc}") from None


def cmd_generate(args) -> int:
    try:
        if args.preset:
            config = PRESETS[args.preset]()
        else:
            config = GeneratorConfig.from_dict(io.read_json(args.config))
        if args.seed is not None:
            config = GeneratorConfig.from_dict({**config.to_dict(), "seed": args.seed})
    except (OSError, io.FormatError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read config: {exc}") from None
    except ConfigError as exc:
        raise CliError(EXIT_INPUT, f"config error in {exc}") from None
    try:
        demos, truth = generate(config)
    except RejectionLimitExceeded as exc:
        raise CliError(EXIT_GENERATION, str(exc)) from None
    io.save_demos(args.out, demos, config.task)
    io.save_sttcs(args.truth, truth)
    log.info("wrote %d demonstrations to %s and %d constraints to %s",
             len(demos), args.out, len(truth.assignments), args.truth)
    return EXIT_OK


def cmd_learn(args) -> int:
    _, demos = _load_demos(args.demos)
    if not demos:
        raise CliError(EXIT_INPUT, "no demonstrations to learn from")
    model = learn(demos, FuzzyConfig(args.epsilon), SolverConfig(args.theta), FitConfig(seed=args.seed),
                  all_channels=args.all_channels)
    io.write_json(args.out, model.to_dict())
    log.info("learned %d STTCs over %d actions", len(model.sttcs.assignments), len(model.durations))
    return EXIT_OK


def cmd_eval(args) -> int:
    _, demos = _load_demos(args.demos)
    try:
        truth = io.load_sttcs(args.truth)
    except (OSError, io.FormatError, KeyError, ValueError) as exc:
        raise CliError(EXIT_INPUT, f"cannot read ground truth: {exc}") from None
    vocab = set(task_actions(demos))
    unknown = sorted({a for pair in truth.assignments for a in pair} - vocab)
    if unknown:
        raise CliError(EXIT_INPUT, "ground truth mentions actions absent from the demonstrations: "
                       + ", ".join(map(str, unknown)))
    per = args.per_scenario or len(demos)
    if per > len(demos) or per < 1:
        raise CliError(EXIT_INPUT, f"--per-scenario {per} must lie in 1..{len(demos)}")
    config = ScenarioConfig(n_scenarios=args.scenarios, demos_per_scenario=per, seed=args.seed,
                            fuzzy=FuzzyConfig(args.epsilon), solver=SolverConfig(args.theta),
                            fit=FitConfig(seed=args.seed, tol=args.em_tol))
    rows = run_scenarios(demos, truth, config, jobs=args.jobs)
    Path(args.out).write_text(curve_csv(rows))
    return EXIT_OK


def cmd_plan(args) -> int:
    model = _load_model(args.model)
    a1, a2 = _parse_pair(args.pair)
    found = model.constraints_for(a1, a2)
    if found is None:
        raise CliError(EXIT_QUERY, f"no constraint between {a1} and {a2} in the model")
    relation, ssttcs = found
    if args.durations:
        try:
            durations = tuple(float(x) for x in args.durations.split(","))
        except ValueError:
            durations = ()
        if len(durations) != 2:
            raise CliError(EXIT_INPUT, f"--durations expects two numbers, got {args.durations!r}")
    else:
        durations = (model.durations[a1], model.durations[a2])
    hands = (model.hands.get(a1, "left"), model.hands.get(a2, "right"))
    if hands[0] == hands[1]:
        hands = (hands[0], "right" if hands[0] == "left" else "left")
    try:
        plan = plan_bimanual(relation, ssttcs, durations, model.epsilon, hands)
    except (UnsupportedRelation, InfeasibleDurations) as exc:
        raise CliError(EXIT_QUERY, f"cannot plan {a1},{a2} ({relation.value}): {exc}") from None
    text = io.dumps(plan.to_dict())
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def format_inspection(model: TaskModel, a1: Action, a2: Action) -> str:
    profile = model.profile(a1, a2)
    if profile is None:
        raise CliError(EXIT_QUERY, f"pair {a1},{a2} is not in the model")
    lines = [f"pair {a1} , {a2}", "", f"{'relation':<15}{'membership':>12}"]
    for r in RELATIONS:
        lines.append(f"{r.value:<15}{profile[r]:>12.6f}")
    apkm = model.apkm(a1, a2)
    flipped = apkm.first != a1 or apkm.second != a2
    lines += ["", f"mixtures of {apkm.first} minus {apkm.second} (n={apkm.pair_count})"
              + (" [stored in the opposite orientation]" if flipped else ""),
              f"{'channel':<8}{'comps':>6}{'before':>12}{'equals':>12}{'after':>12}{'sum':>12}  components (w, mu, var)"]
    for name in CHANNELS:
        m = apkm.channel(name)
        p = fuzzy_point(m, model.epsilon)
        comps = "; ".join(f"{c.weight:.3f}, {c.mean:+.4f}, {c.variance:.2e}" for c in m.components)
        lines.append(f"{name:<8}{len(m):>6}{p.before:>12.6f}{p.equals:>12.6f}{p.after:>12.6f}{p.total:>12.6f}  {comps}")
    found = model.constraints_for(a1, a2)
    lines.append("")
    lines.append(f"sttc: {found[0].value}" if found else "sttc: none")
    return "\n".join(lines) + "\n"


def cmd_inspect(args) -> int:
    model = _load_model(args.model)
    a1, a2 = _parse_pair(args.pair)
    sys.stdout.write(format_inspection(model, a1, a2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttcl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a synthetic demonstration set and its ground truth")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="generator config JSON")
    src.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--out", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("learn", help="learn a temporal task model from demonstrations")
    p.add_argument("--demos", required=True)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--all-channels", action="store_true", help="also report non-necessary SSTTC channels")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", help="precision/recall learning curves over random scenarios")
    p.add_argument("--demos", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--scenarios", type=int, default=20)
    p.add_argument("--per-scenario", type=int)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--em-tol", type=float, default=ScenarioConfig.fit.tol)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plan", help="synchronise two actions from their learned constraints")
    p.add_argument("--model", required=True)
    p.add_argument("--pair", required=True, help="verb:object,verb:object")
    p.add_argument("--durations", help="mean durations of the two actions, comma separated")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("inspect", help="show memberships and mixtures of one pair")
    p.add_argument("--model", required=True)
    p.add_argument("--pair", required=True)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if getattr(args, "epsilon", 1.0) <= 0:
            raise CliError(EXIT_INPUT, "--epsilon must be positive")
        if not 0 <= getattr(args, "theta", 0.5) <= 1:
            raise CliError(EXIT_INPUT, "--theta must lie in [0, 1]")
        return args.func(args)
    except CliError as exc:
        print(f"ttcl: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
