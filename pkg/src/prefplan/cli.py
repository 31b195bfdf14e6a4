"""Command-line interface: ``prefplan validate|solve|rank|simulate|scenario``.

Exit codes: 0 on success, 1 when the model or result is unacceptable,
2 for usage errors and unreadable input files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

from . import io as pio
from .improvement import ImprovementMdp, build_improvement_mdp, encode
from .mdp import Mdp, validate_mdp
from .preferences import PreferenceModel
from .scenarios import ConfigError, GridworldConfig, build_gridworld, build_toy_example
from .simulate import improvement_statistics
from .synthesis import (
    CounterStrategy,
    LevelSets,
    Mode,
    UnboundedRankError,
    level_sets,
    rank_histogram,
    rank_of,
)

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
SEED_ENV = "PREFPLAN_SEED"


class UsageError(Exception):
    pass


class DomainError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("mdp", help="MDP JSON file")
    p.add_argument("objectives", help="objectives JSON file")
    p.add_argument("preferences", help="preferences JSON file")
    p.add_argument("--safety", choices=("action", "transition"), default="action",
                   help="drop whole actions (default) or only weakening branches")


def _add_mode(p: argparse.ArgumentParser, choices: Sequence[str] = ("sasi", "spi")) -> None:
    p.add_argument("--mode", choices=choices, default="sasi", help="almost-sure (sasi) or positive (spi)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prefplan", description="Preference-based planning on MDPs with reachability objectives."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an MDP file")
    p.add_argument("mdp")

    p = sub.add_parser("solve", help="synthesize an improvement strategy")
    _add_model_args(p)
    _add_mode(p)
    p.add_argument("--out", required=True, help="strategy JSON to write")
    p.add_argument("--product-out", help="also write the improvement MDP")

    p = sub.add_parser("rank", help="compute improvement ranks")
    _add_model_args(p)
    _add_mode(p, ("sasi", "spi", "both"))
    p.add_argument("--out", required=True, help="rank CSV to write")

    p = sub.add_parser("simulate", help="sample plays under the composed strategy")
    _add_model_args(p)
    _add_mode(p)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--horizon", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=None, help=f"defaults to ${SEED_ENV} or 0")
    p.add_argument("--start", type=int, default=None, help="base state index (default: initial)")
    p.add_argument("--out", required=True, help="output prefix; writes PREFIX.csv and PREFIX.json")

    p = sub.add_parser("scenario", help="write model files for a built-in scenario")
    p.add_argument("name", choices=("toy", "gridworld"))
    p.add_argument("--config", help="gridworld config JSON (default: shipped config)")
    p.add_argument("--out-dir", default=".", help="directory for mdp.json, objectives.json, preferences.json")
    return parser


def _load_model(args: argparse.Namespace) -> tuple[Mdp, list, PreferenceModel]:
    try:
        mdp = pio.load_mdp(args.mdp)
        objectives = pio.load_objectives(args.objectives, mdp.num_states)
        prefs = pio.load_preferences(args.preferences)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    problems = validate_mdp(mdp)
    if problems:
        raise DomainError("invalid model:\n" + "\n".join(f"  {v}" for v in problems))
    if len(objectives) != prefs.n:
        raise UsageError(f"{len(objectives)} objectives but preferences name {prefs.n}")
    if [o.name for o in objectives] != list(prefs.names):
        raise UsageError("objective names differ from the preference file's objective list")
    return mdp, objectives, prefs


def _product(args: argparse.Namespace) -> ImprovementMdp:
    mdp, objectives, prefs = _load_model(args)
    return build_improvement_mdp(mdp, objectives, prefs, safety=args.safety)


def _histogram_lines(levels: LevelSets, label: str) -> list[str]:
    lines = [f"{label}: max rank {levels.max_rank}"]
    for k, count in rank_histogram(levels).items():
        lines.append(f"  rank >= {k}: {count}")
    if not levels.bounded:
        lines.append(f"  WARNING: {label} rank unbounded; fixpoint guard tripped")
    return lines


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        mdp = pio.load_mdp(args.mdp)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    problems = validate_mdp(mdp)
    if problems:
        print(f"invalid: {len(problems)} violation(s)")
        for v in problems:
            print(f"  {v}")
        return EXIT_DOMAIN
    print(f"valid: {mdp.num_states} states, {mdp.num_actions} actions, {mdp.num_transitions} transitions")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    imdp = _product(args)
    levels = level_sets(imdp, Mode.parse(args.mode))
    try:
        strategy = CounterStrategy(imdp, levels)
    except UnboundedRankError as exc:
        raise DomainError(str(exc)) from exc
    Path(args.out).write_text(pio.dumps_strategy(strategy, imdp.initial), encoding="utf-8")
    if args.product_out:
        Path(args.product_out).write_text(pio.dumps_product(imdp), encoding="utf-8")
    region = levels.level(1)
    winning = imdp.initial in region
    print(f"mode {args.mode}: region {len(region)} of {imdp.num_states} product states")
    print(f"initial state {'winning' if winning else 'not winning'}; rank {rank_of(levels, imdp.initial)}")
    if winning:
        start = strategy.allowed(imdp.initial, strategy.initial_counter(imdp.initial))
        print("actions at initial state: " + ", ".join(imdp.product.actions[a] for a in sorted(start)))
    return EXIT_OK if winning else EXIT_DOMAIN


def cmd_rank(args: argparse.Namespace) -> int:
    imdp = _product(args)
    if args.mode == "both":
        sasi = level_sets(imdp, Mode.ALMOST_SURE)
        spi = level_sets(imdp, Mode.POSITIVE)
        Path(args.out).write_text(pio.dumps_rank_pair_csv(sasi, spi), encoding="utf-8")
        lines = _histogram_lines(sasi, "sasi") + _histogram_lines(spi, "spi")
    else:
        levels = level_sets(imdp, Mode.parse(args.mode))
        Path(args.out).write_text(pio.dumps_rank_csv(levels), encoding="utf-8")
        lines = _histogram_lines(levels, args.mode)
    print("\n".join(lines))
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be at least 1")
    seed = args.seed if args.seed is not None else _default_seed()
    imdp = _product(args)
    if args.start is not None and not 0 <= args.start < imdp.base.num_states:
        raise UsageError(f"--start {args.start} is not a state of the model")
    start = imdp.initial if args.start is None else encode(args.start, 0)
    levels = level_sets(imdp, Mode.parse(args.mode))
    try:
        strategy = CounterStrategy(imdp, levels)
    except UnboundedRankError as exc:
        raise DomainError(str(exc)) from exc
    summary = improvement_statistics(imdp, strategy, args.runs, args.horizon, seed, start=start)
    rank = strategy.initial_counter(start)
    Path(f"{args.out}.csv").write_text(summary.to_csv(), encoding="utf-8")
    Path(f"{args.out}.json").write_text(
        summary.to_json(mode=args.mode, rank=rank, start_state=pio.product_state_name(start)),
        encoding="utf-8",
    )
    print(f"{args.runs} runs, horizon {args.horizon}, seed {seed}, start rank {rank}")
    for k in range(1, len(summary.fractions)):
        print(f"  >= {k} improvements: {summary.fraction_at_least(k):.4f}")
    if summary.truncated:
        print(f"  {summary.truncated} run(s) stopped at a dead state")
    return EXIT_OK


def cmd_scenario(args: argparse.Namespace) -> int:
    if args.name == "toy":
        if args.config:
            raise UsageError("--config only applies to the gridworld scenario")
        mdp, objectives, prefs = build_toy_example()
    else:
        try:
            config = GridworldConfig.load(args.config) if args.config else GridworldConfig.shipped_default()
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        except (ValueError, TypeError) as exc:
            raise UsageError(f"bad config: {exc}") from exc
        try:
            mdp, objectives, prefs, _ = build_gridworld(config)
        except ConfigError as exc:
            raise DomainError("invalid config:\n" + "\n".join(f"  {p}" for p in exc.problems)) from exc
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pio.write_mdp(mdp, out / "mdp.json")
    pio.write_objectives(objectives, out / "objectives.json")
    pio.write_preferences(prefs, out / "preferences.json")
    print(f"{args.name}: {mdp.num_states} states, {mdp.num_transitions} transitions -> {out}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "solve": cmd_solve,
    "rank": cmd_rank,
    "simulate": cmd_simulate,
    "scenario": cmd_scenario,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, pio.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
