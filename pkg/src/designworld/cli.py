"""Command-line entry point: ``designworld simulate | experiment | report``.

Exit codes: 0 ok, 1 usage error, 2 runtime error, 3 flagged dialogue.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from .agent import INIT_ORDERS
from .awm import AWM_RANGES, PROBE_MODES
from .discourse import DEFAULT_ACT_CAP, check_conformance
from .evaluation import CostConfig, CostError
from .experiment import (
    RANGE_ORDER,
    ExperimentConfig,
    ExperimentError,
    parse_assignment,
    read_summary,
    run_experiment,
    simulate,
    write_outputs,
)
from .strategies import StrategyError, StrategyKind
from .tasks import ScenarioError, TaskKind, load_scenario
from .textformat import format_transcript

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_FLAGGED = 0, 1, 2, 3

CONFIG_KEYS = {
    "task", "strategy_a", "strategy_b", "awm_low", "awm_mid", "awm_high", "commcost", "infcost",
    "retcost", "runs", "seed", "scenario", "znmb_whole_plan", "act_cap", "probe_mode", "init_order",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _choices(enum_cls) -> list[str]:
    return [k.value for k in enum_cls]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="designworld", description="Simulate collaborative planning dialogues.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run one dialogue and print its transcript")
    s.add_argument("--task", default="standard", choices=_choices(TaskKind))
    s.add_argument("--strategy-a", default="all-implicit", choices=_choices(StrategyKind))
    s.add_argument("--strategy-b", default="all-implicit", choices=_choices(StrategyKind))
    s.add_argument("--radius", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--gloss", action="store_true", help="precede each act with an English gloss")
    s.add_argument("--scenario", help="scenario JSON file (default: bundled scenario)")
    s.add_argument("--act-cap", type=int, default=DEFAULT_ACT_CAP)
    s.add_argument("--probe-mode", default="ball", choices=PROBE_MODES)
    s.add_argument("--init-order", default="shuffled", choices=INIT_ORDERS)

    e = sub.add_parser("experiment", help="run a strategy comparison from a JSON config")
    e.add_argument("config", help="JSON config file")
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--jobs", type=int, default=1)

    r = sub.add_parser("report", help="summarise experiment outputs in a directory")
    r.add_argument("results_dir")
    return p


# -- config -------------------------------------------------------------------


def _radii(value, key: str) -> tuple[int, ...]:
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise UsageError(f"{key} must be a non-empty list of integer radii")
    return tuple(value)


def _number(value, key: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise UsageError(f"{key} must be a number")
    try:
        return Fraction(str(value))
    except ValueError as exc:
        raise UsageError(f"{key} must be a number, got {value!r}") from exc


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    for key in ("task", "strategy_a", "strategy_b"):
        if key not in data:
            raise UsageError(f"config is missing required key {key!r}")
    try:
        task = TaskKind(data["task"])
    except ValueError as exc:
        raise UsageError(f"unknown task {data['task']!r}; expected one of {', '.join(_choices(TaskKind))}") from exc
    ranges = {rng: _radii(data.get(f"awm_{rng}", list(AWM_RANGES[rng])), f"awm_{rng}") for rng in RANGE_ORDER}
    try:
        costs = CostConfig(
            commcost=_number(data.get("commcost", 1), "commcost"),
            infcost=_number(data.get("infcost", 1), "infcost"),
            retcost=_number(data.get("retcost", Fraction(1, 100)), "retcost"),
        )
    except CostError as exc:
        raise UsageError(str(exc)) from exc
    for key in ("runs", "seed", "act_cap"):
        if key in data and (isinstance(data[key], bool) or not isinstance(data[key], int)):
            raise UsageError(f"{key} must be an integer")
    if "znmb_whole_plan" in data and not isinstance(data["znmb_whole_plan"], bool):
        raise UsageError("znmb_whole_plan must be true or false")
    scenario_path = data.get("scenario")
    if scenario_path is not None:
        scenario_path = Path(scenario_path)
        if base_dir is not None and not scenario_path.is_absolute():
            scenario_path = base_dir / scenario_path
    try:
        scenario = load_scenario(scenario_path)
        return ExperimentConfig(
            task=task,
            strategy_1=parse_assignment(data["strategy_a"]),
            strategy_2=parse_assignment(data["strategy_b"]),
            ranges=ranges,
            runs=data.get("runs", 200),
            costs=costs,
            seed=data.get("seed", 0),
            scenario=scenario,
            znmb_whole_plan=data.get("znmb_whole_plan", False),
            act_cap=data.get("act_cap", DEFAULT_ACT_CAP),
            probe_mode=data.get("probe_mode", "ball"),
            init_order=data.get("init_order", "shuffled"),
        )
    except (ExperimentError, StrategyError) as exc:
        raise UsageError(str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: invalid JSON ({exc})") from exc
    return config_from_dict(data, p.parent)


# -- commands -----------------------------------------------------------------


def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    scenario = load_scenario(args.scenario)
    pair = (StrategyKind(args.strategy_a), StrategyKind(args.strategy_b))
    try:
        result = simulate(
            scenario, TaskKind(args.task), pair, args.radius, args.seed, args.act_cap,
            probe_mode=args.probe_mode, init_order=args.init_order,
        )
    except StrategyError as exc:
        raise UsageError(str(exc)) from exc
    out.write(format_transcript(result.transcript, gloss=args.gloss))
    if result.flagged:
        print(f"dialogue flagged: {result.reason}", file=sys.stderr)
        return EXIT_FLAGGED
    problems = check_conformance(result.transcript)
    if problems:
        for problem in problems:
            print(f"nonconforming: {problem}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_experiment(args, out=None) -> int:
    out = out or sys.stdout
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    config = load_config(args.config)
    result = run_experiment(config, jobs=args.jobs)
    try:
        results_path, summary_path = write_outputs(result, args.out)
    except OSError as exc:
        raise RuntimeError(f"cannot write to {args.out}: {exc.strerror or exc}") from exc
    out.write(f"wrote {results_path}\nwrote {summary_path}\n")
    for c in result.contrasts:
        out.write(f"{c.describe()}\n")
    if result.flagged:
        print(f"{len(result.flagged)} dialogue(s) flagged", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_report(args, out=None) -> int:
    out = out or sys.stdout
    root = Path(args.results_dir)
    if not root.is_dir():
        raise RuntimeError(f"not a directory: {root}")
    summaries = sorted(root.glob("*.summary.csv"))
    if not summaries:
        raise RuntimeError(f"no experiment summaries in {root}")
    for path in summaries:
        summary = read_summary(path)
        stem = path.name.removesuffix(".summary.csv")
        table = root / f"{stem}.difference.csv"
        with table.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            fh.write(f"# config-hash: {summary.config_hash}\n# scenario-hash: {summary.scenario_hash}\n")
            w.writerow(("awm-range", "difference", "difference-float", "F", "classification", "p"))
            for c in summary.contrasts:
                w.writerow((c.awm_range, c.difference, f"{float(c.difference):.4f}", c.f,
                            c.classification, c.p_threshold or "ns"))
        cfg = summary.config
        out.write(f"{cfg['task']}: {cfg['strategy_1']} vs {cfg['strategy_2']} [{summary.config_hash}]\n")
        for c in summary.contrasts:
            out.write(f"  {c.describe()}\n")
    return EXIT_OK


_COMMANDS = {"simulate": cmd_simulate, "experiment": cmd_experiment, "report": cmd_report}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"designworld: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, ExperimentError, RuntimeError, OSError) as exc:
        print(f"designworld: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
