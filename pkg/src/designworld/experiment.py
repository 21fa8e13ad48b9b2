"""Batch runs over the strategy x AWM-range design and their statistical analysis.

Each comparison is a 2 x 3 grid: two strategy assignments crossed with the
low, mid and high AWM ranges.  Cells are analysed with a two-way ANOVA and
the strategies are compared within each range by planned contrasts judged
against modified Bonferroni critical values.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

from .agent import INIT_ORDERS, init_agent
from .awm import AWM_RANGES, PROBE_MODES, AwmConfig
from .discourse import DEFAULT_ACT_CAP, DialogueResult, ModelParams, run_dialogue
from .evaluation import CostConfig, EffortCounters, collaborative_effort, performance
from .strategies import StrategyKind, validate_pair
from .tasks import PlanRecord, Scenario, TaskKind, load_scenario, quality_of_solution

AGENT_NAMES = ("agent-bill", "agent-kim")
RANGE_ORDER = ("low", "mid", "high")

# critical F values for the modified Bonferroni test, strongest first
MB_THRESHOLDS = (
    (Fraction("9.61"), ".002"),
    (Fraction("6.66"), ".01"),
    (Fraction("5.06"), ".025"),
    (Fraction("3.88"), ".05"),
)


class ExperimentError(ValueError):
    pass


Assignment = tuple[StrategyKind, StrategyKind]

# what a single strategy name means as a two-agent assignment; close-consequence
# is only ever given to one agent, the responder
_DEFAULT_PAIRS = {
    StrategyKind.ALL_IMPLICIT: (StrategyKind.ALL_IMPLICIT, StrategyKind.ALL_IMPLICIT),
    StrategyKind.EXPLICIT_WARRANT: (StrategyKind.EXPLICIT_WARRANT, StrategyKind.EXPLICIT_WARRANT),
    StrategyKind.MPIE: (StrategyKind.MPIE, StrategyKind.MPIE),
    StrategyKind.CLOSE_CONSEQUENCE: (StrategyKind.ALL_IMPLICIT, StrategyKind.CLOSE_CONSEQUENCE),
}


def parse_assignment(text: str | Sequence[str]) -> Assignment:
    """``"explicit-warrant"`` or ``"all-implicit+close-consequence"`` (agent A first)."""
    try:
        if isinstance(text, str):
            parts = text.split("+")
            if len(parts) == 1:
                return _DEFAULT_PAIRS[StrategyKind(parts[0].strip())]
        else:
            parts = list(text)
        if len(parts) != 2:
            raise ExperimentError(f"a strategy assignment names one or two strategies, got {text!r}")
        return StrategyKind(parts[0].strip()), StrategyKind(parts[1].strip())
    except ValueError as exc:
        if isinstance(exc, ExperimentError):
            raise
        names = ", ".join(k.value for k in StrategyKind)
        raise ExperimentError(f"unknown strategy in {text!r}; expected one of {names}") from exc


def assignment_label(pair: Assignment) -> str:
    return f"{pair[0].value}+{pair[1].value}"


@dataclass(frozen=True)
class ExperimentConfig:
    task: TaskKind
    strategy_1: Assignment
    strategy_2: Assignment
    ranges: dict[str, tuple[int, ...]] = field(default_factory=lambda: dict(AWM_RANGES))
    runs: int = 200
    costs: CostConfig = field(default_factory=CostConfig)
    seed: int = 0
    scenario: Scenario = field(default_factory=load_scenario)
    znmb_whole_plan: bool = False
    act_cap: int = DEFAULT_ACT_CAP
    probe_mode: str = "ball"
    init_order: str = "shuffled"

    def __post_init__(self) -> None:
        if self.init_order not in INIT_ORDERS:
            raise ExperimentError(f"init_order must be one of {', '.join(INIT_ORDERS)}")
        object.__setattr__(self, "task", TaskKind(self.task))
        if self.probe_mode not in PROBE_MODES:
            raise ExperimentError(f"probe_mode must be one of {', '.join(PROBE_MODES)}")
        for name in ("strategy_1", "strategy_2"):
            pair = parse_assignment(getattr(self, name))
            validate_pair(*pair, matched_pair_task=self.task.matched_pair_variant is not None)
            object.__setattr__(self, name, pair)
        if self.runs < 2:
            raise ExperimentError(f"runs per cell must be >= 2, got {self.runs}")
        if set(self.ranges) != set(RANGE_ORDER):
            raise ExperimentError(f"awm ranges must be exactly {', '.join(RANGE_ORDER)}")
        for name, radii in self.ranges.items():
            if not radii or any(int(r) < 0 for r in radii):
                raise ExperimentError(f"awm range {name} needs at least one non-negative radius")
        if self.act_cap < 1:
            raise ExperimentError("act_cap must be positive")

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "strategy_1": assignment_label(self.strategy_1),
            "strategy_2": assignment_label(self.strategy_2),
            "ranges": {k: list(self.ranges[k]) for k in RANGE_ORDER},
            "runs": self.runs,
            "costs": self.costs.as_dict(),
            "seed": self.seed,
            "scenario": self.scenario.digest(),
            "znmb_whole_plan": self.znmb_whole_plan,
            "act_cap": self.act_cap,
            "probe_mode": self.probe_mode,
            "init_order": self.init_order,
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    seed: int
    task: TaskKind
    pair: Assignment
    awm_range: str
    radius: int
    quality: int
    counters: EffortCounters
    effort: Fraction
    performance: Fraction
    flagged: bool
    reason: str = ""


# -- single dialogues ---------------------------------------------------------


def simulate(
    scenario: Scenario,
    task: TaskKind,
    pair: Assignment,
    radius: int,
    seed: int,
    act_cap: int = DEFAULT_ACT_CAP,
    names: tuple[str, str] = AGENT_NAMES,
    probe_mode: str = "ball",
    init_order: str = "shuffled",
) -> DialogueResult:
    """Run one dialogue; each agent's memory walk is seeded from ``seed`` and its name."""
    task = TaskKind(task)
    validate_pair(*pair, matched_pair_task=task.matched_pair_variant is not None)
    agents = [
        init_agent(
            name, items, scenario.all_items, strategy,
            AwmConfig(radius=radius, seed=f"{seed}/{name}", probe_mode=probe_mode),
            init_order,
        )
        for name, items, strategy in zip(names, (scenario.items_a, scenario.items_b), pair)
    ]
    a, b = agents
    return run_dialogue(a, b, task, ModelParams(act_cap=act_cap))


def _behavior_task(task: TaskKind) -> TaskKind:
    """Tasks that only differ in scoring share dialogues."""
    return task if task.matched_pair_variant else TaskKind.STANDARD


@lru_cache(maxsize=None)
def _outcome(
    scenario: Scenario, task: TaskKind, pair: Assignment, radius: int, seed: int, act_cap: int, probe_mode: str,
    init_order: str,
) -> tuple[PlanRecord, EffortCounters, bool, str]:
    res = simulate(scenario, task, pair, radius, seed, act_cap, probe_mode=probe_mode, init_order=init_order)
    return res.plan, res.counters, res.flagged, res.reason


def run_one(config: ExperimentConfig, pair: Assignment, awm_range: str, run_id: int) -> RunRecord:
    radii = config.ranges[awm_range]
    radius = int(radii[run_id % len(radii)])
    seed = config.seed + run_id
    plan, counters, flagged, reason = _outcome(
        config.scenario, _behavior_task(config.task), pair, radius, seed, config.act_cap, config.probe_mode,
        config.init_order,
    )
    quality = quality_of_solution(config.task, plan, config.scenario, config.znmb_whole_plan)
    effort = collaborative_effort(counters, config.costs)
    return RunRecord(
        run_id, seed, config.task, pair, awm_range, radius, quality, counters, effort,
        performance(quality, effort), flagged, reason,
    )


def _run_block(args: tuple) -> list[RunRecord]:
    config, pair, awm_range, ids = args
    return [run_one(config, pair, awm_range, i) for i in ids]


def run_cell(config: ExperimentConfig, pair: Assignment, awm_range: str, jobs: int = 1) -> list[RunRecord]:
    """``config.runs`` dialogues with seeds ``seed + run_id`` and radii cycling through the range."""
    if awm_range not in config.ranges:
        raise ExperimentError(f"unknown awm range {awm_range!r}")
    ids = range(config.runs)
    if jobs <= 1:
        return [run_one(config, pair, awm_range, i) for i in ids]
    chunks = [list(ids[k::jobs]) for k in range(jobs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_run_block, [(config, pair, awm_range, c) for c in chunks]))
    records = [r for part in parts for r in part]
    return sorted(records, key=lambda r: r.run_id)


# -- statistics ---------------------------------------------------------------


@dataclass(frozen=True)
class AnovaRow:
    source: str
    ss: Fraction
    df: int
    ms: Fraction | None
    f: float | None


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple[AnovaRow, ...]
    ss_total: Fraction
    grand_mean: Fraction

    def row(self, source: str) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    @property
    def error(self) -> AnovaRow:
        return self.row("error")


def _mean(xs: Sequence[Fraction]) -> Fraction:
    return sum(xs, Fraction(0)) / len(xs)


def two_way_anova(cells: Sequence[Sequence[Sequence]]) -> AnovaTable:
    """Balanced two-way ANOVA; ``cells[i][j]`` holds the observations for level i of
    the strategy factor and level j of the AWM factor.  Computed exactly."""
    a = len(cells)
    b = len(cells[0]) if a else 0
    if a < 2 or b < 2 or any(len(row) != b for row in cells):
        raise ExperimentError("two_way_anova needs a rectangular grid with at least 2 levels per factor")
    n = len(cells[0][0])
    if n < 2 or any(len(c) != n for row in cells for c in row):
        raise ExperimentError("two_way_anova needs equal cell sizes of at least 2")
    data = [[[Fraction(x) for x in c] for c in row] for row in cells]
    cell_mean = [[_mean(c) for c in row] for row in data]
    grand = _mean([m for row in cell_mean for m in row])
    a_mean = [_mean(row) for row in cell_mean]
    b_mean = [_mean([cell_mean[i][j] for i in range(a)]) for j in range(b)]
    ss_a = b * n * sum((m - grand) ** 2 for m in a_mean)
    ss_b = a * n * sum((m - grand) ** 2 for m in b_mean)
    ss_ab = n * sum(
        (cell_mean[i][j] - a_mean[i] - b_mean[j] + grand) ** 2 for i in range(a) for j in range(b)
    )
    ss_err = sum((x - cell_mean[i][j]) ** 2 for i in range(a) for j in range(b) for x in data[i][j])
    ss_total = sum((x - grand) ** 2 for row in data for c in row for x in c)
    df_a, df_b = a - 1, b - 1
    df_ab, df_err = df_a * df_b, a * b * (n - 1)
    ms_err = ss_err / df_err

    def effect(name, ss, df):
        ms = ss / df
        if ms_err == 0:
            f = 0.0 if ms == 0 else float("inf")
        else:
            f = float(ms / ms_err)
        return AnovaRow(name, ss, df, ms, f)

    rows = (
        effect("strategy", ss_a, df_a),
        effect("awm", ss_b, df_b),
        effect("strategy:awm", ss_ab, df_ab),
        AnovaRow("error", ss_err, df_err, ms_err, None),
    )
    return AnovaTable(rows, ss_total, grand)


@dataclass(frozen=True)
class ContrastResult:
    awm_range: str
    mean_1: Fraction
    mean_2: Fraction
    f: Fraction
    classification: str
    p_threshold: str | None

    @property
    def difference(self) -> Fraction:
        return self.mean_1 - self.mean_2

    def describe(self) -> str:
        if self.classification == "no-difference":
            return f"no difference for {self.awm_range} awm (F = {float(self.f):.2f}, ns)"
        return f"{self.classification} for {self.awm_range} awm at p<{self.p_threshold} (F = {float(self.f):.2f})"


def classify(f: Fraction, difference: Fraction) -> tuple[str, str | None]:
    for critical, p in MB_THRESHOLDS:
        if f >= critical:
            return ("beneficial" if difference > 0 else "detrimental"), p
    return "no-difference", None


def planned_comparison(
    cell_1: Sequence, cell_2: Sequence, ms_error: Fraction, df_error: int | None = None, awm_range: str = ""
) -> ContrastResult:
    """Contrast of two cell means using the pooled ANOVA error term."""
    if ms_error <= 0:
        raise ExperimentError("planned_comparison needs a positive error mean square")
    if not cell_1 or not cell_2:
        raise ExperimentError("planned_comparison needs non-empty cells")
    m1 = _mean([Fraction(x) for x in cell_1])
    m2 = _mean([Fraction(x) for x in cell_2])
    f = (m1 - m2) ** 2 / (Fraction(ms_error) * (Fraction(1, len(cell_1)) + Fraction(1, len(cell_2))))
    label, p = classify(f, m1 - m2)
    return ContrastResult(awm_range, m1, m2, f, label, p)


# -- whole experiments --------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: dict[tuple[int, str], list[RunRecord]]
    anova: AnovaTable
    contrasts: list[ContrastResult]

    @property
    def flagged(self) -> list[RunRecord]:
        return [r for recs in self.cells.values() for r in recs if r.flagged]

    def performances(self, strategy: int, awm_range: str) -> list[Fraction]:
        return [r.performance for r in self.cells[(strategy, awm_range)]]


def analyse(config: ExperimentConfig, cells: dict[tuple[int, str], list[RunRecord]]) -> ExperimentResult:
    grid = [[[r.performance for r in cells[(s, rng)]] for rng in RANGE_ORDER] for s in (0, 1)]
    table = two_way_anova(grid)
    err = table.error
    contrasts = []
    for j, rng in enumerate(RANGE_ORDER):
        if err.ms == 0:
            # degenerate: identical runs within every cell
            diff = _mean(grid[0][j]) - _mean(grid[1][j])
            f = Fraction(0) if diff == 0 else Fraction(10**9)
            label, p = classify(f, diff)
            contrasts.append(ContrastResult(rng, _mean(grid[0][j]), _mean(grid[1][j]), f, label, p))
        else:
            contrasts.append(planned_comparison(grid[0][j], grid[1][j], err.ms, err.df, rng))
    return ExperimentResult(config, cells, table, contrasts)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    cells = {}
    for s, pair in enumerate((config.strategy_1, config.strategy_2)):
        for rng in RANGE_ORDER:
            cells[(s, rng)] = run_cell(config, pair, rng, jobs)
    return analyse(config, cells)


def difference_plot_data(result: ExperimentResult) -> list[dict]:
    return [
        {
            "awm-range": c.awm_range,
            "difference": c.difference,
            "F": c.f,
            "classification": c.classification,
            "p": c.p_threshold or "ns",
        }
        for c in result.contrasts
    ]


# -- files --------------------------------------------------------------------

RESULT_COLUMNS = (
    "run-id", "seed", "task", "strategy-pair", "awm-range", "radius", "quality",
    "messages", "inferences", "retrievals", "effort", "performance", "flagged",
)


def _header(config: ExperimentConfig) -> str:
    return (
        f"# config-hash: {config.digest()}\n"
        f"# scenario-hash: {config.scenario.digest()}\n"
        f"# config: {json.dumps(config.to_dict(), sort_keys=True)}\n"
    )


def experiment_stem(config: ExperimentConfig) -> str:
    s1, s2 = (assignment_label(p) for p in (config.strategy_1, config.strategy_2))
    return f"{config.task.value}__{s1}__vs__{s2}__{config.digest()[:8]}"


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(_header(result.config))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for s in (0, 1):
        for rng in RANGE_ORDER:
            for r in result.cells[(s, rng)]:
                w.writerow([
                    r.run_id, r.seed, r.task.value, assignment_label(r.pair), r.awm_range, r.radius,
                    r.quality, r.counters.messages, r.counters.inferences, r.counters.retrievals,
                    r.effort, r.performance, int(r.flagged),
                ])
    return buf.getvalue()


def summary_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    buf.write(_header(result.config))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("section", "source", "ss", "df", "ms", "F"))
    for row in result.anova.rows:
        w.writerow(("anova", row.source, row.ss, row.df, "" if row.ms is None else row.ms,
                    "" if row.f is None else repr(row.f)))
    w.writerow(("anova", "total", result.anova.ss_total, sum(r.df for r in result.anova.rows), "", ""))
    w.writerow(("section", "awm-range", "mean-1", "mean-2", "F", "classification", "p"))
    for c in result.contrasts:
        w.writerow(("contrast", c.awm_range, c.mean_1, c.mean_2, c.f, c.classification, c.p_threshold or "ns"))
    w.writerow(("flagged", len(result.flagged)))
    return buf.getvalue()


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = experiment_stem(result.config)
    results_path = out / f"{stem}.results.csv"
    summary_path = out / f"{stem}.summary.csv"
    results_path.write_text(results_csv(result))
    summary_path.write_text(summary_csv(result))
    return results_path, summary_path


@dataclass
class SummaryFile:
    path: Path
    config: dict
    config_hash: str
    scenario_hash: str
    contrasts: list[ContrastResult]


def read_summary(path: str | Path) -> SummaryFile:
    p = Path(path)
    meta: dict[str, str] = {}
    contrasts = []
    try:
        lines = p.read_text().splitlines()
        body = []
        for line in lines:
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = value
            else:
                body.append(line)
        for row in csv.reader(body):
            if row and row[0] == "contrast":
                _, rng, m1, m2, f, label, pval = row
                contrasts.append(
                    ContrastResult(rng, Fraction(m1), Fraction(m2), Fraction(f), label, None if pval == "ns" else pval)
                )
        config = json.loads(meta["config"])
        if len(contrasts) != len(RANGE_ORDER):
            raise ExperimentError(f"{p}: expected {len(RANGE_ORDER)} contrast rows, found {len(contrasts)}")
        return SummaryFile(p, config, meta["config-hash"], meta["scenario-hash"], contrasts)
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        if isinstance(exc, ExperimentError):
            raise
        raise ExperimentError(f"{p}: corrupt summary file ({exc})") from exc
