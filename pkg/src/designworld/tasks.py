"""Scenarios, collaborative plan records and the quality-of-solution rules."""

from __future__ import annotations

import enum
import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .propositions import MatchedPair, PutAct

MIN_VALUE = 10
MAX_VALUE = 56
ITEMS_PER_AGENT = 12
STEPS_PER_ROOM = 4
MATCHED_PAIR_BONUS = 50
COLORS = ("green", "purple", "red", "yellow")
KINDS = ("rug", "lamp", "couch", "chair", "table", "bed")


class TaskKind(str, enum.Enum):
    STANDARD = "standard"
    ZNMB = "zero-nonmatching-beliefs"
    MP_SAME_ROOM = "mp-same-room"
    MP_TWO_ROOM = "mp-two-room"
    ZERO_INVALIDS = "zero-invalids"

    @property
    def matched_pair_variant(self) -> str | None:
        return {TaskKind.MP_SAME_ROOM: "same-room", TaskKind.MP_TWO_ROOM: "two-room"}.get(self)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Item:
    name: str
    color: str
    kind: str
    value: int

    def __post_init__(self) -> None:
        if not MIN_VALUE <= self.value <= MAX_VALUE:
            raise ScenarioError(
                f"item {self.name!r} value {self.value} outside [{MIN_VALUE}, {MAX_VALUE}]"
            )


def item_name(color: str, kind: str) -> str:
    return f"{color}-{kind}"


@dataclass(frozen=True)
class Scenario:
    items_a: tuple[Item, ...]
    items_b: tuple[Item, ...]
    name: str = "custom"
    version: int = 1

    def __post_init__(self) -> None:
        for label, items in (("A", self.items_a), ("B", self.items_b)):
            if len(items) != ITEMS_PER_AGENT:
                raise ScenarioError(f"agent {label} needs {ITEMS_PER_AGENT} items, got {len(items)}")
        names = [it.name for it in self.all_items]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ScenarioError(f"duplicate item names: {', '.join(dupes)}")

    @property
    def all_items(self) -> tuple[Item, ...]:
        return self.items_a + self.items_b

    def item(self, name: str) -> Item:
        for it in self.all_items:
            if it.name == name:
                return it
        raise KeyError(name)

    def value(self, name: str) -> int:
        return self.item(name).value

    def to_dict(self) -> dict:
        def rows(items):
            return [{"name": i.name, "color": i.color, "kind": i.kind, "value": i.value} for i in items]

        return {"name": self.name, "version": self.version, "a": rows(self.items_a), "b": rows(self.items_b)}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def scenario_from_dict(data: dict) -> Scenario:
    try:
        a = tuple(Item(**row) for row in data["a"])
        b = tuple(Item(**row) for row in data["b"])
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from exc
    return Scenario(a, b, name=data.get("name", "custom"), version=int(data.get("version", 1)))


def load_scenario(path: str | Path | None = None) -> Scenario:
    """Load a scenario JSON file; ``None`` loads the bundled default."""
    if path is None:
        text = resources.files("designworld").joinpath("data/default_scenario.json").read_text()
    else:
        p = Path(path)
        if not p.is_file():
            raise ScenarioError(f"scenario file not found: {p}")
        text = p.read_text()
    try:
        return scenario_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc


def random_scenario(seed: int) -> Scenario:
    """Every color/kind combination once, random values and random 12/12 split."""
    rng = random.Random(f"scenario-{seed}")
    combos = [(c, k) for c in COLORS for k in KINDS]
    rng.shuffle(combos)
    items = [Item(item_name(c, k), c, k, rng.randint(MIN_VALUE, MAX_VALUE)) for c, k in combos]
    return Scenario(tuple(items[:12]), tuple(items[12:]), name=f"random-{seed}")


@dataclass
class PlanStep:
    act: PutAct
    explicit: bool
    warrant_a: int | None = None
    warrant_b: int | None = None


@dataclass
class PlanRecord:
    steps: list[PlanStep] = field(default_factory=list)
    mp_inferences_a: set[MatchedPair] = field(default_factory=set)
    mp_inferences_b: set[MatchedPair] = field(default_factory=set)

    @property
    def intentions(self) -> list[PutAct]:
        return [s.act for s in self.steps]


def step_validity(plan: PlanRecord) -> list[bool]:
    """A step is invalid when its item was already placed by an earlier step."""
    seen: set[str] = set()
    out = []
    for step in plan.steps:
        out.append(step.act.item not in seen)
        seen.add(step.act.item)
    return out


def score_standard(plan: PlanRecord, scenario: Scenario) -> int:
    total = 0
    for step, ok in zip(plan.steps, step_validity(plan)):
        v = scenario.value(step.act.item)
        total += v if ok else -v
    return total


def score_znmb(plan: PlanRecord, scenario: Scenario, whole_plan: bool = False) -> int:
    """Valid steps only count when both agents used the true warrant at acceptance.

    With ``whole_plan`` a single mismatched step zeroes every valid step.
    """
    gained = lost = 0
    all_matched = True
    for step, ok in zip(plan.steps, step_validity(plan)):
        v = scenario.value(step.act.item)
        if not ok:
            lost += v
        elif step.warrant_a == v and step.warrant_b == v:
            gained += v
        else:
            all_matched = False
    if whole_plan and not all_matched:
        gained = 0
    return gained - lost


def pair_satisfies(first: PutAct, second: PutAct, scenario: Scenario, variant: str) -> bool:
    if first.item == second.item:
        return False
    if scenario.item(first.item).color != scenario.item(second.item).color:
        return False
    same_room = first.room == second.room
    return same_room if variant == "same-room" else not same_room


def score_matched_pair(plan: PlanRecord, scenario: Scenario, variant: str) -> int:
    if variant not in ("same-room", "two-room"):
        raise ValueError(f"unknown matched-pair variant {variant!r}")
    validity = step_validity(plan)
    index: dict[PutAct, int] = {}
    for i, (step, ok) in enumerate(zip(plan.steps, validity)):
        if ok and step.act not in index:
            index[step.act] = i
    shared = plan.mp_inferences_a & plan.mp_inferences_b
    candidates = []
    for mp in shared:
        i, j = index.get(mp.first), index.get(mp.second)
        if i is None or j is None or i == j:
            continue
        if not pair_satisfies(mp.first, mp.second, scenario, variant):
            continue
        candidates.append((max(i, j), min(i, j)))
    used: set[int] = set()
    total = 0
    for later, earlier in sorted(set(candidates)):
        if later in used or earlier in used:
            continue
        used.update((later, earlier))
        total += (
            scenario.value(plan.steps[later].act.item)
            + scenario.value(plan.steps[earlier].act.item)
            + MATCHED_PAIR_BONUS
        )
    return total


def score_zero_invalids(plan: PlanRecord, scenario: Scenario) -> int:
    if not all(step_validity(plan)):
        return 0
    return score_standard(plan, scenario)


def quality_of_solution(
    task: TaskKind, plan: PlanRecord, scenario: Scenario, znmb_whole_plan: bool = False
) -> int:
    task = TaskKind(task)
    if task is TaskKind.STANDARD:
        return score_standard(plan, scenario)
    if task is TaskKind.ZNMB:
        return score_znmb(plan, scenario, whole_plan=znmb_whole_plan)
    if task is TaskKind.ZERO_INVALIDS:
        return score_zero_invalids(plan, scenario)
    return score_matched_pair(plan, scenario, task.matched_pair_variant)


def _best_pairing(items: list[Item], slots: int) -> int:
    """Exhaustive search for the heaviest set of <= ``slots`` disjoint same-color pairs."""
    best = 0

    def search(remaining: list[Item], left: int, acc: int) -> None:
        nonlocal best
        best = max(best, acc)
        if left == 0 or len(remaining) < 2:
            return
        head, rest = remaining[0], remaining[1:]
        # head unpaired
        search(rest, left, acc)
        for k, other in enumerate(rest):
            if other.color == head.color:
                search(rest[:k] + rest[k + 1 :], left - 1, acc + head.value + other.value + MATCHED_PAIR_BONUS)

    search(sorted(items, key=lambda it: (it.color, -it.value, it.name)), slots, 0)
    return best


def optimal_score(task: TaskKind, scenario: Scenario) -> int:
    """Best achievable quality for ``task`` on ``scenario`` (two rooms of four)."""
    task = TaskKind(task)
    slots = 2 * STEPS_PER_ROOM
    if task.matched_pair_variant:
        # Four disjoint pairs always fit: two per room (same-room) or one item per room each (two-room).
        return _best_pairing(list(scenario.all_items), slots // 2)
    return sum(heapq.nlargest(slots, (it.value for it in scenario.all_items)))
