"""Limited attention/working memory: a random walk over a 3-D torus of loci.

Propositions are stored in chronological order at the loci visited by a
moving pointer.  Retrieval only sees loci within a city-block radius of the
pointer, so what is *salient* shifts as new items are stored.  Nothing is
ever deleted; repeated items are stored again at a new locus.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

from .propositions import Proposition, matches

LOW_AWM = (3, 4)
MID_AWM = (6, 7)
HIGH_AWM = (11, 16)
AWM_RANGES = {"low": LOW_AWM, "mid": MID_AWM, "high": HIGH_AWM}

_DIRECTIONS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))

Locus = tuple[int, int, int]
PROBE_MODES = ("ball", "occupied")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AwmConfig:
    side: int = 16
    radius: int = 7
    seed: int | str = 0
    # "ball": every search pays for the whole search volume;
    # "occupied": only loci that actually hold entries are examined
    probe_mode: str = "ball"

    def __post_init__(self) -> None:
        if self.probe_mode not in PROBE_MODES:
            raise ConfigError(f"probe_mode must be one of {', '.join(PROBE_MODES)}, got {self.probe_mode!r}")
        if self.side < 2:
            raise ConfigError(f"awm side must be >= 2, got {self.side}")
        if self.radius < 0:
            raise ConfigError(f"awm radius must be >= 0, got {self.radius}")


class Match(NamedTuple):
    prop: Proposition
    copies: int
    latest_step: int


def torus_distance(a: Locus, b: Locus, side: int) -> int:
    total = 0
    for x, y in zip(a, b):
        d = (x - y) % side
        total += min(d, side - d)
    return total


@lru_cache(maxsize=None)
def _shell_counts(side: int) -> tuple[int, ...]:
    """Number of loci at each exact torus distance from the origin."""
    per_axis = [min(d, side - d) for d in range(side)]
    counts = [0] * (3 * (side // 2) + 1)
    for dx in per_axis:
        for dy in per_axis:
            for dz in per_axis:
                counts[dx + dy + dz] += 1
    return tuple(counts)


def ball_volume(radius: int, side: int = 16) -> int:
    """Loci within city-block ``radius`` of a point on a ``side``-torus."""
    counts = _shell_counts(side)
    return sum(counts[: max(0, radius) + 1])


def saturation_radius(side: int) -> int:
    return 3 * (side // 2)


@dataclass
class MemoryStore:
    config: AwmConfig
    grid: dict[Locus, list[tuple[Proposition, int]]] = field(default_factory=dict)
    pointer: Locus = (0, 0, 0)
    step: int = 0
    probes: int = 0
    rng: random.Random = field(default_factory=random.Random)
    _cache: dict[int, tuple[list[tuple[Proposition, int]], int]] = field(default_factory=dict, repr=False)

    @property
    def side(self) -> int:
        return self.config.side

    def store(self, prop: Proposition) -> Locus:
        """Move the pointer one unit along a random axis, then store ``prop`` there."""
        dx, dy, dz = _DIRECTIONS[self.rng.randrange(6)]
        x, y, z = self.pointer
        s = self.side
        self.pointer = ((x + dx) % s, (y + dy) % s, (z + dz) % s)
        self.grid.setdefault(self.pointer, []).append((prop, self.step))
        self.step += 1
        self._cache.clear()
        return self.pointer

    def store_all(self, props: Iterable[Proposition]) -> None:
        for p in props:
            self.store(p)

    def _salient_entries(self, radius: int) -> list[tuple[Proposition, int]]:
        """Entries inside the search ball; charges the search to ``probes``."""
        cached = self._cache.get(radius)
        if cached is None:
            if radius >= saturation_radius(self.side):
                cells = list(self.grid.values())
            else:
                here, side = self.pointer, self.side
                cells = [c for locus, c in self.grid.items() if torus_distance(here, locus, side) <= radius]
            cached = ([e for cell in cells for e in cell], len(cells))
            self._cache[radius] = cached
        entries, occupied = cached
        if self.config.probe_mode == "ball":
            self.probes += ball_volume(radius, self.side)
        else:
            self.probes += occupied
        return entries

    def salient_set(self, radius: int | None = None) -> set[Proposition]:
        r = self.config.radius if radius is None else radius
        return {p for p, _ in self._salient_entries(r)}

    def retrieve(
        self, patterns: Proposition | Sequence[Proposition], radius: int | None = None
    ) -> list[Match]:
        """Salient propositions matching any of ``patterns`` in a single search.

        Copy counts only include salient copies.  Results are ordered by first
        store step so the output is deterministic.
        """
        if not isinstance(patterns, (list, tuple)):
            patterns = (patterns,)
        r = self.config.radius if radius is None else radius
        found: dict[Proposition, list[int]] = {}
        for prop, step in self._salient_entries(r):
            if any(matches(pat, prop) for pat in patterns):
                slot = found.get(prop)
                if slot is None:
                    found[prop] = [1, step, step]
                else:
                    slot[0] += 1
                    slot[1] = min(slot[1], step)
                    slot[2] = max(slot[2], step)
        ordered = sorted(found.items(), key=lambda kv: kv[1][1])
        return [Match(prop, copies, latest) for prop, (copies, _, latest) in ordered]

    def is_salient(self, prop: Proposition, radius: int | None = None) -> bool:
        r = self.config.radius if radius is None else radius
        return any(p == prop for p, _ in self._salient_entries(r))

    def all_propositions(self) -> set[Proposition]:
        """Everything ever stored, ignoring salience (no probe charge)."""
        return {p for cell in self.grid.values() for p, _ in cell}

    def entry_count(self) -> int:
        return sum(len(cell) for cell in self.grid.values())


def new_store(config: AwmConfig) -> MemoryStore:
    return MemoryStore(config=config, rng=random.Random(config.seed))
