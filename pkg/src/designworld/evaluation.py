"""Collaborative effort and performance, computed in exact rational arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

Number = int | float | str | Fraction


class CostError(ValueError):
    pass


def to_fraction(value: Number) -> Fraction:
    """Exact conversion; floats go through their shortest decimal repr so 0.01 is 1/100."""
    if isinstance(value, bool):
        raise CostError("costs must be numbers")
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, (int, str, Rational)):
        return Fraction(value)
    raise CostError(f"cannot use {value!r} as a cost")


@dataclass(frozen=True)
class CostConfig:
    commcost: Fraction = Fraction(1)
    infcost: Fraction = Fraction(1)
    retcost: Fraction = Fraction(1, 100)

    def __post_init__(self) -> None:
        for name in ("commcost", "infcost", "retcost"):
            value = to_fraction(getattr(self, name))
            if value < 0:
                raise CostError(f"{name} must be non-negative, got {value}")
            object.__setattr__(self, name, value)

    def as_dict(self) -> dict[str, str]:
        return {"commcost": str(self.commcost), "infcost": str(self.infcost), "retcost": str(self.retcost)}


@dataclass(frozen=True)
class EffortCounters:
    messages: int = 0
    inferences: int = 0
    retrievals: int = 0


def collaborative_effort(counters: EffortCounters, costs: CostConfig) -> Fraction:
    return (
        costs.commcost * counters.messages
        + costs.infcost * counters.inferences
        + costs.retcost * counters.retrievals
    )


def performance(quality: int, effort: Fraction) -> Fraction:
    return Fraction(quality) - Fraction(effort)


@dataclass(frozen=True)
class PerformanceReport:
    quality: int
    effort: Fraction
    performance: Fraction
    counters: EffortCounters
    hashes: dict[str, str] = field(default_factory=dict)


def evaluate(quality: int, counters: EffortCounters, costs: CostConfig, **hashes: str) -> PerformanceReport:
    effort = collaborative_effort(counters, costs)
    return PerformanceReport(quality, effort, performance(quality, effort), counters, dict(hashes))
