"""Belief and intention content exchanged and stored by Design-World agents.

Every proposition is a frozen dataclass so it can be hashed, deduplicated
and compared.  Patterns are the same classes with ``None`` standing for a
wildcard field (``Score(None, None)`` matches every score belief).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Union

ROOMS = ("room-1", "room-2")


@dataclass(frozen=True, order=True)
class PutAct:
    actor: str | None
    item: str | None
    room: str | None


@dataclass(frozen=True)
class Has:
    agent: str | None
    item: str | None


@dataclass(frozen=True)
class HasNot:
    agent: str | None
    item: str | None


@dataclass(frozen=True)
class Score:
    item: str | None
    value: int | None


@dataclass(frozen=True)
class Option:
    act: PutAct | None


@dataclass(frozen=True)
class Intend:
    act: PutAct | None


@dataclass(frozen=True)
class MatchedPair:
    first: PutAct | None
    second: PutAct | None


@dataclass(frozen=True)
class RejectReason:
    belief: Proposition | None


@dataclass(frozen=True)
class DesignRoom:
    """Content of a room-level open/close act."""

    room: str | None


Proposition = Union[Has, HasNot, Score, Option, Intend, MatchedPair, RejectReason, DesignRoom]


def matches(pattern: Proposition, prop: Proposition) -> bool:
    """True when ``prop`` instantiates ``pattern`` (``None`` fields are wildcards)."""
    if type(pattern) is not type(prop):
        return False
    for f in fields(pattern):
        want = getattr(pattern, f.name)
        if want is None:
            continue
        have = getattr(prop, f.name)
        if isinstance(want, PutAct):
            if not isinstance(have, PutAct) or not _act_matches(want, have):
                return False
        elif dataclass_like(want):
            if not matches(want, have):
                return False
        elif want != have:
            return False
    return True


def _act_matches(pattern: PutAct, act: PutAct) -> bool:
    return all(
        want is None or want == have
        for want, have in ((pattern.actor, act.actor), (pattern.item, act.item), (pattern.room, act.room))
    )


def dataclass_like(value: object) -> bool:
    return hasattr(value, "__dataclass_fields__")


def is_ground(prop: object) -> bool:
    """True when no field (recursively) is a wildcard."""
    if not dataclass_like(prop):
        return prop is not None
    return all(is_ground(getattr(prop, f.name)) for f in fields(prop))
