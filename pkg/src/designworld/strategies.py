"""Communicative strategies: how discourse acts expand into utterance acts.

The strategies differ only in which informationally redundant acts they add
around the core act; none of them changes which option gets proposed.
"""

from __future__ import annotations

import enum
import logging
from typing import TYPE_CHECKING

from .acts import ActKind, UtteranceAct
from .propositions import HasNot, Intend, Option, Score

if TYPE_CHECKING:
    from .agent import AgentState, RankedOption

log = logging.getLogger(__name__)


class StrategyKind(str, enum.Enum):
    ALL_IMPLICIT = "all-implicit"
    CLOSE_CONSEQUENCE = "close-consequence"
    EXPLICIT_WARRANT = "explicit-warrant"
    MPIE = "mpie"

    @property
    def short(self) -> str:
        return {"all-implicit": "AI", "close-consequence": "CC", "explicit-warrant": "EW", "mpie": "MPIE"}[
            self.value
        ]


class StrategyError(ValueError):
    pass


def validate_pair(strategy_a: StrategyKind, strategy_b: StrategyKind, matched_pair_task: bool) -> None:
    pair = (StrategyKind(strategy_a), StrategyKind(strategy_b))
    if StrategyKind.MPIE in pair and not matched_pair_task:
        raise StrategyError("the mpie strategy is only available in matched-pair tasks")
    if pair.count(StrategyKind.CLOSE_CONSEQUENCE) > 1:
        raise StrategyError("close-consequence may be given to at most one agent per dialogue")


def expand_proposal(
    agent: AgentState, ranked: RankedOption, hearer: str, variant: str | None = None
) -> list[UtteranceAct]:
    option = ranked.option
    core = UtteranceAct(ActKind.PROPOSE, agent.id, hearer, option)
    kind = agent.strategy
    if kind is StrategyKind.EXPLICIT_WARRANT:
        if ranked.utility is None:
            log.debug("%s has no warrant for %s; bare proposal", agent.id, option.act)
            return [core]
        warrant = Score(option.act.item, ranked.utility)
        return [UtteranceAct(ActKind.SAY, agent.id, hearer, warrant), core]
    if kind is StrategyKind.MPIE and variant is not None:
        partner = agent.matched_pair_partner(option.act, variant)
        if partner is not None:
            return [UtteranceAct(ActKind.SAY, agent.id, hearer, partner), core]
    return [core]


def expand_closing(
    agent: AgentState, intention: Intend, hearer: str, segment_open: bool = True
) -> list[UtteranceAct]:
    if agent.strategy is not StrategyKind.CLOSE_CONSEQUENCE:
        return []
    if not segment_open:
        raise StrategyError("close-consequence needs an open segment for the intention")
    effect = HasNot(intention.act.actor, intention.act.item)
    return [
        UtteranceAct(ActKind.CLOSE, agent.id, hearer, intention),
        UtteranceAct(ActKind.SAY, agent.id, hearer, effect),
    ]


def expand_rejection(
    agent: AgentState, option: Option, hearer: str, depth: int, warrant: int | None = None
) -> list[UtteranceAct]:
    """Depth 1 is a bare counter-proposal; depth 2 re-asserts the own option with its warrant."""
    reject = UtteranceAct(ActKind.REJECT_OPTION, agent.id, hearer, option)
    if depth == 1:
        return [reject]
    if depth == 2:
        if warrant is None:
            raise StrategyError("rejecting a rejection needs a believed warrant")
        return [UtteranceAct(ActKind.SAY, agent.id, hearer, Score(option.act.item, warrant)), reject]
    raise StrategyError(f"rejection depth {depth} is not supported")
