"""IRMA-style resource-bounded agents whose beliefs live in AWM.

Only salient propositions can feed means-end reasoning, deliberation and
inference.  Beliefs about whether an agent still has an item are decided by
a majority vote over the salient copies, so frequently stored but outdated
beliefs can win when a large part of memory is searchable.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .awm import AwmConfig, MemoryStore, new_store
from .propositions import Has, HasNot, Intend, MatchedPair, Option, Proposition, PutAct, Score
from .strategies import StrategyKind
from .tasks import ITEMS_PER_AGENT, Item, ScenarioError


INIT_ORDERS = ("shuffled", "scores-last", "has-last")


class CommitmentError(RuntimeError):
    pass


@dataclass(frozen=True)
class RankedOption:
    option: Option
    utility: int | None

    @property
    def known(self) -> bool:
        return self.utility is not None


@dataclass
class AgentState:
    id: str
    memory: MemoryStore
    radius: int
    strategy: StrategyKind
    catalog: dict[str, Item]
    committed: list[Intend] = field(default_factory=list)
    inference_count: int = 0
    message_count: int = 0
    # propositions heard in the turn being processed; salient without a search
    context: set[Proposition] = field(default_factory=set)
    warrant_used: dict[PutAct, int | None] = field(default_factory=dict)
    mp_inferences: set[MatchedPair] = field(default_factory=set)
    require_mp_warrants: bool = True

    # -- storage ---------------------------------------------------------
    def store(self, prop: Proposition) -> None:
        self.memory.store(prop)

    def hear(self, prop: Proposition) -> None:
        """Store a communicated proposition and mark it salient for this turn."""
        self.memory.store(prop)
        self.context.add(prop)

    def end_turn(self) -> None:
        self.context.clear()

    # -- reasoning -------------------------------------------------------
    def believe(self, agent: str, item: str) -> Proposition | None:
        """Winning belief among salient Has/HasNot copies for ``(agent, item)``."""
        matches = self.memory.retrieve((Has(agent, item), HasNot(agent, item)), self.radius)
        return _vote(matches)

    def means_end_reason(self, room: str, exclude: Iterable[PutAct] = ()) -> list[Option]:
        """One option per salient own item that is not believed used."""
        matches = self.memory.retrieve((Has(self.id, None), HasNot(self.id, None)), self.radius)
        by_item: dict[str, list] = {}
        for m in matches:
            by_item.setdefault(m.prop.item, []).append(m)
        # acts already adopted as intentions are part of the plan, not of AWM
        banned = set(exclude) | {i.act for i in self.committed}
        options = []
        for item in sorted(by_item):
            winner = _vote(by_item[item])
            if not isinstance(winner, Has):
                continue
            act = PutAct(self.id, item, room)
            if act in banned:
                continue
            options.append(Option(act))
            self.inference_count += 1
        return options

    def warrant(self, item: str) -> int | None:
        """Utility of ``item`` if a score belief is salient (or was just heard)."""
        for prop in self.context:
            if isinstance(prop, Score) and prop.item == item:
                return prop.value
        found = self.memory.retrieve(Score(item, None), self.radius)
        if not found:
            return None
        # most copies, then most recent
        best = max(found, key=lambda m: (m.copies, m.latest_step))
        return best.prop.value

    def deliberate(self, options: Sequence[Option]) -> list[RankedOption]:
        """Rank options: known utilities descending, unknowns last, ties by item name."""
        if not options:
            raise ValueError("deliberate needs at least one option")
        ranked = []
        for opt in options:
            ranked.append(RankedOption(opt, self.warrant(opt.act.item)))
            self.inference_count += 1
        ranked.sort(key=_rank_key)
        top = ranked[0]
        self.warrant_used[top.option.act] = top.utility
        return ranked

    def apply_act_effect(self, intention: Intend) -> None:
        if intention in self.committed:
            raise CommitmentError(f"{self.id} already committed to {intention.act}")
        self.store(intention)
        self.store(HasNot(intention.act.actor, intention.act.item))
        self.inference_count += 1
        self.committed.append(intention)

    def matched_pair_infer(self, new: Intend, variant: str) -> list[MatchedPair]:
        """Fire matched-pair inferences whose premises are all salient."""
        patterns: tuple[Proposition, ...] = (Intend(None),)
        if self.require_mp_warrants:
            patterns += (Score(None, None),)
        salient = self.memory.retrieve(patterns, self.radius)
        intents = [m.prop for m in salient if isinstance(m.prop, Intend)]
        scored = {m.prop.item for m in salient if isinstance(m.prop, Score)}
        scored |= {p.item for p in self.context if isinstance(p, Score)}
        intents_ctx = intents + [p for p in self.context if isinstance(p, Intend)]
        if new not in intents_ctx:
            return []
        color = self.catalog[new.act.item].color
        fired = []
        seen: set[PutAct] = set()
        for prior in intents_ctx:
            act = prior.act
            if act == new.act or act in seen or act.item == new.act.item:
                continue
            seen.add(act)
            if self.catalog[act.item].color != color:
                continue
            same_room = act.room == new.act.room
            if same_room != (variant == "same-room"):
                continue
            if self.require_mp_warrants and not {act.item, new.act.item} <= scored:
                continue
            mp = MatchedPair(act, new.act)
            if mp in self.mp_inferences:
                continue
            self.store(mp)
            self.mp_inferences.add(mp)
            self.inference_count += 1
            fired.append(mp)
        return fired

    def matched_pair_partner(self, act: PutAct, variant: str) -> Intend | None:
        """A salient prior intention that would pair with ``act`` (used by the MPIE strategy)."""
        color = self.catalog[act.item].color
        salient = self.memory.retrieve(Intend(None), self.radius)
        best = None
        for m in salient:
            prior = m.prop.act
            if prior.item == act.item or self.catalog[prior.item].color != color:
                continue
            if (prior.room == act.room) != (variant == "same-room"):
                continue
            if best is None or m.latest_step > best[1]:
                best = (m.prop, m.latest_step)
        if best is not None:
            self.inference_count += 1
            return best[0]
        return None


def _rank_key(r: RankedOption):
    return (r.utility is None, -(r.utility or 0), r.option.act.item)


def _vote(matches) -> Proposition | None:
    """Most salient copies wins; ties go to the most recently stored."""
    if not matches:
        return None
    return max(matches, key=lambda m: (m.copies, m.latest_step)).prop


def init_agent(
    agent_id: str,
    own_items: Sequence[Item],
    all_items: Sequence[Item],
    strategy: StrategyKind,
    awm: AwmConfig,
    init_order: str = "shuffled",
) -> AgentState:
    """Create an agent and store its Has and Score beliefs.

    ``init_order`` is ``"shuffled"`` (seeded random interleaving), ``"scores-last"``
    or ``"has-last"``; each group is shuffled internally in the last two.
    """
    if init_order not in INIT_ORDERS:
        raise ValueError(f"init_order must be one of {', '.join(INIT_ORDERS)}, got {init_order!r}")
    if len(own_items) != ITEMS_PER_AGENT:
        raise ScenarioError(f"{agent_id} needs {ITEMS_PER_AGENT} items, got {len(own_items)}")
    names = [it.name for it in all_items]
    if len(set(names)) != len(names):
        raise ScenarioError("duplicate item names in scenario")
    for it in all_items:
        Item(it.name, it.color, it.kind, it.value)  # re-validate value range
    memory = new_store(awm)
    agent = AgentState(
        id=agent_id,
        memory=memory,
        radius=awm.radius,
        strategy=StrategyKind(strategy),
        catalog={it.name: it for it in all_items},
    )
    scores: list[Proposition] = [Score(it.name, it.value) for it in all_items]
    has: list[Proposition] = [Has(agent_id, it.name) for it in own_items]
    rng = random.Random(f"{awm.seed}/init-order")
    if init_order == "shuffled":
        beliefs = scores + has
        rng.shuffle(beliefs)
    else:
        rng.shuffle(scores)
        rng.shuffle(has)
        beliefs = has + scores if init_order == "scores-last" else scores + has
    memory.store_all(beliefs)
    return agent
