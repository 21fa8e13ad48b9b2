"""Discourse acts, incoming-message processing and the dialogue driver.

One negotiation segment is open at a time.  A proposal is accepted
explicitly, or implicitly when the hearer carries on without objecting; it
is rejected with a counter-proposal, or with a belief that defeats its
preconditions.  A rejected counter-proposal may itself be rejected once, with
the proposer's warrant said aloud; after that the hearer acquiesces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .acts import ActKind, Transcript, UtteranceAct
from .agent import AgentState
from .evaluation import EffortCounters
from .propositions import ROOMS, DesignRoom, Has, HasNot, Intend, Option, PutAct, RejectReason
from .strategies import expand_closing, expand_proposal, expand_rejection
from .tasks import STEPS_PER_ROOM, PlanRecord, PlanStep, TaskKind

DEFAULT_ACT_CAP = 400


class ProtocolError(RuntimeError):
    pass


class ActCapExceeded(RuntimeError):
    pass


class ReplayMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class Negotiation:
    option: Option
    proposer: str
    depth: int = 0
    rival: Option | None = None


@dataclass
class DialogueState:
    room_index: int = 0
    accepted_in_room: int = 0
    open: Negotiation | None = None
    prior_open: Negotiation | None = None
    banned: set[PutAct] = field(default_factory=set)
    last_settled: PutAct | None = None
    ended: bool = False

    @property
    def room(self) -> str:
        return ROOMS[min(self.room_index, len(ROOMS) - 1)]

    def advance_room(self) -> None:
        self.room_index += 1
        self.accepted_in_room = 0
        self.banned = set()
        if self.room_index >= len(ROOMS):
            self.ended = True


@dataclass
class DialogueResult:
    transcript: Transcript
    plan: PlanRecord
    counters: EffortCounters
    flagged: bool = False
    reason: str = ""


def legal_followups(state: DialogueState) -> frozenset[str]:
    """Act kinds the discourse schema allows next (``"end"`` marks termination)."""
    if state.ended:
        return frozenset({"end"})
    if state.open is not None:
        return frozenset(
            {
                ActKind.ACCEPT.value,
                ActKind.REJECT_OPTION.value,
                ActKind.REJECT_BELIEF.value,
                ActKind.SAY.value,
                ActKind.PROPOSE.value,
                ActKind.CLOSE.value,
            }
        )
    return frozenset(
        {ActKind.OPEN.value, ActKind.PROPOSE.value, ActKind.CLOSE.value, ActKind.SAY.value, ActKind.ASK.value}
    )


def infer_implicit_acceptance(open_: Negotiation | None, next_acts: list[UtteranceAct]) -> Intend | None:
    """The open proposal becomes an intention unless the following turn rejects it."""
    if open_ is None or not next_acts:
        return None
    for act in next_acts:
        if act.kind in (ActKind.REJECT_OPTION, ActKind.REJECT_BELIEF):
            return None
    return Intend(open_.option.act)


def _rejects(act: UtteranceAct) -> bool:
    return act.kind in (ActKind.REJECT_OPTION, ActKind.REJECT_BELIEF)


def _is_better(candidate: int | None, incumbent: int | None) -> bool:
    """Strictly better given what is known; an unknown utility never beats anything."""
    return candidate is not None and (incumbent is None or candidate > incumbent)


def process_incoming(agent: AgentState, act: UtteranceAct, state: DialogueState) -> list[UtteranceAct]:
    """Apply one incoming act to ``agent``'s mental state and return its reply acts."""
    kind = act.kind
    if kind is ActKind.SAY:
        agent.hear(act.content)
        return []
    if kind is ActKind.REJECT_BELIEF:
        agent.hear(act.content.belief)
        return []
    if kind is ActKind.ASK:
        found = agent.memory.retrieve(act.content, agent.radius)
        return [UtteranceAct(ActKind.SAY, agent.id, act.speaker, m.prop) for m in found]
    if kind in (ActKind.OPEN, ActKind.CLOSE, ActKind.ACCEPT):
        # segment bookkeeping lives in the dialogue state; acceptance effects are
        # applied by the acceptance inference before the turn is processed
        return []
    if kind is ActKind.PROPOSE:
        return _evaluate_proposal(agent, act, state)
    if kind is ActKind.REJECT_OPTION:
        return _evaluate_rejection(agent, act, state)
    raise ProtocolError(f"unhandled act kind {kind}")


def _evaluate_proposal(agent: AgentState, act: UtteranceAct, state: DialogueState) -> list[UtteranceAct]:
    option: Option = act.content
    speaker, item = act.speaker, option.act.item
    belief = agent.believe(speaker, item)
    if isinstance(belief, HasNot):
        return [UtteranceAct(ActKind.REJECT_BELIEF, agent.id, speaker, RejectReason(belief))]
    agent.store(Has(speaker, item))
    own = agent.means_end_reason(option.act.room, exclude=state.banned)
    ranked = agent.deliberate([option] + own)
    incoming = next(r for r in ranked if r.option == option)
    agent.warrant_used[option.act] = incoming.utility
    top = ranked[0]
    if top.option != option and _is_better(top.utility, incoming.utility):
        return expand_rejection(agent, top.option, speaker, depth=1)
    return [UtteranceAct(ActKind.ACCEPT, agent.id, speaker, option)]


def _evaluate_rejection(agent: AgentState, act: UtteranceAct, state: DialogueState) -> list[UtteranceAct]:
    counter: Option = act.content
    neg = state.open
    if neg is None or neg.option != counter or neg.rival is None:
        raise ProtocolError("rejection without a matching open negotiation")
    if neg.depth < 2:
        belief = agent.believe(act.speaker, counter.act.item)
        if isinstance(belief, HasNot):
            return [UtteranceAct(ActKind.REJECT_BELIEF, agent.id, act.speaker, RejectReason(belief))]
    agent.store(Has(act.speaker, counter.act.item))
    if neg.depth >= 2:
        # our counter-proposal was rejected with a warrant: acquiesce
        agent.warrant_used[counter.act] = agent.warrant(counter.act.item)
        agent.inference_count += 1
        return [UtteranceAct(ActKind.ACCEPT, agent.id, act.speaker, counter)]
    own = neg.rival
    ranked = agent.deliberate([counter, own])
    values = {r.option: r.utility for r in ranked}
    agent.warrant_used[counter.act] = values[counter]
    agent.warrant_used[own.act] = values[own]
    if _is_better(values[own], values[counter]):
        return expand_rejection(agent, own, act.speaker, depth=2, warrant=values[own])
    return [UtteranceAct(ActKind.ACCEPT, agent.id, act.speaker, counter)]


@dataclass
class ModelParams:
    """Behavioral switches left open by the model description."""

    rehearse_preconditions: bool = True
    act_cap: int = DEFAULT_ACT_CAP


class Dialogue:
    """Runs one negotiation between two agents; agent A opens."""

    def __init__(
        self,
        agent_a: AgentState,
        agent_b: AgentState,
        task: TaskKind = TaskKind.STANDARD,
        params: ModelParams | None = None,
    ):
        self.a, self.b = agent_a, agent_b
        self.agents = {agent_a.id: agent_a, agent_b.id: agent_b}
        self.task = TaskKind(task)
        self.variant = self.task.matched_pair_variant
        self.params = params or ModelParams()
        self.state = DialogueState()
        self.transcript = Transcript()
        self.plan = PlanRecord()
        # settlement announced by the sender of the latest turn: (intention, explicit)
        self._pending: tuple[Intend, bool] | None = None

    def other(self, agent: AgentState) -> AgentState:
        return self.b if agent is self.a else self.a

    # -- receiving -------------------------------------------------------
    def absorb(self, agent: AgentState, incoming: list[UtteranceAct]) -> list[UtteranceAct]:
        agent.end_turn()
        accepted = infer_implicit_acceptance(self.state.prior_open, incoming)
        expected = self._pending[0] if self._pending else None
        if accepted != expected:
            raise ProtocolError(f"{agent.id} inferred acceptance {accepted}, sender settled {expected}")
        if accepted is not None:
            self._commit(agent, accepted)
        replies: list[UtteranceAct] = []
        for act in incoming:
            if act.hearer != agent.id:
                raise ProtocolError(f"act addressed to {act.hearer} delivered to {agent.id}")
            replies += process_incoming(agent, act, self.state)
        return replies

    def _commit(self, agent: AgentState, intention: Intend) -> None:
        agent.apply_act_effect(intention)
        if self.variant is not None:
            agent.matched_pair_infer(intention, self.variant)

    # -- sending ---------------------------------------------------------
    def compose(self, agent: AgentState, replies: list[UtteranceAct]) -> list[UtteranceAct]:
        state = self.state
        hearer = self.other(agent)
        state.prior_open = state.open
        self._pending = None
        if replies and replies[-1].kind is ActKind.ACCEPT:
            option = replies[-1].content
            intention = Intend(option.act)
            closing = expand_closing(agent, intention, hearer.id)
            self._settle(agent, option, explicit=bool(closing))
            follow = self._next_proposal(agent)
            if any(a.kind is ActKind.PROPOSE for a in follow):
                return closing + follow
            self._pending = (intention, True)
            self.plan.steps[-1].explicit = True
            return (closing or [replies[-1]]) + follow
        if replies and _rejects(replies[-1]):
            last = replies[-1]
            if last.kind is ActKind.REJECT_BELIEF:
                state.banned.add(state.open.option.act)
                state.open = None
                # a withdrawn proposal settles the step; the rejecting agent proposes next
                return replies + self._next_proposal(agent)
            prev = state.open
            depth = 1 if prev.depth == 0 else 2
            state.open = Negotiation(last.content, agent.id, depth, rival=prev.option)
            return replies
        if replies:
            # answers to ask acts
            return replies
        return self._next_proposal(agent)

    def _settle(self, acceptor: AgentState, option: Option, explicit: bool) -> None:
        state = self.state
        neg = state.open
        if neg is None or neg.option != option:
            raise ProtocolError(f"{acceptor.id} accepted {option} which is not open")
        intention = Intend(option.act)
        self._commit(acceptor, intention)
        self.plan.steps.append(
            PlanStep(
                option.act,
                explicit=explicit,
                warrant_a=self.a.warrant_used.get(option.act),
                warrant_b=self.b.warrant_used.get(option.act),
            )
        )
        if neg.rival is not None:
            state.banned.add(neg.rival.act)
        state.open = None
        state.accepted_in_room += 1
        state.last_settled = option.act
        self._pending = (intention, explicit)

    def _next_proposal(self, agent: AgentState) -> list[UtteranceAct]:
        state = self.state
        hearer = self.other(agent)
        if state.accepted_in_room >= STEPS_PER_ROOM:
            state.advance_room()
        if state.ended:
            return []
        options = agent.means_end_reason(state.room, exclude=state.banned)
        if not options:
            room = state.room
            state.advance_room()
            return [UtteranceAct(ActKind.CLOSE, agent.id, hearer.id, DesignRoom(room))]
        ranked = agent.deliberate(options)
        acts = expand_proposal(agent, ranked[0], hearer.id, self.variant)
        state.open = Negotiation(ranked[0].option, agent.id)
        return acts

    def rehearse(self, agent: AgentState, acts: list[UtteranceAct]) -> None:
        """Speakers store what they just said."""
        for act in acts:
            if act.kind is ActKind.SAY:
                agent.store(act.content)
            elif act.kind is ActKind.REJECT_BELIEF:
                agent.store(act.content.belief)
            elif act.kind in (ActKind.PROPOSE, ActKind.REJECT_OPTION) and self.params.rehearse_preconditions:
                put = act.content.act
                agent.store(Has(put.actor, put.item))

    # -- driver ----------------------------------------------------------
    def run(self, expected: Transcript | None = None) -> DialogueResult:
        speaker, incoming = self.a, []
        flagged, reason = False, ""
        try:
            while True:
                replies = self.absorb(speaker, incoming) if incoming else []
                acts = self.compose(speaker, replies)
                if not acts:
                    break
                sent = self.transcript.append_turn(speaker.id, acts)
                if expected is not None:
                    self._check_replay(expected, len(self.transcript.turns) - 1)
                speaker.message_count += len(sent)
                self.rehearse(speaker, sent)
                if len(self.transcript) > self.params.act_cap:
                    raise ActCapExceeded(f"dialogue exceeded {self.params.act_cap} acts")
                speaker, incoming = self.other(speaker), sent
                if self.state.ended:
                    self.absorb(speaker, incoming)
                    break
        except (ActCapExceeded, ProtocolError) as exc:
            flagged, reason = True, str(exc)
        if expected is not None and not flagged and len(expected.turns) != len(self.transcript.turns):
            raise ReplayMismatch("replayed dialogue has a different number of turns")
        self.plan.mp_inferences_a = set(self.a.mp_inferences)
        self.plan.mp_inferences_b = set(self.b.mp_inferences)
        return DialogueResult(self.transcript, self.plan, self.counters(), flagged, reason)

    def _check_replay(self, expected: Transcript, index: int) -> None:
        got = self.transcript.turns[index]
        if index >= len(expected.turns):
            raise ReplayMismatch(f"replay produced extra turn {index}")
        want = expected.turns[index]
        if [a.unnumbered() for a in got.acts] != [a.unnumbered() for a in want.acts]:
            raise ReplayMismatch(f"turn {index} diverged during replay")

    def counters(self) -> EffortCounters:
        return EffortCounters(
            messages=self.a.message_count + self.b.message_count,
            inferences=self.a.inference_count + self.b.inference_count,
            retrievals=self.a.memory.probes + self.b.memory.probes,
        )


def run_dialogue(
    agent_a: AgentState,
    agent_b: AgentState,
    task: TaskKind = TaskKind.STANDARD,
    params: ModelParams | None = None,
    expected: Transcript | None = None,
) -> DialogueResult:
    return Dialogue(agent_a, agent_b, task, params).run(expected)


def check_conformance(transcript: Transcript, partial: bool = False) -> list[str]:
    """List schema violations; ``partial`` allows an unresolved proposal at the end."""
    problems: list[str] = []
    open_: tuple[PutAct, str] | None = None
    room_index, accepted = 0, 0
    last_settled: PutAct | None = None
    finished_turn: int | None = None
    prev_speaker = None
    participants: set[str] = set()

    def settle() -> None:
        nonlocal open_, accepted, last_settled
        last_settled, open_ = open_[0], None
        accepted += 1

    def roll() -> bool:
        """Move past a complete room; False once both rooms are done."""
        nonlocal room_index, accepted
        if accepted >= STEPS_PER_ROOM:
            room_index, accepted = room_index + 1, 0
        return room_index < len(ROOMS)

    for t_index, turn in enumerate(transcript.turns):
        if turn.speaker == prev_speaker:
            problems.append(f"turn {t_index}: {turn.speaker} speaks twice in a row")
        prev_speaker = turn.speaker
        for act in turn.acts:
            seq, kind = act.seq, act.kind
            participants.update((act.speaker, act.hearer))
            if act.speaker != turn.speaker:
                problems.append(f"act {seq}: speaker {act.speaker} inside a turn by {turn.speaker}")
            if len(participants) > 2:
                problems.append(f"act {seq}: more than two participants")
            if finished_turn is not None:
                trailing = kind is ActKind.SAY or (
                    kind is ActKind.CLOSE and isinstance(act.content, Intend) and act.content.act == last_settled
                )
                if finished_turn != t_index or not trailing:
                    problems.append(f"act {seq}: {kind.value} after the dialogue ended")
                continue
            if kind in (ActKind.ACCEPT, ActKind.REJECT_OPTION, ActKind.REJECT_BELIEF):
                if open_ is None:
                    problems.append(f"act {seq}: {kind.value} with no open proposal")
                    continue
                if open_[1] == act.speaker:
                    problems.append(f"act {seq}: {act.speaker} answers its own proposal")
                    continue
                if kind is ActKind.ACCEPT:
                    if act.content.act != open_[0]:
                        problems.append(f"act {seq}: accept does not match the open proposal")
                    settle()
                elif kind is ActKind.REJECT_BELIEF:
                    open_ = None
                else:
                    if act.content.act.room != open_[0].room:
                        problems.append(f"act {seq}: counter-proposal for another room")
                    open_ = (act.content.act, act.speaker)
            elif kind is ActKind.PROPOSE:
                if open_ is not None:
                    if open_[1] == act.speaker:
                        problems.append(f"act {seq}: second proposal while one is open")
                    else:
                        settle()
                if not roll():
                    problems.append(f"act {seq}: proposal after both rooms were complete")
                    finished_turn = t_index
                    continue
                target = act.content.act.room
                if target != ROOMS[room_index]:
                    problems.append(f"act {seq}: proposal for {target} while designing {ROOMS[room_index]}")
                open_ = (act.content.act, act.speaker)
            elif kind is ActKind.CLOSE and isinstance(act.content, Intend):
                if open_ is not None and act.content.act == open_[0] and open_[1] != act.speaker:
                    settle()
                elif open_ is not None or act.content.act != last_settled:
                    problems.append(f"act {seq}: close of a segment that is not open")
            elif kind is ActKind.CLOSE:
                if open_ is not None:
                    problems.append(f"act {seq}: room closed with an unresolved proposal")
                    open_ = None
                if not roll():
                    problems.append(f"act {seq}: room closed after both rooms were complete")
                elif act.content.room != ROOMS[room_index]:
                    problems.append(f"act {seq}: close of {act.content.room} while designing {ROOMS[room_index]}")
                room_index, accepted = room_index + 1, 0
            if room_index >= len(ROOMS) or (room_index == len(ROOMS) - 1 and accepted >= STEPS_PER_ROOM):
                finished_turn = t_index
    if open_ is not None and not partial:
        problems.append("dialogue ended with an unresolved proposal")
    return problems
