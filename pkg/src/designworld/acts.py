"""Utterance acts and the ordered dialogue record."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .propositions import DesignRoom, Intend, Option, Proposition, RejectReason, is_ground


class ActKind(str, enum.Enum):
    OPEN = "open"
    CLOSE = "close"
    PROPOSE = "propose"
    ACCEPT = "accept"
    REJECT_OPTION = "reject-option"
    REJECT_BELIEF = "reject-belief"
    ASK = "ask"
    SAY = "say"


class ActError(ValueError):
    pass


_CONTENT = {
    ActKind.OPEN: (Option, DesignRoom),
    ActKind.CLOSE: (Intend, DesignRoom),
    ActKind.PROPOSE: (Option,),
    ActKind.ACCEPT: (Option,),
    ActKind.REJECT_OPTION: (Option,),
    ActKind.REJECT_BELIEF: (RejectReason,),
}


@dataclass(frozen=True)
class UtteranceAct:
    kind: ActKind
    speaker: str
    hearer: str
    content: Proposition
    seq: int | None = None

    def __post_init__(self) -> None:
        if self.speaker == self.hearer:
            raise ActError(f"speaker and hearer are both {self.speaker}")
        allowed = _CONTENT.get(self.kind)
        if allowed is not None and not isinstance(self.content, allowed):
            raise ActError(f"{self.kind.value} cannot carry {type(self.content).__name__}")
        if self.kind is ActKind.SAY and not is_ground(self.content):
            raise ActError("say content must be fully instantiated")

    def numbered(self, seq: int) -> UtteranceAct:
        return UtteranceAct(self.kind, self.speaker, self.hearer, self.content, seq)

    def unnumbered(self) -> UtteranceAct:
        return UtteranceAct(self.kind, self.speaker, self.hearer, self.content)


@dataclass
class Turn:
    speaker: str
    acts: list[UtteranceAct] = field(default_factory=list)


@dataclass
class Transcript:
    turns: list[Turn] = field(default_factory=list)

    @property
    def acts(self) -> list[UtteranceAct]:
        return [a for t in self.turns for a in t.acts]

    def __len__(self) -> int:
        return sum(len(t.acts) for t in self.turns)

    def append_turn(self, speaker: str, acts: list[UtteranceAct]) -> list[UtteranceAct]:
        """Number ``acts`` consecutively and append them as one turn."""
        start = len(self) + 1
        numbered = [a.numbered(start + i) for i, a in enumerate(acts)]
        self.turns.append(Turn(speaker, numbered))
        return numbered
