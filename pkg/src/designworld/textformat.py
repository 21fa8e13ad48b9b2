"""Plain-text transcript format, one act per line, with optional ``;;`` gloss lines.

    (propose agent-bill agent-kim option-10: put-act (agent-bill green rug room-1))
    (say agent-bill agent-kim bel-11: score (green couch 55))
"""

from __future__ import annotations

import re

from .acts import ActKind, Transcript, Turn, UtteranceAct
from .propositions import (
    DesignRoom,
    Has,
    HasNot,
    Intend,
    MatchedPair,
    Option,
    Proposition,
    PutAct,
    RejectReason,
    Score,
)

ROOM_NAMES = {"room-1": "study", "room-2": "living room"}
WILD = "?"


class TranscriptSyntaxError(ValueError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# -- printing ----------------------------------------------------------------


def _tok(value) -> str:
    return WILD if value is None else str(value)


def _item(name: str | None) -> str:
    if name is None:
        return f"{WILD} {WILD}"
    color, _, kind = name.partition("-")
    return f"{color} {kind}"


def _put(act: PutAct) -> str:
    return f"put-act ({_tok(act.actor)} {_item(act.item)} {_tok(act.room)})"


def _belief(prop: Proposition) -> str:
    if isinstance(prop, Score):
        return f"score ({_item(prop.item)} {_tok(prop.value)})"
    if isinstance(prop, Has):
        return f"has ({_tok(prop.agent)} {_item(prop.item)})"
    if isinstance(prop, HasNot):
        return f"hasn't ({_tok(prop.agent)} {_item(prop.item)})"
    if isinstance(prop, MatchedPair):
        return f"matched-pair ({_put(prop.first)} {_put(prop.second)})"
    raise TypeError(f"no surface form for {prop!r}")


def format_content(content: Proposition, seq: int) -> str:
    if isinstance(content, Option):
        return f"option-{seq}: {_put(content.act)}"
    if isinstance(content, Intend):
        return f"intended-{seq}: {_put(content.act)}"
    if isinstance(content, DesignRoom):
        return f"segment-{seq}: design-room ({content.room})"
    if isinstance(content, RejectReason):
        return f"bel-{seq}: {_belief(content.belief)}"
    return f"bel-{seq}: {_belief(content)}"


def format_act(act: UtteranceAct) -> str:
    word = "reject" if act.kind in (ActKind.REJECT_OPTION, ActKind.REJECT_BELIEF) else act.kind.value
    return f"({word} {act.speaker} {act.hearer} {format_content(act.content, act.seq or 0)})"


def _speaker_label(agent: str) -> str:
    return agent.removeprefix("agent-").upper()


def _gloss(act: UtteranceAct, first_in_room: bool, depth: int) -> str:
    c = act.content
    k = act.kind
    if isinstance(c, (Option, Intend)):
        what, where = _item(c.act.item), ROOM_NAMES.get(c.act.room, c.act.room)
    if k is ActKind.PROPOSE:
        lead = "First, put" if first_in_room else "Then, let's put"
        return f"{lead} the {what} in the {where}."
    if k is ActKind.ACCEPT:
        return f"OK, let's put the {what} in the {where}."
    if k is ActKind.REJECT_OPTION:
        if depth >= 2:
            return f"It is better to put the {what} in the {where}."
        return f"No, instead let's put the {what} in the {where}."
    if k is ActKind.REJECT_BELIEF:
        return f"No, we no longer have the {_item(c.belief.item)}."
    if k is ActKind.CLOSE and isinstance(c, Intend):
        return f"So, we've agreed to put the {what} in the {where}."
    if k is ActKind.CLOSE:
        return f"That's all for the {ROOM_NAMES.get(c.room, c.room)}."
    if k is ActKind.OPEN:
        return "Let's talk about that." if isinstance(c, Option) else f"Let's design the {ROOM_NAMES.get(c.room, c.room)}."
    if k is ActKind.ASK:
        return "What do you know about that?"
    if isinstance(c, Score):
        return f"Putting in the {_item(c.item)} is worth {c.value}."
    if isinstance(c, HasNot):
        return f"And we no longer have the {_item(c.item)}."
    if isinstance(c, Has):
        return f"We still have the {_item(c.item)}."
    if isinstance(c, Intend):
        return f"We agreed to put the {what} in the {where}."
    return "We have a matched pair."


def format_transcript(transcript: Transcript, gloss: bool = False) -> str:
    lines: list[str] = []
    room, depth = None, 0
    for act in transcript.acts:
        if gloss:
            first = False
            if act.kind is ActKind.PROPOSE:
                first = act.content.act.room != room
                room = act.content.act.room
                depth = 0
            elif act.kind is ActKind.REJECT_OPTION:
                depth += 1
            lines.append(f";; {_speaker_label(act.speaker)}: {_gloss(act, first, depth)}")
        lines.append(format_act(act))
    return "\n".join(lines) + ("\n" if lines else "")


# -- parsing -----------------------------------------------------------------

_ACT_RE = re.compile(r"^\((\S+)\s+(\S+)\s+(\S+)\s+([a-z]+)-(\d+):\s*(.*)\)$")
_KINDS = {k.value: k for k in ActKind}


class _Reader:
    """Tiny recursive-descent reader for the parenthesised content grammar."""

    def __init__(self, text: str, line_no: int):
        self.tokens = re.findall(r"\(|\)|[^\s()]+", text)
        self.pos = 0
        self.line_no = line_no

    def fail(self, msg: str):
        raise TranscriptSyntaxError(self.line_no, msg)

    def next(self) -> str:
        if self.pos >= len(self.tokens):
            self.fail("unexpected end of act")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            self.fail(f"expected {tok!r}, found {got!r}")

    def done(self) -> None:
        if self.pos != len(self.tokens):
            self.fail(f"trailing tokens: {' '.join(self.tokens[self.pos:])}")

    def value(self) -> str | None:
        tok = self.next()
        return None if tok == WILD else tok

    def item(self) -> str | None:
        color, kind = self.value(), self.value()
        if color is None and kind is None:
            return None
        if color is None or kind is None:
            self.fail("item needs both color and kind")
        return f"{color}-{kind}"

    def put(self) -> PutAct:
        self.expect("put-act")
        self.expect("(")
        actor = self.value()
        item = self.item()
        room = self.value()
        self.expect(")")
        return PutAct(actor, item, room)

    def belief(self) -> Proposition:
        head = self.next()
        self.expect("(")
        if head == "score":
            if self.tokens[self.pos].startswith("option-"):
                # long form: score (option-N: put-act (...) value)
                self.next()
                item = self.put().item
            else:
                item = self.item()
            raw = self.value()
            self.expect(")")
            try:
                return Score(item, None if raw is None else int(raw))
            except ValueError:
                self.fail(f"score value {raw!r} is not an integer")
        if head in ("has", "hasn't"):
            agent = self.value()
            item = self.item()
            self.expect(")")
            return (Has if head == "has" else HasNot)(agent, item)
        if head == "matched-pair":
            first, second = self.put(), self.put()
            self.expect(")")
            return MatchedPair(first, second)
        self.fail(f"unknown belief {head!r}")


def parse_act(line: str, line_no: int = 1, seq: int | None = None) -> UtteranceAct:
    m = _ACT_RE.match(line.strip())
    if not m:
        raise TranscriptSyntaxError(line_no, f"not an act: {line.strip()!r}")
    word, speaker, hearer, label, _num, body = m.groups()
    reader = _Reader(body, line_no)
    if label == "option":
        content: Proposition = Option(reader.put())
    elif label == "intended":
        content = Intend(reader.put())
    elif label == "segment":
        reader.expect("design-room")
        reader.expect("(")
        content = DesignRoom(reader.next())
        reader.expect(")")
    elif label == "bel":
        content = reader.belief()
    else:
        raise TranscriptSyntaxError(line_no, f"unknown content label {label!r}")
    reader.done()
    if word == "reject":
        if isinstance(content, Option):
            kind = ActKind.REJECT_OPTION
        else:
            kind, content = ActKind.REJECT_BELIEF, RejectReason(content)
    elif word in _KINDS and word not in ("reject-option", "reject-belief"):
        kind = _KINDS[word]
    else:
        raise TranscriptSyntaxError(line_no, f"unknown act {word!r}")
    try:
        return UtteranceAct(kind, speaker, hearer, content, seq)
    except ValueError as exc:
        raise TranscriptSyntaxError(line_no, str(exc)) from exc


def parse_transcript(text: str) -> Transcript:
    """Parse acts in order; consecutive acts by one speaker form a turn."""
    transcript = Transcript()
    seq = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(";;"):
            continue
        seq += 1
        act = parse_act(line, line_no, seq)
        turns = transcript.turns
        if turns and turns[-1].speaker == act.speaker:
            turns[-1].acts.append(act)
        else:
            turns.append(Turn(act.speaker, [act]))
    return transcript
