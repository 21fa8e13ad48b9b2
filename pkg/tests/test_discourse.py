import itertools

import pytest

from conftest import make_agent
from designworld.acts import ActKind, Transcript, UtteranceAct
from designworld.agent import init_agent
from designworld.awm import AwmConfig
from designworld.discourse import (
    DialogueState,
    ModelParams,
    Negotiation,
    ReplayMismatch,
    check_conformance,
    infer_implicit_acceptance,
    legal_followups,
    process_incoming,
    run_dialogue,
)
from designworld.experiment import AGENT_NAMES, simulate
from designworld.propositions import DesignRoom, Has, HasNot, Intend, Option, PutAct, RejectReason, Score
from designworld.strategies import StrategyKind as K
from designworld.tasks import TaskKind
from designworld.textformat import TranscriptSyntaxError, format_transcript, parse_transcript

BILL, KIM = AGENT_NAMES
AI = (K.ALL_IMPLICIT, K.ALL_IMPLICIT)

GOLDEN = """\
;; BILL: First, put the green rug in the study.
(propose agent-bill agent-kim option-10: put-act (agent-bill green rug room-1))
;; KIM: Then, let's put the green lamp in the study.
(propose agent-kim agent-bill option-33: put-act (agent-kim green lamp room-1))
;; BILL: Then, let's put the green couch in the study.
(propose agent-bill agent-kim option-45: put-act (agent-bill green couch room-1))
;; KIM: No, instead let's put the purple couch in the study.
(reject agent-kim agent-bill option-56: put-act (agent-kim purple couch room-1))
(say agent-bill agent-kim bel-265: score (option-45: put-act (agent-bill green couch room-1) 56))
(reject agent-bill agent-kim option-56: put-act (agent-bill green couch room-1))
"""


def opt(actor, item, room="room-1"):
    return Option(PutAct(actor, item, room))


def act(kind, speaker, content):
    return UtteranceAct(kind, speaker, KIM if speaker == BILL else BILL, content)


def make_pair(radius, seed, pair=AI, scenario=None, order="shuffled"):
    from designworld.tasks import load_scenario

    s = scenario or load_scenario()
    return [
        init_agent(name, items, s.all_items, strat, AwmConfig(radius=radius, seed=f"{seed}/{name}"), order)
        for name, items, strat in zip(AGENT_NAMES, (s.items_a, s.items_b), pair)
    ]


# -- schema --------------------------------------------------------------------


def test_followups_with_open_proposal():
    state = DialogueState(open=Negotiation(opt(BILL, "green-rug"), BILL))
    assert {"accept", "reject-option", "propose"} <= legal_followups(state)
    assert "open" not in legal_followups(state)


def test_followups_between_proposals():
    assert {"open", "propose"} <= legal_followups(DialogueState())
    assert "accept" not in legal_followups(DialogueState())


def test_followups_after_the_end():
    assert legal_followups(DialogueState(ended=True)) == {"end"}


def test_implicit_acceptance():
    neg = Negotiation(opt(BILL, "green-rug"), BILL)
    nxt = [act(ActKind.PROPOSE, KIM, opt(KIM, "green-lamp"))]
    assert infer_implicit_acceptance(neg, nxt) == Intend(neg.option.act)
    rej = [act(ActKind.REJECT_OPTION, KIM, opt(KIM, "purple-couch"))]
    assert infer_implicit_acceptance(neg, rej) is None
    acc = [act(ActKind.ACCEPT, KIM, neg.option)]
    assert infer_implicit_acceptance(neg, acc) == Intend(neg.option.act)
    assert infer_implicit_acceptance(None, nxt) is None


# -- message processing --------------------------------------------------------


def test_say_is_stored_without_reply():
    bill = make_agent(BILL)
    assert process_incoming(bill, act(ActKind.SAY, KIM, Score("green-rug", 56)), DialogueState()) == []
    assert bill.memory.is_salient(Score("green-rug", 56), 0)


def test_better_own_option_gives_counter_proposal():
    bill = make_agent(BILL)
    bill.store(Has(BILL, "green-rug"))
    bill.store(Score("green-rug", 56))
    bill.store(Score("red-couch", 54))
    proposal = opt(KIM, "red-couch")
    state = DialogueState(open=Negotiation(proposal, KIM))
    (reply,) = process_incoming(bill, act(ActKind.PROPOSE, KIM, proposal), state)
    assert reply.kind is ActKind.REJECT_OPTION and reply.content == opt(BILL, "green-rug")


def test_no_better_option_means_accept():
    bill = make_agent(BILL)
    bill.store(Has(BILL, "red-table"))
    bill.store(Score("red-table", 52))
    bill.store(Score("green-lamp", 56))
    proposal = opt(KIM, "green-lamp")
    (reply,) = process_incoming(bill, act(ActKind.PROPOSE, KIM, proposal), DialogueState(open=Negotiation(proposal, KIM)))
    assert reply.kind is ActKind.ACCEPT


def test_used_item_is_rejected_with_belief():
    bill = make_agent(BILL)
    bill.store(HasNot(KIM, "green-lamp"))
    proposal = opt(KIM, "green-lamp")
    (reply,) = process_incoming(bill, act(ActKind.PROPOSE, KIM, proposal), DialogueState(open=Negotiation(proposal, KIM)))
    assert reply.kind is ActKind.REJECT_BELIEF
    assert reply.content == RejectReason(HasNot(KIM, "green-lamp"))


def test_rejected_proposer_restates_warrant():
    bill = make_agent(BILL)
    bill.store(Score("green-rug", 56))
    bill.store(Score("red-couch", 54))
    counter, own = opt(KIM, "red-couch"), opt(BILL, "green-rug")
    state = DialogueState(open=Negotiation(counter, KIM, depth=1, rival=own))
    replies = process_incoming(bill, act(ActKind.REJECT_OPTION, KIM, counter), state)
    assert [r.kind for r in replies] == [ActKind.SAY, ActKind.REJECT_OPTION]
    assert replies[0].content == Score("green-rug", 56)
    assert replies[1].content == own


def test_second_rejection_is_accepted():
    kim = make_agent(KIM)
    counter, own = opt(BILL, "green-rug"), opt(KIM, "red-couch")
    state = DialogueState(open=Negotiation(counter, BILL, depth=2, rival=own))
    (reply,) = process_incoming(kim, act(ActKind.REJECT_OPTION, BILL, counter), state)
    assert reply.kind is ActKind.ACCEPT and reply.content == counter


# -- whole dialogues -----------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_full_awm_dialogue_completes_the_plan(seed):
    a, b = make_pair(16, seed)
    res = run_dialogue(a, b)
    assert not res.flagged
    assert len(res.plan.steps) == 8
    assert check_conformance(res.transcript) == []


def test_agent_without_options_closes_the_room():
    a, b = make_agent(BILL), make_agent(KIM)
    res = run_dialogue(a, b)
    acts = res.transcript.acts
    assert [x.kind for x in acts] == [ActKind.CLOSE, ActKind.CLOSE]
    assert [x.content for x in acts] == [DesignRoom("room-1"), DesignRoom("room-2")]
    assert res.plan.steps == []
    assert check_conformance(res.transcript) == []


def test_partial_plans_are_possible():
    a, b = make_pair(3, 2)
    res = run_dialogue(a, b)
    assert len(res.plan.steps) < 8
    assert check_conformance(res.transcript) == []


def test_determinism():
    def once():
        r = run_dialogue(*make_pair(6, 42))
        return format_transcript(r.transcript), r.counters

    assert once() == once()


SETTINGS = [
    (TaskKind.STANDARD, AI),
    (TaskKind.STANDARD, (K.EXPLICIT_WARRANT,) * 2),
    (TaskKind.STANDARD, (K.ALL_IMPLICIT, K.CLOSE_CONSEQUENCE)),
    (TaskKind.MP_SAME_ROOM, (K.MPIE,) * 2),
    (TaskKind.MP_TWO_ROOM, (K.MPIE, K.ALL_IMPLICIT)),
]
CASES = [(task, pair, r, seed) for (task, pair), r, seed in itertools.product(SETTINGS, (3, 4, 6, 7, 11, 16), range(8))]


@pytest.mark.parametrize("task,pair,radius,seed", CASES)
def test_dialogue_invariants(task, pair, radius, seed, scenario):
    a, b = make_pair(radius, seed, pair)
    res = run_dialogue(a, b, task)
    # boundedness and conformance
    assert not res.flagged, res.reason
    assert len(res.transcript) <= ModelParams().act_cap
    assert check_conformance(res.transcript) == []
    # agreement
    assert [i.act for i in a.committed] == [i.act for i in b.committed] == res.plan.intentions
    # round trip, with and without glosses
    for gloss in (False, True):
        back = parse_transcript(format_transcript(res.transcript, gloss=gloss))
        assert back.turns == res.transcript.turns
    # replay against fresh agents reproduces the counters
    again = run_dialogue(*make_pair(radius, seed, pair), task, expected=res.transcript)
    assert again.counters == res.counters


def test_replay_detects_divergence():
    res = run_dialogue(*make_pair(6, 1))
    with pytest.raises(ReplayMismatch):
        run_dialogue(*make_pair(6, 2), expected=res.transcript)


def test_act_cap_flags_the_dialogue():
    res = run_dialogue(*make_pair(16, 0), params=ModelParams(act_cap=5))
    assert res.flagged and "exceeded" in res.reason
    assert check_conformance(res.transcript, partial=True) == []


def test_bounded_over_many_seeds(scenario):
    for seed in range(200):
        for radius in (3, 7, 16):
            res = simulate(scenario, TaskKind.STANDARD, AI, radius, seed)
            assert not res.flagged and len(res.transcript) <= 400


# -- conformance and transcript format ------------------------------------------


def test_golden_dialogue_conforms():
    t = parse_transcript(GOLDEN)
    assert len(t.acts) == 6
    assert [turn.speaker for turn in t.turns] == [BILL, KIM, BILL, KIM, BILL]
    assert t.acts[4].content == Score("green-couch", 56)
    assert check_conformance(t, partial=True) == []
    assert check_conformance(t) != []  # the last counter-proposal is still open


def _lines(*acts):
    return "\n".join(acts) + "\n"


def test_accept_without_proposal_is_a_violation():
    t = parse_transcript(_lines("(accept agent-kim agent-bill option-1: put-act (agent-bill green rug room-1))"))
    assert check_conformance(t)


def test_two_open_proposals_is_a_violation():
    t = parse_transcript(_lines(
        "(propose agent-bill agent-kim option-1: put-act (agent-bill green rug room-1))",
        "(propose agent-bill agent-kim option-2: put-act (agent-bill green couch room-1))",
    ))
    assert check_conformance(t, partial=True)


def test_answering_own_proposal_is_a_violation():
    t = parse_transcript(_lines(
        "(propose agent-bill agent-kim option-1: put-act (agent-bill green rug room-1))",
        "(accept agent-bill agent-kim option-1: put-act (agent-bill green rug room-1))",
    ))
    assert check_conformance(t)


def test_gloss_matches_dialogue_style():
    res = run_dialogue(*make_pair(16, 0))
    text = format_transcript(res.transcript, gloss=True)
    assert ";; BILL: First, put the " in text
    assert "Then, let's put the " in text
    assert all(line.startswith((";;", "(")) for line in text.splitlines())


def test_wildcards_and_reject_wording_round_trip():
    t = Transcript()
    t.append_turn(BILL, [act(ActKind.ASK, BILL, Score("green-rug", None))])
    t.append_turn(KIM, [act(ActKind.REJECT_BELIEF, KIM, RejectReason(HasNot(BILL, "green-rug")))])
    text = format_transcript(t)
    assert "(ask agent-bill agent-kim bel-1: score (green rug ?))" in text
    assert "(reject agent-kim agent-bill bel-2: hasn't (agent-bill green rug))" in text
    assert parse_transcript(text).turns == t.turns


@pytest.mark.parametrize("bad", [
    "(propose agent-bill agent-kim option-1: put-act (agent-bill green rug room-1)",
    "(shout agent-bill agent-kim option-1: put-act (agent-bill green rug room-1))",
    "(say agent-bill agent-kim bel-1: score (green rug lots))",
    "(propose agent-bill agent-kim widget-1: put-act (agent-bill green rug room-1))",
])
def test_parse_errors_name_the_line(bad):
    with pytest.raises(TranscriptSyntaxError, match="line 2"):
        parse_transcript(";; comment\n" + bad + "\n")
