import pytest

from conftest import make_agent
from designworld.acts import ActKind
from designworld.agent import RankedOption
from designworld.propositions import HasNot, Intend, Option, PutAct, Score
from designworld.strategies import (
    StrategyError,
    StrategyKind,
    expand_closing,
    expand_proposal,
    expand_rejection,
    validate_pair,
)

BILL, KIM = "agent-bill", "agent-kim"
RUG = Option(PutAct(BILL, "green-rug", "room-1"))


def kinds(acts):
    return [a.kind for a in acts]


def test_explicit_warrant_says_score_first():
    a = make_agent(strategy="explicit-warrant")
    acts = expand_proposal(a, RankedOption(RUG, 56), KIM)
    assert kinds(acts) == [ActKind.SAY, ActKind.PROPOSE]
    assert acts[0].content == Score("green-rug", 56)


def test_explicit_warrant_without_warrant_is_bare():
    a = make_agent(strategy="explicit-warrant")
    assert kinds(expand_proposal(a, RankedOption(RUG, None), KIM)) == [ActKind.PROPOSE]


@pytest.mark.parametrize("strategy", ["all-implicit", "close-consequence"])
def test_other_strategies_propose_bare(strategy):
    a = make_agent(strategy=strategy)
    acts = expand_proposal(a, RankedOption(RUG, 56), KIM)
    assert kinds(acts) == [ActKind.PROPOSE] and acts[0].content == RUG


def test_mpie_says_prior_intention():
    a = make_agent(strategy="mpie")
    prior = Intend(PutAct(KIM, "purple-couch", "room-1"))
    a.store(prior)
    opt = Option(PutAct(BILL, "purple-chair", "room-1"))
    acts = expand_proposal(a, RankedOption(opt, 54), KIM, variant="same-room")
    assert kinds(acts) == [ActKind.SAY, ActKind.PROPOSE]
    assert acts[0].content == prior


def test_mpie_without_partner_is_bare():
    a = make_agent(strategy="mpie")
    acts = expand_proposal(a, RankedOption(RUG, 56), KIM, variant="same-room")
    assert kinds(acts) == [ActKind.PROPOSE]


def test_close_consequence_closing():
    a = make_agent(agent_id=KIM, strategy="close-consequence")
    i = Intend(PutAct(BILL, "green-rug", "room-1"))
    acts = expand_closing(a, i, BILL)
    assert kinds(acts) == [ActKind.CLOSE, ActKind.SAY]
    assert acts[0].content == i
    assert acts[1].content == HasNot(BILL, "green-rug")


def test_all_implicit_closing_is_silent():
    a = make_agent(strategy="all-implicit")
    assert expand_closing(a, Intend(RUG.act), KIM) == []


def test_close_consequence_needs_open_segment():
    a = make_agent(agent_id=KIM, strategy="close-consequence")
    with pytest.raises(StrategyError):
        expand_closing(a, Intend(RUG.act), BILL, segment_open=False)


def test_rejection_depths():
    a = make_agent()
    assert kinds(expand_rejection(a, RUG, KIM, 1)) == [ActKind.REJECT_OPTION]
    acts = expand_rejection(a, RUG, KIM, 2, warrant=56)
    assert kinds(acts) == [ActKind.SAY, ActKind.REJECT_OPTION]
    assert acts[0].content == Score("green-rug", 56)
    with pytest.raises(StrategyError):
        expand_rejection(a, RUG, KIM, 2)
    with pytest.raises(StrategyError):
        expand_rejection(a, RUG, KIM, 3, warrant=56)


def test_pair_validation():
    validate_pair("mpie", "all-implicit", matched_pair_task=True)
    with pytest.raises(StrategyError):
        validate_pair("mpie", "all-implicit", matched_pair_task=False)
    with pytest.raises(StrategyError):
        validate_pair("close-consequence", "close-consequence", matched_pair_task=False)
    assert StrategyKind("mpie").short == "MPIE"
