from fractions import Fraction

import pytest

from designworld.evaluation import (
    CostConfig,
    CostError,
    EffortCounters,
    collaborative_effort,
    evaluate,
    performance,
)


def test_effort_formula():
    c = EffortCounters(messages=20, inferences=30, retrievals=1000)
    assert collaborative_effort(c, CostConfig(1, 1, 0.01)) == 60


def test_thousandth_of_a_point_per_probe():
    c = EffortCounters(0, 0, 1000)
    assert collaborative_effort(c, CostConfig(0, 0, 0.001)) == 1


def test_free_processing():
    c = EffortCounters(123, 456, 789)
    assert collaborative_effort(c, CostConfig(0, 0, 0)) == 0
    assert performance(434, collaborative_effort(c, CostConfig(0, 0, 0))) == 434


def test_performance():
    assert performance(434, Fraction(60)) == 374
    assert performance(0, Fraction(5)) == -5


def test_costs_are_exact_and_validated():
    c = CostConfig(retcost=0.01)
    assert c.retcost == Fraction(1, 100)
    with pytest.raises(CostError):
        CostConfig(commcost=-1)


def test_evaluate_report():
    r = evaluate(434, EffortCounters(20, 30, 1000), CostConfig(1, 1, Fraction(1, 100)), config="abc")
    assert (r.quality, r.effort, r.performance) == (434, 60, 374)
    assert r.hashes == {"config": "abc"}
