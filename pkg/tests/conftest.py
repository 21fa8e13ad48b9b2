import pytest

from designworld.awm import AwmConfig, new_store
from designworld.agent import AgentState
from designworld.strategies import StrategyKind
from designworld.tasks import load_scenario


@pytest.fixture(scope="session")
def scenario():
    return load_scenario()


def make_agent(agent_id="agent-bill", radius=16, strategy=StrategyKind.ALL_IMPLICIT, seed=0, scenario=None):
    """An agent with an empty memory, for hand-built belief states."""
    scenario = scenario or load_scenario()
    return AgentState(
        id=agent_id,
        memory=new_store(AwmConfig(radius=radius, seed=seed)),
        radius=radius,
        strategy=StrategyKind(strategy),
        catalog={it.name: it for it in scenario.all_items},
    )


CRITERIA_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for text in CRITERIA_LINES:
            terminalreporter.write_line(text)
