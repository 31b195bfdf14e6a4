import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from prefplan.improvement import build_improvement_mdp  # noqa: E402
from prefplan.scenarios import GridworldConfig, build_gridworld, build_toy_example  # noqa: E402

S0, S1, S2, S3, S4, S5 = range(6)
A, B, C = range(3)


@pytest.fixture(scope="session")
def toy():
    return build_toy_example()


@pytest.fixture(scope="session")
def toy_imdp(toy):
    return build_improvement_mdp(*toy)


@pytest.fixture(scope="session")
def gridworld():
    return build_gridworld(GridworldConfig.shipped_default())


@pytest.fixture(scope="session")
def grid_imdp(gridworld):
    mdp, objectives, prefs, _ = gridworld
    return build_improvement_mdp(mdp, objectives, prefs)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
