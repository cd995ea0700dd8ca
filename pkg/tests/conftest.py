import dataclasses

import pytest

from safe_containment import scenario as scenario_mod
from safe_containment import sim

# One PASS/FAIL verdict line per acceptance criterion, collected by the
# acceptance tests and echoed after capture ends so they always appear.
criterion_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in criterion_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def paper_scenario():
    return scenario_mod.load_scenario("paper_sec4")


@pytest.fixture(scope="session")
def paper_engine(paper_scenario):
    return sim.Engine(paper_scenario)


# Full-horizon runs are expensive (tens of seconds), so every test that
# needs a long trajectory shares these three.

@pytest.fixture(scope="session")
def saar_result(paper_scenario):
    return sim.run(paper_scenario)


@pytest.fixture(scope="session")
def conventional_result(paper_scenario):
    return sim.run(paper_scenario.with_mode("conventional"))


@pytest.fixture(scope="session")
def attack_free_result(paper_scenario):
    return sim.run(paper_scenario.attack_free())


@pytest.fixture(scope="session")
def short_horizon_scenario(paper_scenario):
    return dataclasses.replace(paper_scenario, horizon=0.5)
