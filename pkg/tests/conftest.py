from fractions import Fraction
from importlib.resources import files

import pytest

from distcert.automata import parse_spec
from distcert.mdp import parse_mdp, parse_strategy
from distcert.region import parse_init_arg
from distcert.smt import solver_available

DATA = files("distcert") / "data"
GF_SPEC = 'G F "V1>=0.249"'
UNTIL_SPEC = '"V1>=0.249" U "V2>=0.25"'
THIRD = Fraction(1, 3)

needs_solver = pytest.mark.skipif(not solver_available(), reason="z3 not on PATH")


@pytest.fixture(scope="session")
def running():
    return parse_mdp((DATA / "running.mdp").read_text())


@pytest.fixture(scope="session")
def b_at_a(running):
    return parse_strategy((DATA / "running_b.strategy").read_text(), running)


@pytest.fixture(scope="session")
def a_at_a(running):
    return parse_strategy((DATA / "running_a.strategy").read_text(), running)


@pytest.fixture(scope="session")
def gf_nba():
    return parse_spec(GF_SPEC, 3)


@pytest.fixture(scope="session")
def until_nba():
    return parse_spec(UNTIL_SPEC, 3)


@pytest.fixture(scope="session")
def init_point():
    return parse_init_arg("point:1/3,1/3,1/3", 3)


# acceptance lines, printed once at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
