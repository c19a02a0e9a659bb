from fractions import Fraction

import pytest

from icleak.model import AdversarySpec, Distribution, Instance
from icleak.verify import load_fixture


@pytest.fixture
def three_message():
    return Instance.from_lists(2, [[], [3], [2]])


@pytest.fixture
def pair():
    return Instance.from_lists(2, [[2], [1]])


@pytest.fixture
def correlated():
    """Two correlated bits: P(00)=1/10, P(01)=1/5, P(10)=3/10, P(11)=2/5."""
    return Distribution.from_probs(2, (1, 2), [Fraction(1, 10), Fraction(1, 5), Fraction(3, 10), Fraction(2, 5)])


@pytest.fixture
def four_message():
    return load_fixture("four_message_biased.json")


@pytest.fixture
def nobody():
    return lambda n: AdversarySpec(n)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
