import numpy as np
import pytest

from kahlerprod import immersions, product

CPCP = "cp(1,c=0.0625)xcp(1,c=0.0625)"
EUCP = "eu(1)xcp(1,c=0.0625)"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cpcp():
    return product.parse_model(CPCP)


@pytest.fixture(scope="session")
def eucp():
    return product.parse_model(EUCP)


@pytest.fixture(scope="session")
def flat4():
    return product.parse_model("eu(1)xeu(1)")


@pytest.fixture(scope="session")
def e1():
    return immersions.flat_slice()


@pytest.fixture(scope="session")
def e2():
    return immersions.chart_sphere(r=0.5)


@pytest.fixture(scope="session")
def e3():
    return immersions.random_graph(seed=7, amp=0.1)


# -- acceptance criterion log, printed in the terminal summary ------------------------

_CRITERIA: dict[int, str] = {}


def format_criterion(number: int, passed: bool, detail: str) -> str:
    return f"criterion {number:>2}: {'PASS' if passed else 'FAIL'} | {detail}"


@pytest.fixture
def criterion():
    def record(number, passed, detail):
        line = format_criterion(number, passed, detail)
        _CRITERIA[number] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
