import math
from pathlib import Path

import pytest

from wpgeom import corpus

MODELS = Path(__file__).resolve().parent.parent / "models"
TAU_I = math.exp(-2 * math.pi)  # z with tau = i for the elliptic model


@pytest.fixture(scope="session")
def elliptic():
    return corpus.elliptic_model()


@pytest.fixture(scope="session")
def constant():
    return corpus.constant_model()


@pytest.fixture(scope="session")
def weight3():
    return corpus.weight_three_model()


@pytest.fixture(scope="session")
def product():
    return corpus.product_model()


@pytest.fixture(scope="session")
def locus():
    return corpus.locus_model()


@pytest.fixture(scope="session")
def models_dir():
    return MODELS


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
