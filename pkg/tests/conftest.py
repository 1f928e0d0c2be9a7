import numpy as np
import pytest

from ahlfors_lab import conformal, curves

ACCEPTANCE_LINES: list[str] = []


def _fit(c):
    return conformal.fit(c, anchor=complex(np.mean(c.points)))


@pytest.fixture(scope="session")
def corpus_curves():
    return {
        "circle": curves.circle(4096),
        "ellipse": curves.ellipse(4096, 1.2, 1.0),
        "square": curves.square(4096, 2.0),
        "perturbed_circle": curves.perturbed_circle(4096, 0.1, 5),
    }


@pytest.fixture(scope="session")
def corpus_maps(corpus_curves):
    return {name: _fit(c) for name, c in corpus_curves.items()}


@pytest.fixture(scope="session")
def snowflake4_map():
    return _fit(curves.snowflake(4, samples=3072))


@pytest.fixture(scope="session")
def ellipse_map(corpus_maps):
    return corpus_maps["ellipse"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
