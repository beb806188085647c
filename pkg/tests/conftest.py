import numpy as np
import pytest

from quotasim.population import Population

ACCEPTANCE_LINES: list[str] = []


def make_population(q, colors, shapes):
    """Hand-built population from explicit qualities and 'g'/'o', 's'/'c' codes."""
    is_green = np.array([c == "g" for c in colors])
    is_star = np.array([s == "s" for s in shapes])
    return Population(None, np.array(q, dtype=float), is_green, is_star)


@pytest.fixture
def ten():
    # ids:      0     1     2     3     4     5     6     7     8     9
    q = [0.10, 1.90, -0.40, 0.75, 2.30, -1.10, 0.05, 1.20, -0.20, 0.60]
    colors = "ggggoooooo"
    shapes = "sscsscsccs"
    return make_population(q, colors, shapes)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
