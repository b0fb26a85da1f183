import numpy as np
import pytest

from dconvex.dag import build_dag, random_dag

FIG3_EDGES = [("a", "b"), ("b", "c"), ("f", "e"), ("f", "g"), ("e", "c"), ("c", "d"),
              ("c", "h"), ("g", "h")]
FIG2_EDGES = [("a", "b"), ("a", "c"), ("a", "d"), ("a", "e"), ("b", "d"), ("e", "g"),
              ("d", "f"), ("c", "f"), ("f", "h"), ("f", "i"), ("g", "i")]


@pytest.fixture
def fig3():
    return build_dag(FIG3_EDGES, nodes="abcdefgh")


@pytest.fixture
def fig2():
    return build_dag(FIG2_EDGES, nodes="abcdefghi")


@pytest.fixture
def chain():
    return build_dag([("a", "b"), ("b", "c")])


@pytest.fixture
def vstruct():
    return build_dag([("a", "c"), ("b", "c")], nodes="abc")


def random_dags(count, n_max, seed, n_min=1, p_range=(0.15, 0.6)):
    """Deterministic stream of small random DAGs of varying size and density."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(*p_range))
        yield random_dag(n, p, seed=[seed, i])


def vs(g, names):
    return g.vertex_set(names)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
