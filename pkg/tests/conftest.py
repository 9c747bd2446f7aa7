import random

import numpy as np
import pytest

WORKED_PENMAN = "(w / want-01 :ARG0 (c / child) :ARG1 (b / believe-01 :ARG0 (p / parent) :ARG1 c))"
WORKED_LABELS = (
    "<P0> want-01 :ARG0 <P1> child :ARG1 <P2> believe-01 <stop> "
    "<P2> :ARG0 <P3> parent :ARG1 <P1> <stop>"
)
WORKED_EDGES = {
    (0, 1), (0, 3), (0, 5), (1, 2), (1, 10), (3, 4), (3, 6), (4, 7),
    (4, 9), (4, 11), (6, 7), (6, 9), (6, 11), (7, 8), (9, 2), (9, 10),
}


def random_digraph(rng: np.random.Generator, n: int, p: float = 0.2):
    """Edges of a random simple digraph (self-loops excluded, both directions allowed)."""
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    return [tuple(map(int, e)) for e in np.argwhere(mask)]


@pytest.fixture
def worked_graph():
    from amrpe.amr import parse_penman

    return parse_penman(WORKED_PENMAN)


@pytest.fixture
def worked_seq(worked_graph):
    from amrpe.linearize import bfs_linearize

    return bfs_linearize(worked_graph, "worked")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def pyrng():
    return random.Random(1234)
