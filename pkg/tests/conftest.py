import itertools

import numpy as np
import pytest

from mrfmoves.energy import Instance
from mrfmoves.generators import potts_table


def two_node(u1, u2, table):
    return Instance([u1, u2], [[0, 1]], [table])


@pytest.fixture
def inst_a():
    """2 nodes, 2 states, unaries (0,2) and (3,0), Potts weight 1."""
    return two_node([0, 2], [3, 0], potts_table(2))


@pytest.fixture
def inst_b():
    """Swap reaches (2,1) from (1,2); no single expansion does."""
    return two_node([1, 0], [0, 1], np.zeros((2, 2)))


@pytest.fixture
def inst_c():
    """Three nodes, no edges; optimum (2,1,1) one exp-shrink away from (1,2,3)."""
    return Instance([[5, 0, 5], [0, 5, 5], [0, 5, 5]])


@pytest.fixture
def inst_d():
    """Optimum (1,1,1) one expansion away from (1,2,3); swaps change two labels at most."""
    return Instance([[0, 5, 5], [0, 5, 5], [0, 5, 5]])


@pytest.fixture
def inst_joint():
    """From (1,1) the optimum (2,2) needs both nodes to move at once."""
    return two_node([0, 0], [0, 0], [[1, 5], [5, 0]])


@pytest.fixture
def triangle_violation_table():
    t = np.ones((3, 3)) - np.eye(3)
    t[0, 1] = 5
    return t


def brute_binary(bp):
    """Every binary labeling with its energy, in lexicographic order."""
    return [(y, bp.energy(y)) for y in itertools.product((0, 1), repeat=bp.num_nodes)]


ACCEPTANCE: dict[str, str] = {}


def record(key: str, ok: bool, detail: str) -> bool:
    """Remember one acceptance outcome for the end-of-run summary."""
    ACCEPTANCE[key] = f"{'PASS' if ok else 'FAIL'}  {key}: {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
