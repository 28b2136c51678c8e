import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrfmoves.energy import (
    Instance,
    InvalidInputError,
    batch_energy,
    check_pairwise_submodular,
    check_triangle,
    conditional_energy,
    total_energy,
)
from mrfmoves.generators import potts_table, random_small, truncated_linear_table


def test_zero_energy():
    inst = Instance(np.zeros((3, 2)), [[0, 1], [1, 2]], np.zeros((2, 2, 2)))
    for x in itertools.product(range(2), repeat=3):
        assert total_energy(inst, x) == 0


def test_instance_a_enumeration(inst_a):
    energies = {x: total_energy(inst_a, x) for x in itertools.product(range(2), repeat=2)}
    # hand expansion: E_1(x1) + E_2(x2) + [x1 != x2]
    assert energies == {(0, 0): 3, (0, 1): 1, (1, 0): 6, (1, 1): 2}


def test_total_energy_rejects_bad_labelings(inst_a):
    with pytest.raises(InvalidInputError):
        total_energy(inst_a, (0,))
    with pytest.raises(InvalidInputError):
        total_energy(inst_a, (0, 2))
    with pytest.raises(InvalidInputError):
        total_energy(inst_a, (0.5, 1))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(unaries=[[0, 0]], edge_index=[[0, 0]], tables=[np.zeros((2, 2))]),
        dict(unaries=[[0, 0], [0, 0]], edge_index=[[1, 0]], tables=[np.zeros((2, 2))]),
        dict(unaries=[[0, 0], [0, 0]], edge_index=[[0, 1], [0, 1]], tables=np.zeros((2, 2, 2))),
        dict(unaries=[[0, np.nan]]),
        dict(unaries=[[0, 0], [0, 0]], edge_index=[[0, 1]], tables=[np.zeros((3, 3))]),
    ],
)
def test_instance_invariants(kwargs):
    with pytest.raises(InvalidInputError):
        Instance(**kwargs)


def test_from_edges_merges_and_orients():
    t = np.array([[0.0, 1.0], [2.0, 3.0]])
    inst = Instance.from_edges(np.zeros((2, 2)), [(1, 0, t), (0, 1, t)])
    assert inst.num_edges == 1
    np.testing.assert_array_equal(inst.tables[0], t.T + t)


def test_instance_is_read_only(inst_a):
    with pytest.raises(ValueError):
        inst_a.unaries[0, 0] = 1.0


def test_conditional_energy_instance_a(inst_a):
    # node 2 given node 1 at state 1
    assert conditional_energy(inst_a, 1, 0, (0, 0), {0}) == 3
    assert conditional_energy(inst_a, 1, 1, (0, 0), {0}) == 1
    # the difference matches a difference of total energies
    assert total_energy(inst_a, (0, 0)) - total_energy(inst_a, (0, 1)) == 3 - 1


def test_conditional_energy_empty_set(inst_a):
    assert conditional_energy(inst_a, 0, 1, (0, 0), set()) == 2
    assert conditional_energy(inst_a, 1, 0, (1, 1), []) == 3


def test_conditional_energy_rejects_self(inst_a):
    with pytest.raises(InvalidInputError):
        conditional_energy(inst_a, 0, 0, (0, 0), {0})


def test_pairwise_submodular_examples():
    assert check_pairwise_submodular(potts_table(4)).holds
    res = check_pairwise_submodular([[1, 0], [0, 1]])
    assert not res.holds and res.violation == (0, 1)
    assert check_pairwise_submodular(truncated_linear_table(4, 1, 2)).holds


def test_pairwise_submodular_exhaustive_truncated_linear():
    t = truncated_linear_table(4, 1, 2)
    for a, b in itertools.product(range(4), repeat=2):
        assert t[a, a] + t[b, b] <= t[b, a] + t[a, b]


def test_triangle_examples(triangle_violation_table):
    assert check_triangle(potts_table(5)).holds
    res = check_triangle(triangle_violation_table)
    assert not res.holds
    assert res.violation == (2, 0, 1)
    a, g1, g2 = res.violation
    t = triangle_violation_table
    assert t[a, a] + t[g1, g2] == 5 and t[g1, a] + t[a, g2] == 2
    assert check_triangle([[7.0]]).holds


def test_triangle_violation_is_lexicographically_first(triangle_violation_table):
    t = triangle_violation_table
    first = None
    for a, g1, g2 in itertools.product(range(3), repeat=3):
        if t[a, a] + t[g1, g2] > t[g1, a] + t[a, g2]:
            first = (a, g1, g2)
            break
    assert check_triangle(t).violation == first


def test_checks_reject_non_square():
    with pytest.raises(InvalidInputError):
        check_triangle(np.zeros((2, 3)))


def test_batch_energy_matches_total(inst_a):
    Y = np.array(list(itertools.product(range(2), repeat=2)))
    np.testing.assert_array_equal(batch_energy(inst_a, Y), [total_energy(inst_a, y) for y in Y])


tables = st.integers(1, 4).flatmap(
    lambda k: st.lists(st.integers(-5, 10), min_size=k * k, max_size=k * k).map(
        lambda v: np.array(v, dtype=float).reshape(k, k)
    )
)


@given(tables)
def test_triangle_implies_pairwise_submodular(t):
    if check_triangle(t).holds:
        assert check_pairwise_submodular(t).holds


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_edge_order_invariance(seed, data):
    inst = random_small(seed, triangle=False)
    x = data.draw(st.lists(st.integers(0, inst.num_states - 1), min_size=inst.num_nodes, max_size=inst.num_nodes))
    perm = np.random.default_rng(seed).permutation(inst.num_edges)
    # Instance keeps edges in the order given, only the summation order changes
    shuffled = Instance(inst.unaries, inst.edge_index[perm], inst.tables[perm])
    assert abs(total_energy(inst, x) - total_energy(shuffled, x)) <= 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_conditional_energy_differences(seed, data):
    inst = random_small(seed, triangle=False)
    n, k = inst.num_nodes, inst.num_states
    x = list(data.draw(st.lists(st.integers(0, k - 1), min_size=n, max_size=n)))
    i = data.draw(st.integers(0, n - 1))
    rest = set(range(n)) - {i}
    for a, b in itertools.product(range(k), repeat=2):
        xa, xb = list(x), list(x)
        xa[i], xb[i] = a, b
        lhs = total_energy(inst, xa) - total_energy(inst, xb)
        rhs = conditional_energy(inst, i, a, x, rest) - conditional_energy(inst, i, b, x, rest)
        assert abs(lhs - rhs) <= 1e-9
