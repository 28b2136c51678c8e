"""Pairwise discrete energies: the data model, evaluation and table conditions.

An energy over ``p`` nodes with ``N`` states each is

    E(x) = sum_i E_i(x_i) + sum_(i,j) E_ij(x_i, x_j)

States are 0-based throughout the library; the text formats in
:mod:`mrfmoves.io` use 1-based states.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EPS = 1e-9


class InvalidInputError(ValueError):
    """Raised when an instance, labeling or argument is malformed."""


class Edge(NamedTuple):
    i: int
    j: int
    table: np.ndarray


class TableCheck(NamedTuple):
    """Outcome of a table condition check.

    ``violation`` is the lexicographically first violating state tuple
    (0-based), or ``None`` when the condition holds.
    """

    holds: bool
    violation: tuple[int, ...] | None = None


@dataclass(frozen=True, eq=False)
class Instance:
    """A pairwise energy on an undirected graph.

    Args:
        unaries: ``(num_nodes, num_states)`` array of unary energies.
        edge_index: ``(num_edges, 2)`` integer array of node pairs with
            ``i < j``; no pair may appear twice.
        tables: ``(num_edges, num_states, num_states)`` array; ``tables[e][a, b]``
            is the energy of edge ``e`` with node ``i`` in state ``a`` and
            node ``j`` in state ``b``.

    The arrays are copied and frozen on construction.
    """

    unaries: np.ndarray
    edge_index: np.ndarray = field(default=None)
    tables: np.ndarray = field(default=None)

    def __post_init__(self):
        unaries = np.array(self.unaries, dtype=np.float64)
        if unaries.ndim != 2 or unaries.shape[0] < 1 or unaries.shape[1] < 1:
            raise InvalidInputError(
                f"unaries must be a non-empty (num_nodes, num_states) array, got shape {unaries.shape}"
            )
        n, k = unaries.shape
        edge_index = np.zeros((0, 2), dtype=np.int64) if self.edge_index is None else self.edge_index
        edge_index = np.array(edge_index, dtype=np.int64).reshape(-1, 2)
        tables = np.zeros((0, k, k)) if self.tables is None else self.tables
        tables = np.array(tables, dtype=np.float64)
        if tables.size == 0 and len(edge_index) == 0:
            tables = tables.reshape(0, k, k)
        if tables.shape != (len(edge_index), k, k):
            raise InvalidInputError(
                f"tables must have shape ({len(edge_index)}, {k}, {k}), got {tables.shape}"
            )
        if not np.all(np.isfinite(unaries)) or not np.all(np.isfinite(tables)):
            raise InvalidInputError("energies must be finite")
        if len(edge_index):
            i, j = edge_index[:, 0], edge_index[:, 1]
            bad = np.flatnonzero((i < 0) | (j >= n) | (i >= j))
            if len(bad):
                e = int(bad[0])
                raise InvalidInputError(
                    f"edge {e} = ({i[e]}, {j[e]}) must satisfy 0 <= i < j < {n}"
                )
            keys = i * n + j
            uniq, counts = np.unique(keys, return_counts=True)
            if np.any(counts > 1):
                dup = int(uniq[np.argmax(counts > 1)])
                raise InvalidInputError(f"duplicate edge ({dup // n}, {dup % n})")
        for arr in (unaries, edge_index, tables):
            arr.setflags(write=False)
        object.__setattr__(self, "unaries", unaries)
        object.__setattr__(self, "edge_index", edge_index)
        object.__setattr__(self, "tables", tables)

    @classmethod
    def from_edges(cls, unaries, edges: Iterable[tuple[int, int, Sequence]]) -> Instance:
        """Build an instance from ``(i, j, table)`` triples in any orientation.

        Tables given with ``i > j`` are transposed; repeated pairs are merged
        by summing their tables.
        """
        unaries = np.asarray(unaries, dtype=np.float64)
        k = unaries.shape[1]
        merged: dict[tuple[int, int], np.ndarray] = {}
        for i, j, table in edges:
            table = np.asarray(table, dtype=np.float64).reshape(k, k)
            if i > j:
                i, j, table = j, i, table.T
            if (i, j) in merged:
                merged[(i, j)] = merged[(i, j)] + table
            else:
                merged[(i, j)] = table.copy()
        keys = sorted(merged)
        return cls(
            unaries,
            np.array(keys, dtype=np.int64).reshape(-1, 2),
            np.array([merged[key] for key in keys]).reshape(len(keys), k, k),
        )

    @property
    def num_nodes(self) -> int:
        return self.unaries.shape[0]

    @property
    def num_states(self) -> int:
        return self.unaries.shape[1]

    @property
    def num_edges(self) -> int:
        return len(self.edge_index)

    @property
    def edges(self) -> list[Edge]:
        return [Edge(int(i), int(j), t) for (i, j), t in zip(self.edge_index, self.tables)]

    @cached_property
    def incidence(self) -> list[list[tuple[int, int, bool]]]:
        """Per node, ``(edge id, other endpoint, node is the first endpoint)``."""
        inc: list[list[tuple[int, int, bool]]] = [[] for _ in range(self.num_nodes)]
        for e, (i, j) in enumerate(self.edge_index.tolist()):
            inc[i].append((e, j, True))
            inc[j].append((e, i, False))
        return inc

    @cached_property
    def digest(self) -> str:
        """SHA-256 over the shapes and raw float64 contents."""
        h = hashlib.sha256()
        h.update(np.array([self.num_nodes, self.num_edges, self.num_states], dtype=np.int64).tobytes())
        h.update(self.unaries.tobytes())
        h.update(self.edge_index.tobytes())
        h.update(self.tables.tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.unaries.shape == other.unaries.shape
            and np.array_equal(self.unaries, other.unaries)
            and np.array_equal(self.edge_index, other.edge_index)
            and np.array_equal(self.tables, other.tables)
        )

    __hash__ = None

    def with_tables(self, tables: np.ndarray) -> Instance:
        return Instance(self.unaries, self.edge_index, tables)

    def check_labeling(self, x) -> np.ndarray:
        """Return ``x`` as an int array, raising if it is not a valid labeling."""
        arr = np.asarray(x)
        if arr.shape != (self.num_nodes,):
            raise InvalidInputError(
                f"labeling has shape {arr.shape}, expected ({self.num_nodes},)"
            )
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InvalidInputError("labeling entries must be integers")
        arr = arr.astype(np.int64)
        if arr.size and (arr.min() < 0 or arr.max() >= self.num_states):
            raise InvalidInputError(f"labeling entries must lie in [0, {self.num_states})")
        return arr


def total_energy(inst: Instance, x) -> float:
    """Energy of labeling ``x``, summed nodes first then edges, left to right."""
    x = inst.check_labeling(x)
    terms = np.concatenate(
        [
            inst.unaries[np.arange(inst.num_nodes), x],
            inst.tables[np.arange(inst.num_edges), x[inst.edge_index[:, 0]], x[inst.edge_index[:, 1]]],
        ]
    )
    return float(np.add.accumulate(terms)[-1])


def batch_energy(inst: Instance, labelings: np.ndarray) -> np.ndarray:
    """Energies of a ``(K, num_nodes)`` stack of labelings (no validation)."""
    Y = np.asarray(labelings, dtype=np.int64)
    out = inst.unaries[np.arange(inst.num_nodes), Y].sum(axis=1)
    if inst.num_edges:
        i, j = inst.edge_index[:, 0], inst.edge_index[:, 1]
        out = out + inst.tables[np.arange(inst.num_edges), Y[:, i], Y[:, j]].sum(axis=1)
    return out


def conditional_energy(inst: Instance, i: int, state: int, x, cond_set: Iterable[int]) -> float:
    """Unary energy of node ``i`` in ``state`` plus its edges into ``cond_set``.

    Neighbours in ``cond_set`` are held at their values in ``x``. Edges to
    nodes outside ``cond_set`` are ignored.
    """
    x = inst.check_labeling(x)
    cond = set(int(c) for c in cond_set)
    if not 0 <= i < inst.num_nodes:
        raise InvalidInputError(f"node {i} out of range")
    if i in cond:
        raise InvalidInputError(f"node {i} cannot be conditioned on itself")
    if any(c < 0 or c >= inst.num_nodes for c in cond):
        raise InvalidInputError("conditioning set contains an unknown node")
    if not 0 <= state < inst.num_states:
        raise InvalidInputError(f"state {state} out of range")
    value = float(inst.unaries[i, state])
    for e, other, first in inst.incidence[i]:
        if other in cond:
            t = inst.tables[e]
            value += float(t[state, x[other]] if first else t[x[other], state])
    return value


def _square(table) -> np.ndarray:
    t = np.asarray(table, dtype=np.float64)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise InvalidInputError(f"table must be square, got shape {t.shape}")
    return t


def check_pairwise_submodular(table, eps: float = EPS) -> TableCheck:
    """Check ``E(a,a) + E(b,b) <= E(b,a) + E(a,b)`` for every pair of states."""
    t = _square(table)
    d = np.diag(t)
    lhs = d[:, None] + d[None, :]
    rhs = t + t.T
    bad = np.argwhere(lhs > rhs + eps)
    if len(bad) == 0:
        return TableCheck(True)
    a, b = bad[0]
    return TableCheck(False, (int(a), int(b)))


def triangle_slack(table) -> np.ndarray:
    """``slack[a, g1, g2] = E(g1,a) + E(a,g2) - E(a,a) - E(g1,g2)``."""
    t = _square(table)
    d = np.diag(t)
    return t.T[:, :, None] + t[:, None, :] - d[:, None, None] - t[None, :, :]


def check_triangle(table, eps: float = EPS) -> TableCheck:
    """Check ``E(a,a) + E(g1,g2) <= E(g1,a) + E(a,g2)`` for all states.

    The reported violation is ``(a, g1, g2)``.
    """
    bad = np.argwhere(triangle_slack(table) < -eps)
    if len(bad) == 0:
        return TableCheck(True)
    return TableCheck(False, tuple(int(v) for v in bad[0]))


def instance_satisfies_triangle(inst: Instance, eps: float = EPS) -> bool:
    return all(check_triangle(t, eps).holds for t in inst.tables)
