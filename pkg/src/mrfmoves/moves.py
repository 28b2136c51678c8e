"""Move spaces and their optimal moves.

Four move families act on a labeling ``x``:

* :class:`ICM` ``(j)``: node ``j`` takes any state.
* :class:`Swap` ``(alpha, beta)``: nodes in ``{alpha, beta}`` exchange between them.
* :class:`Expansion` ``(alpha)``: any node may switch to ``alpha``.
* :class:`ExpShrink` ``(alpha, beta)``: any node may switch to ``alpha`` and
  nodes currently at ``alpha`` may switch to ``beta``.

The three binary families reduce to a :class:`~mrfmoves.mincut.BinaryProblem`.
Option 1 is always the "alpha-side" choice (``alpha`` for Expansion and
ExpShrink, ``beta`` for Swap) so that every triangle-satisfying table yields
a submodular binary edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .energy import EPS, Instance, InvalidInputError, total_energy
from .mincut import BinaryProblem, SubmodularityError, solve_binary


@dataclass(frozen=True)
class ICM:
    node: int

    def __str__(self):
        return f"ICM({self.node})"


@dataclass(frozen=True)
class Swap:
    alpha: int
    beta: int

    def __str__(self):
        return f"Swap({self.alpha},{self.beta})"


@dataclass(frozen=True)
class Expansion:
    alpha: int

    def __str__(self):
        return f"Expansion({self.alpha})"


@dataclass(frozen=True)
class ExpShrink:
    alpha: int
    beta: int

    def __str__(self):
        return f"ExpShrink({self.alpha},{self.beta})"


MoveSpec = Union[ICM, Swap, Expansion, ExpShrink]


class Subproblem(NamedTuple):
    """A binary problem over ``nodes`` plus how to map options back to states."""

    problem: BinaryProblem
    nodes: np.ndarray
    options: np.ndarray
    """``(len(nodes), 2)`` states chosen by option 0 and option 1."""
    edge_ids: np.ndarray
    """Original edge id of each binary edge."""
    base: np.ndarray

    def labeling(self, option_vector) -> np.ndarray:
        y = self.base.copy()
        opt = np.asarray(option_vector, dtype=np.int64)
        y[self.nodes] = self.options[np.arange(len(self.nodes)), opt]
        return y


class MoveResult(NamedTuple):
    y: tuple[int, ...]
    energy: float
    changed: bool
    truncated: bool = False


def validate_spec(spec: MoveSpec, inst: Instance) -> None:
    k = inst.num_states

    def state(v):
        if not 0 <= v < k:
            raise InvalidInputError(f"state {v} out of range in {spec}")

    if isinstance(spec, ICM):
        if not 0 <= spec.node < inst.num_nodes:
            raise InvalidInputError(f"node {spec.node} out of range in {spec}")
    elif isinstance(spec, Swap):
        state(spec.alpha)
        state(spec.beta)
        if spec.alpha == spec.beta:
            raise InvalidInputError(f"{spec} needs two distinct states")
    elif isinstance(spec, Expansion):
        state(spec.alpha)
    elif isinstance(spec, ExpShrink):
        state(spec.alpha)
        state(spec.beta)
    else:
        raise InvalidInputError(f"unknown move spec {spec!r}")


def move_options(inst: Instance, x: np.ndarray, spec: MoveSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-node ``(option 0, option 1)`` states and the mask of free nodes."""
    opts = np.stack([x, x], axis=1)
    if isinstance(spec, Swap):
        free = (x == spec.alpha) | (x == spec.beta)
        opts[free] = (spec.alpha, spec.beta)
    elif isinstance(spec, Expansion):
        free = x != spec.alpha
        opts[free, 1] = spec.alpha
    elif isinstance(spec, ExpShrink):
        free = np.ones(len(x), dtype=bool)
        opts[x == spec.alpha, 0] = spec.beta
        opts[:, 1] = spec.alpha
    else:
        raise InvalidInputError(f"{spec} is not a binary move")
    return opts, free


def move_space_size(spec: MoveSpec, x, inst: Instance) -> int:
    """Number of distinct labelings reachable by one move of ``spec``."""
    x = inst.check_labeling(x)
    validate_spec(spec, inst)
    if isinstance(spec, ICM):
        return inst.num_states
    opts, free = move_options(inst, x, spec)
    return 2 ** int(np.count_nonzero(free & (opts[:, 0] != opts[:, 1])))


def build_subproblem(inst: Instance, x, spec: MoveSpec, tables: np.ndarray | None = None) -> Subproblem:
    """Binary problem whose energy equals the total energy of the mapped labeling.

    Swap and Expansion moves work on the subgraph induced by the free nodes;
    edges to fixed nodes are folded into the unaries and edges among fixed
    nodes into the constant. ExpShrink moves use every node and every edge.
    ``tables`` replaces the instance's pairwise tables (used for truncation).
    """
    x = inst.check_labeling(x)
    validate_spec(spec, inst)
    T = inst.tables if tables is None else tables
    opts, free = move_options(inst, x, spec)
    nodes = np.flatnonzero(free)
    pos = np.full(inst.num_nodes, -1, dtype=np.int64)
    pos[nodes] = np.arange(len(nodes))

    unary = inst.unaries[nodes[:, None], opts[nodes]]
    constant = float(inst.unaries[~free, x[~free]].sum())

    ei, ej = inst.edge_index[:, 0], inst.edge_index[:, 1]
    eids = np.arange(inst.num_edges)
    fi, fj = free[ei], free[ej]

    both = eids[fi & fj]
    bin_tables = T[both[:, None, None], opts[ei[both]][:, :, None], opts[ej[both]][:, None, :]]
    edge_index = np.stack([pos[ei[both]], pos[ej[both]]], axis=1)

    only_i = eids[fi & ~fj]
    np.add.at(unary, pos[ei[only_i]], T[only_i[:, None], opts[ei[only_i]], x[ej[only_i]][:, None]])
    only_j = eids[~fi & fj]
    np.add.at(unary, pos[ej[only_j]], T[only_j[:, None], x[ei[only_j]][:, None], opts[ej[only_j]]])
    neither = eids[~fi & ~fj]
    constant += float(T[neither, x[ei[neither]], x[ej[neither]]].sum())

    bp = BinaryProblem(unary, edge_index, bin_tables, constant)
    return Subproblem(bp, nodes, opts[nodes], both, x)


def truncate(inst: Instance, x, spec: Expansion | ExpShrink, eps: float = EPS) -> np.ndarray:
    """Pairwise tables modified so the move's binary edges are all submodular.

    For each edge the change depends on whether its endpoints are at ``alpha``:

    * neither: ``E(xi,xj) <- min(E(xi,xj), E(a,xj) + E(xi,a) - E(a,a))``
    * both:    ``E(a,a)   <- min(E(a,a), E(a,b) + E(b,a) - E(b,b))``
    * j only:  ``E(a,b)   <- max(E(a,b), E(a,a) + E(xi,b) - E(xi,a))``
    * i only:  ``E(b,a)   <- max(E(b,a), E(a,a) + E(b,xj) - E(a,xj))``

    Entries move only when the change exceeds ``eps``; a table meeting the
    triangle condition comes back bit-for-bit unchanged. Any move that does not
    increase the modified energy does not increase the original one. Expansion
    moves only use the first case. Returns a new ``(num_edges, N, N)`` array.
    """
    x = inst.check_labeling(x)
    validate_spec(spec, inst)
    if not isinstance(spec, (Expansion, ExpShrink)):
        raise InvalidInputError(f"truncation applies to Expansion and ExpShrink moves, not {spec}")
    a = spec.alpha
    b = spec.beta if isinstance(spec, ExpShrink) else a
    T = inst.tables.copy()
    src = inst.tables
    ei, ej = inst.edge_index[:, 0], inst.edge_index[:, 1]
    xi, xj = x[ei], x[ej]
    ai, aj = xi == a, xj == a

    def lower(e, r, c, bound):
        cur = src[e, r, c]
        hit = bound < cur - eps
        T[e[hit], r[hit], c[hit]] = bound[hit]

    def raise_(e, r, c, bound):
        cur = src[e, r, c]
        hit = bound > cur + eps
        T[e[hit], r[hit], c[hit]] = bound[hit]

    e = np.flatnonzero(~ai & ~aj)
    r, c = xi[e], xj[e]
    lower(e, r, c, src[e, a, c] + src[e, r, a] - src[e, a, a])
    if isinstance(spec, ExpShrink) and b != a:
        e = np.flatnonzero(ai & aj)
        ones = np.ones(len(e), dtype=np.int64)
        lower(e, a * ones, a * ones, src[e, a, b] + src[e, b, a] - src[e, b, b])
        e = np.flatnonzero(~ai & aj)
        ones = np.ones(len(e), dtype=np.int64)
        r = xi[e]
        raise_(e, a * ones, b * ones, src[e, a, a] + src[e, r, b] - src[e, r, a])
        e = np.flatnonzero(ai & ~aj)
        ones = np.ones(len(e), dtype=np.int64)
        c = xj[e]
        raise_(e, b * ones, a * ones, src[e, a, a] + src[e, b, c] - src[e, a, c])
    return T


def _violated_condition(inst: Instance, x: np.ndarray, spec: MoveSpec, e: int) -> str:
    i, j = (int(v) for v in inst.edge_index[e])
    if isinstance(spec, Swap):
        return f"edge ({i}, {j}) fails pairwise submodularity for states ({spec.alpha}, {spec.beta})"
    a = spec.alpha
    b = spec.beta if isinstance(spec, ExpShrink) else a
    g1 = b if x[i] == a else int(x[i])
    g2 = b if x[j] == a else int(x[j])
    return f"edge ({i}, {j}) fails the triangle condition at (alpha={a}, g1={g1}, g2={g2})"


def _best_icm(inst: Instance, x: np.ndarray, node: int) -> np.ndarray:
    """Conditional energies of every state of ``node`` given all other nodes."""
    vals = inst.unaries[node].copy()
    for e, other, first in inst.incidence[node]:
        t = inst.tables[e]
        vals += t[:, x[other]] if first else t[x[other], :]
    return vals


def optimal_move(
    inst: Instance,
    x,
    spec: MoveSpec,
    allow_truncation: bool = False,
    eps: float = EPS,
) -> MoveResult:
    """Best labeling in the move space of ``spec`` around ``x``.

    Returns ``x`` itself (``changed=False``) unless the move lowers the energy
    by more than ``eps``. With ``allow_truncation`` Expansion and ExpShrink
    moves are solved on :func:`truncate`-modified tables; the result then
    never has higher energy than ``x`` but need not be the best in the space.

    Raises:
        SubmodularityError: a binary edge is not submodular and truncation
            is off (or the move is a Swap).
    """
    x = inst.check_labeling(x)
    validate_spec(spec, inst)
    current = total_energy(inst, x)

    if isinstance(spec, ICM):
        vals = _best_icm(inst, x, spec.node)
        best = int(np.argmin(vals))
        if vals[best] < vals[x[spec.node]] - eps:
            y = x.copy()
            y[spec.node] = best
            return MoveResult(tuple(y.tolist()), total_energy(inst, y), True)
        return MoveResult(tuple(x.tolist()), current, False)

    tables = None
    truncated = False
    if allow_truncation and isinstance(spec, (Expansion, ExpShrink)):
        tables = truncate(inst, x, spec, eps)
        truncated = not np.array_equal(tables, inst.tables)
        if not truncated:
            tables = None
    sub = build_subproblem(inst, x, spec, tables)
    try:
        sol = solve_binary(sub.problem, eps)
    except SubmodularityError as err:
        e = int(sub.edge_ids[err.edge])
        raise SubmodularityError(f"{spec}: {_violated_condition(inst, x, spec, e)}", edge=e) from err
    y = sub.labeling(sol.labeling)
    energy = total_energy(inst, y)
    if energy < current - eps:
        return MoveResult(tuple(y.tolist()), energy, True, truncated)
    return MoveResult(tuple(x.tolist()), current, False, truncated)
