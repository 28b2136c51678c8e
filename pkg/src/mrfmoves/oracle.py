"""Brute-force reference solvers for small instances.

Everything here enumerates labelings explicitly, so it is only meant for
desk-sized problems. Ties are always broken towards the lexicographically
smallest labeling.
"""

from __future__ import annotations

import enum
from itertools import chain
from typing import Iterator, NamedTuple

import numpy as np

from .energy import EPS, Instance, batch_energy
from .moves import ICM, ExpShrink, Expansion, MoveSpec, Swap, move_options, validate_spec

DEFAULT_CAP = 10**7
_CHUNK = 1 << 16


class EnumerationCapError(RuntimeError):
    """The requested enumeration is larger than the configured cap."""


class MoveSet(enum.Enum):
    I = "I"
    S = "S"
    E = "E"
    G = "G"
    SE = "SE"


class Best(NamedTuple):
    y: tuple[int, ...]
    energy: float


class DominanceReport(NamedTuple):
    leq: bool
    strict: bool
    energy_a: float
    energy_b: float


def _lex_best(labelings: np.ndarray, energies: np.ndarray) -> tuple[np.ndarray, float]:
    m = energies.min()
    ties = labelings[energies == m]
    order = np.lexsort(ties.T[::-1])
    return ties[order[0]], float(m)


def brute_force_minimum(inst: Instance, cap: int = DEFAULT_CAP) -> Best:
    """Global minimiser by full enumeration of ``num_states ** num_nodes`` labelings."""
    n, k = inst.num_nodes, inst.num_states
    total = k**n
    if total > cap:
        raise EnumerationCapError(f"{k}^{n} = {total} labelings exceeds the cap of {cap}")
    radix = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_y, best_e = None, np.inf
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        Y = (idx[:, None] // radix[None, :]) % k
        en = batch_energy(inst, Y)
        i = int(np.argmin(en))
        # chunks come in lexicographic order, so the first strict improvement wins
        if en[i] < best_e:
            best_y, best_e = Y[i], float(en[i])
    return Best(tuple(int(v) for v in best_y), best_e)


def move_space_array(inst: Instance, x, spec: MoveSpec, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All distinct labelings in the move space, as a ``(K, num_nodes)`` array."""
    x = inst.check_labeling(x)
    validate_spec(spec, inst)
    if isinstance(spec, ICM):
        Y = np.repeat(x[None, :], inst.num_states, axis=0)
        Y[:, spec.node] = np.arange(inst.num_states)
        return Y
    opts, free = move_options(inst, x, spec)
    var = np.flatnonzero(free & (opts[:, 0] != opts[:, 1]))
    size = 2 ** len(var)
    if size > cap:
        raise EnumerationCapError(f"{spec} has {size} moves, over the cap of {cap}")
    bits = (np.arange(size)[:, None] >> np.arange(len(var) - 1, -1, -1)[None, :]) & 1
    Y = np.repeat(x[None, :], size, axis=0)
    Y[:, var] = opts[var][np.arange(len(var))[None, :], bits]
    return Y


def specs_for(move_set: MoveSet, inst: Instance) -> list[MoveSpec]:
    """Every parameter choice of a move family."""
    k = inst.num_states
    if move_set is MoveSet.I:
        return [ICM(j) for j in range(inst.num_nodes)]
    if move_set is MoveSet.S:
        return [Swap(a, b) for a in range(k) for b in range(a + 1, k)]
    if move_set is MoveSet.E:
        return [Expansion(a) for a in range(k)]
    if move_set is MoveSet.G:
        return [ExpShrink(a, b) for a in range(k) for b in range(k)]
    if move_set is MoveSet.SE:
        return specs_for(MoveSet.S, inst) + specs_for(MoveSet.E, inst)
    raise ValueError(f"unknown move set {move_set!r}")


def enumerate_moves(what: MoveSpec | MoveSet, x, inst: Instance, cap: int = DEFAULT_CAP) -> Iterator[tuple[int, ...]]:
    """Yield the labelings of a move space.

    A single :data:`~mrfmoves.moves.MoveSpec` yields each element once; a
    :class:`MoveSet` yields the union over its parameters, possibly with
    repeats.
    """
    specs = specs_for(what, inst) if isinstance(what, MoveSet) else [what]
    arrays = [move_space_array(inst, x, s, cap) for s in specs]
    for row in chain.from_iterable(arrays):
        yield tuple(int(v) for v in row)


def best_in_move_space(inst: Instance, x, spec: MoveSpec, cap: int = DEFAULT_CAP) -> Best:
    Y = move_space_array(inst, x, spec, cap)
    y, e = _lex_best(Y, batch_energy(inst, Y))
    return Best(tuple(int(v) for v in y), e)


def best_in_move_set(inst: Instance, x, move_set: MoveSet, cap: int = DEFAULT_CAP) -> Best:
    """Exact minimum over the union of a family's move spaces.

    The current labeling always belongs to the union, even when the family
    has no parameters (for example swaps with a single state).
    """
    x = inst.check_labeling(x)
    arrays = [x[None, :]] + [move_space_array(inst, x, s, cap) for s in specs_for(move_set, inst)]
    Y = np.concatenate(arrays)
    y, e = _lex_best(Y, batch_energy(inst, Y))
    return Best(tuple(int(v) for v in y), e)


def dominance_report(inst: Instance, x, a: MoveSet, b: MoveSet, eps: float = EPS, cap: int = DEFAULT_CAP) -> DominanceReport:
    """Compare the best moves of two families from the same labeling."""
    ea = best_in_move_set(inst, x, a, cap).energy
    eb = best_in_move_set(inst, x, b, cap).energy
    return DominanceReport(ea <= eb + eps, ea < eb - eps, ea, eb)
