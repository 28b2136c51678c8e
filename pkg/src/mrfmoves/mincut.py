"""Exact minimisation of binary submodular pairwise energies by s-t min-cut.

A :class:`BinaryProblem` is turned into a :class:`FlowNetwork` whose cut
capacities reproduce the energy up to a constant. :func:`max_flow` solves the
network with a search-tree augmenting path method (two trees grown from the
terminals, re-used between augmentations).

Option 0 of a node corresponds to the source side of the cut, option 1 to the
sink side.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .energy import EPS, InvalidInputError


class SubmodularityError(ValueError):
    """A binary edge table violates ``t00 + t11 <= t01 + t10``."""

    def __init__(self, message: str, edge: int | None = None):
        super().__init__(message)
        self.edge = edge


@dataclass(frozen=True, eq=False)
class BinaryProblem:
    """Energy over binary options: ``constant + sum unaries + sum edge tables``."""

    unaries: np.ndarray
    edge_index: np.ndarray = field(default=None)
    tables: np.ndarray = field(default=None)
    constant: float = 0.0

    def __post_init__(self):
        unaries = np.array(self.unaries, dtype=np.float64).reshape(-1, 2)
        edge_index = np.zeros((0, 2), np.int64) if self.edge_index is None else self.edge_index
        edge_index = np.array(edge_index, dtype=np.int64).reshape(-1, 2)
        tables = np.zeros((0, 2, 2)) if self.tables is None else self.tables
        tables = np.array(tables, dtype=np.float64).reshape(-1, 2, 2)
        if len(tables) != len(edge_index):
            raise InvalidInputError("one 2x2 table per edge is required")
        n = len(unaries)
        if len(edge_index) and (edge_index.min() < 0 or edge_index.max() >= n):
            raise InvalidInputError("edge endpoint out of range")
        if len(edge_index) and np.any(edge_index[:, 0] == edge_index[:, 1]):
            raise InvalidInputError("self-loop edge")
        if not (np.all(np.isfinite(unaries)) and np.all(np.isfinite(tables)) and np.isfinite(self.constant)):
            raise InvalidInputError("energies must be finite")
        object.__setattr__(self, "unaries", unaries)
        object.__setattr__(self, "edge_index", edge_index)
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "constant", float(self.constant))

    @property
    def num_nodes(self) -> int:
        return len(self.unaries)

    def energy(self, y) -> float:
        y = np.asarray(y, dtype=np.int64)
        value = self.constant + float(self.unaries[np.arange(self.num_nodes), y].sum())
        if len(self.edge_index):
            i, j = self.edge_index[:, 0], self.edge_index[:, 1]
            value += float(self.tables[np.arange(len(i)), y[i], y[j]].sum())
        return value

    def submodular_violations(self, eps: float = EPS) -> np.ndarray:
        t = self.tables
        return np.flatnonzero(t[:, 0, 0] + t[:, 1, 1] > t[:, 0, 1] + t[:, 1, 0] + eps)


@dataclass
class FlowNetwork:
    """Directed network; ``arcs`` holds ``(tail, head, capacity)`` triples."""

    num_nodes: int
    arcs: list[tuple[int, int, float]]
    source: int
    sink: int

    def cut_capacity(self, source_side) -> float:
        """Total capacity of arcs leaving the set flagged in ``source_side``."""
        side = np.asarray(source_side, dtype=bool)
        return float(sum(c for u, v, c in self.arcs if side[u] and not side[v]))


class MaxFlowResult(NamedTuple):
    flow_value: float
    source_side: np.ndarray
    """Nodes reachable from the source in the final residual graph."""
    sink_side: np.ndarray
    """Nodes that can reach the sink in the final residual graph."""


class BinarySolution(NamedTuple):
    labeling: np.ndarray
    energy: float


def decompose(bp: BinaryProblem, eps: float = EPS) -> tuple[FlowNetwork, float]:
    """Build a network whose cut of labeling ``y`` plus the constant is ``bp.energy(y)``.

    Nodes ``0..n-1`` are the variables, ``n`` the source and ``n+1`` the sink.
    """
    bad = bp.submodular_violations(eps)
    if len(bad):
        e = int(bad[0])
        i, j = bp.edge_index[e]
        t = bp.tables[e]
        raise SubmodularityError(
            f"binary edge {e} ({i}, {j}) is not submodular: "
            f"t00 + t11 = {t[0, 0] + t[1, 1]!r} > t01 + t10 = {t[0, 1] + t[1, 0]!r}",
            edge=e,
        )
    n = bp.num_nodes
    s, t_ = n, n + 1
    constant = bp.constant
    unary = bp.unaries.copy()
    arcs: list[tuple[int, int, float]] = []
    for (i, j), tab in zip(bp.edge_index.tolist(), bp.tables):
        t00, t01, t10, t11 = tab[0, 0], tab[0, 1], tab[1, 0], tab[1, 1]
        constant += t00
        unary[j, 1] += t01 - t00
        unary[i, 1] += t11 - t01
        c = max(t10 + t01 - t00 - t11, 0.0)
        if c > 0:
            # paid when i takes option 1 (sink side) and j option 0 (source side)
            arcs.append((j, i, c))
    for v in range(n):
        a0, a1 = unary[v]
        if a1 >= a0:
            constant += a0
            if a1 > a0:
                arcs.append((s, v, a1 - a0))
        else:
            constant += a1
            arcs.append((v, t_, a0 - a1))
    return FlowNetwork(n + 2, arcs, s, t_), float(constant)


_TERMINAL = -1
_ORPHAN = -2
_NONE = -3
_FREE, _S, _T = 0, 1, 2


def max_flow(net: FlowNetwork) -> MaxFlowResult:
    """Maximum s-t flow and the two extreme minimum cuts.

    Capacities below zero are clamped to zero.
    """
    n, s, t = net.num_nodes, net.source, net.sink
    if s == t:
        raise InvalidInputError("source and sink must differ")
    # terminal arcs live on the nodes: tr[v] > 0 is residual s->v, < 0 is v->t
    tr = [0.0] * n
    src_in = [0.0] * n
    snk_out = [0.0] * n
    head: list[int] = []
    cap: list[float] = []
    out: list[list[int]] = [[] for _ in range(n)]
    flow = 0.0
    for u, v, c in net.arcs:
        if c <= 0 or u == v or u == t or v == s:
            continue
        if u == s and v == t:
            flow += c
        elif u == s:
            src_in[v] += c
        elif v == t:
            snk_out[u] += c
        else:
            a = len(head)
            head.append(v)
            cap.append(float(c))
            out[u].append(a)
            head.append(u)
            cap.append(0.0)
            out[v].append(a + 1)
    # s->v->t paths through a single node saturate directly
    for v in range(n):
        flow += min(src_in[v], snk_out[v])
        tr[v] = src_in[v] - snk_out[v]

    tree = [_FREE] * n
    parent = [_NONE] * n
    active: deque[int] = deque()
    queued = [False] * n
    for v in range(n):
        if v == s or v == t:
            continue
        if tr[v] > 0:
            tree[v], parent[v] = _S, _TERMINAL
        elif tr[v] < 0:
            tree[v], parent[v] = _T, _TERMINAL
        else:
            continue
        active.append(v)
        queued[v] = True

    orphans: deque[int] = deque()

    def rooted(u: int) -> bool:
        while True:
            a = parent[u]
            if a == _TERMINAL:
                return True
            if a < 0:
                return False
            u = head[a]

    while active:
        u = active.popleft()
        queued[u] = False
        tu = tree[u]
        if tu == _FREE:
            continue
        middle = -1
        for a in out[u]:
            v = head[a]
            if tu == _S:
                if cap[a] <= 0:
                    continue
                tv = tree[v]
                if tv == _FREE:
                    tree[v], parent[v] = _S, a ^ 1
                    if not queued[v]:
                        active.append(v)
                        queued[v] = True
                elif tv == _T:
                    middle = a
                    break
            else:
                if cap[a ^ 1] <= 0:
                    continue
                tv = tree[v]
                if tv == _FREE:
                    tree[v], parent[v] = _T, a ^ 1
                    if not queued[v]:
                        active.append(v)
                        queued[v] = True
                elif tv == _S:
                    middle = a ^ 1
                    break
        if middle < 0:
            continue

        # bottleneck along source tree, middle arc, sink tree
        f = cap[middle]
        v = head[middle ^ 1]
        while parent[v] != _TERMINAL:
            a = parent[v]
            f = min(f, cap[a ^ 1])
            v = head[a]
        f = min(f, tr[v])
        v = head[middle]
        while parent[v] != _TERMINAL:
            a = parent[v]
            f = min(f, cap[a])
            v = head[a]
        f = min(f, -tr[v])

        cap[middle] -= f
        cap[middle ^ 1] += f
        v = head[middle ^ 1]
        while parent[v] != _TERMINAL:
            a = parent[v]
            cap[a ^ 1] -= f
            cap[a] += f
            nxt = head[a]
            if cap[a ^ 1] <= 0:
                parent[v] = _ORPHAN
                orphans.append(v)
            v = nxt
        tr[v] -= f
        if tr[v] <= 0:
            parent[v] = _ORPHAN
            orphans.append(v)
        v = head[middle]
        while parent[v] != _TERMINAL:
            a = parent[v]
            cap[a] -= f
            cap[a ^ 1] += f
            nxt = head[a]
            if cap[a] <= 0:
                parent[v] = _ORPHAN
                orphans.append(v)
            v = nxt
        tr[v] += f
        if tr[v] >= 0:
            parent[v] = _ORPHAN
            orphans.append(v)
        flow += f

        while orphans:
            w = orphans.popleft()
            tw = tree[w]
            found = False
            for a in out[w]:
                x = head[a]
                if tree[x] != tw:
                    continue
                ok = cap[a ^ 1] > 0 if tw == _S else cap[a] > 0
                if ok and rooted(x):
                    parent[w] = a
                    found = True
                    break
            if found:
                continue
            for a in out[w]:
                x = head[a]
                if tree[x] != tw:
                    continue
                ok = cap[a ^ 1] > 0 if tw == _S else cap[a] > 0
                if ok and not queued[x]:
                    active.append(x)
                    queued[x] = True
                pa = parent[x]
                if pa >= 0 and head[pa] == w:
                    parent[x] = _ORPHAN
                    orphans.append(x)
            tree[w], parent[w] = _FREE, _NONE

        if tree[u] != _FREE and not queued[u]:
            active.appendleft(u)
            queued[u] = True

    src = np.zeros(n, dtype=bool)
    src[s] = True
    stack = [v for v in range(n) if tr[v] > 0 and v != s and v != t]
    for v in stack:
        src[v] = True
    while stack:
        u = stack.pop()
        for a in out[u]:
            v = head[a]
            if cap[a] > 0 and not src[v]:
                src[v] = True
                stack.append(v)
    snk = np.zeros(n, dtype=bool)
    snk[t] = True
    stack = [v for v in range(n) if tr[v] < 0 and v != s and v != t]
    for v in stack:
        snk[v] = True
    while stack:
        u = stack.pop()
        for a in out[u]:
            v = head[a]
            if cap[a ^ 1] > 0 and not snk[v]:
                snk[v] = True
                stack.append(v)
    return MaxFlowResult(float(flow), src, snk)


def solve_binary(bp: BinaryProblem, eps: float = EPS) -> BinarySolution:
    """Globally optimal labeling of a submodular binary problem.

    Among minimisers the one with the most nodes at option 0 is returned:
    only nodes that can still reach the sink take option 1.
    """
    net, constant = decompose(bp, eps)
    res = max_flow(net)
    y = res.sink_side[: bp.num_nodes].astype(np.int64)
    energy = bp.energy(y)
    scale = max(1.0, abs(energy))
    if abs(res.flow_value + constant - energy) > 1e-6 * scale:
        raise RuntimeError(
            f"min-cut mismatch: flow + constant = {res.flow_value + constant!r}, energy = {energy!r}"
        )
    return BinarySolution(y, energy)
