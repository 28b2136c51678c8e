"""Seeded synthetic instances: 4-connected grids and small random graphs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .energy import Instance, InvalidInputError


@dataclass(frozen=True)
class Potts:
    weight: float = 1.0


@dataclass(frozen=True)
class TruncatedLinear:
    slope: float = 1.0
    cap: float = 2.0


@dataclass(frozen=True)
class TruncatedQuadratic:
    """``slope * min((a - b)^2, cap)``; not a metric, so expansions need truncation."""

    slope: float = 1.0
    cap: float = 25.0


@dataclass(frozen=True)
class RandomTable:
    seed: int = 0
    magnitude: int = 10
    force_triangle: bool = False


@dataclass(frozen=True)
class RandomUnary:
    seed: int = 0
    magnitude: int = 10


@dataclass(frozen=True)
class Observation:
    """Unary ``weight * |state - observed|``; pixels observed as ``-1`` cost nothing."""

    values: tuple[tuple[int, ...], ...]
    weight: float = 1.0


Pairwise = Union[Potts, TruncatedLinear, TruncatedQuadratic, RandomTable]
Unary = Union[RandomUnary, Observation]


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    num_states: int
    pairwise: Pairwise
    unary: Unary


def grid_edges(rows: int, cols: int) -> np.ndarray:
    """Horizontal then vertical neighbour pairs of a row-major grid, sorted."""
    ids = np.arange(rows * cols).reshape(rows, cols)
    h = np.stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()], axis=1)
    v = np.stack([ids[:-1, :].ravel(), ids[1:, :].ravel()], axis=1)
    e = np.concatenate([h, v])
    return e[np.lexsort((e[:, 1], e[:, 0]))]


def potts_table(k: int, weight: float = 1.0) -> np.ndarray:
    return weight * (1.0 - np.eye(k))


def truncated_linear_table(k: int, slope: float = 1.0, cap: float = 2.0) -> np.ndarray:
    s = np.arange(k)
    return slope * np.minimum(np.abs(s[:, None] - s[None, :]), cap).astype(np.float64)


def truncated_quadratic_table(k: int, slope: float = 1.0, cap: float = 25.0) -> np.ndarray:
    s = np.arange(k)
    return slope * np.minimum((s[:, None] - s[None, :]) ** 2, cap).astype(np.float64)


def project_triangle(table, max_rounds: int = 10_000) -> np.ndarray:
    """Lower entries until ``E(a,a) + E(g1,g2) <= E(g1,a) + E(a,g2)`` everywhere.

    Each round caps every off-diagonal ``E(g1,g2)`` at
    ``E(g1,a) + E(a,g2) - E(a,a)``. This converges when no row has an entry
    below its diagonal along a negative cycle; tables whose rows are
    minimised on the diagonal always converge. Diagonals are never changed, so
    a table that already satisfies the condition is returned unchanged.
    """
    t = np.array(table, dtype=np.float64)
    k = len(t)
    off = ~np.eye(k, dtype=bool)
    for _ in range(max_rounds):
        d = np.diag(t)
        bound = (t.T[:, :, None] + t[:, None, :] - d[:, None, None]).min(axis=0)
        lower = off & (bound < t)
        if not lower.any():
            break
        t[lower] = bound[lower]
    else:
        raise InvalidInputError("triangle projection did not converge")
    d = np.diag(t)
    two_cycle = d[:, None] + d[None, :] > t + t.T
    if two_cycle.any():
        raise InvalidInputError("table cannot be projected without changing its diagonal")
    return t


def _random_triangle_table(rng: np.random.Generator, k: int, magnitude: int) -> np.ndarray:
    diag = rng.integers(0, magnitude // 2 + 1, size=k)
    t = rng.integers(0, magnitude + 1, size=(k, k))
    # rows bounded below by their diagonal keep the projection finite
    t = np.maximum(t, diag[:, None])
    t[np.arange(k), np.arange(k)] = diag
    return project_triangle(t)


def generate(spec: GridSpec) -> Instance:
    rows, cols, k = spec.rows, spec.cols, spec.num_states
    if rows < 1 or cols < 1 or k < 1:
        raise InvalidInputError("rows, cols and num_states must be positive")
    n = rows * cols
    edges = grid_edges(rows, cols)
    m = len(edges)

    p = spec.pairwise
    if isinstance(p, Potts):
        tables = np.broadcast_to(potts_table(k, p.weight), (m, k, k))
    elif isinstance(p, TruncatedLinear):
        tables = np.broadcast_to(truncated_linear_table(k, p.slope, p.cap), (m, k, k))
    elif isinstance(p, TruncatedQuadratic):
        tables = np.broadcast_to(truncated_quadratic_table(k, p.slope, p.cap), (m, k, k))
    elif isinstance(p, RandomTable):
        rng = np.random.default_rng(p.seed)
        if p.force_triangle:
            tables = np.array([_random_triangle_table(rng, k, p.magnitude) for _ in range(m)]).reshape(m, k, k)
        else:
            tables = rng.integers(0, p.magnitude + 1, size=(m, k, k)).astype(np.float64)
    else:
        raise InvalidInputError(f"unknown pairwise kind {p!r}")

    u = spec.unary
    if isinstance(u, RandomUnary):
        unaries = np.random.default_rng(u.seed).integers(0, u.magnitude + 1, size=(n, k)).astype(np.float64)
    elif isinstance(u, Observation):
        obs = np.asarray(u.values, dtype=np.int64)
        if obs.shape != (rows, cols):
            raise InvalidInputError(f"observation has shape {obs.shape}, expected ({rows}, {cols})")
        obs = obs.ravel()
        unaries = u.weight * np.abs(np.arange(k)[None, :] - obs[:, None]).astype(np.float64)
        unaries[obs < 0] = 0.0
    else:
        raise InvalidInputError(f"unknown unary kind {u!r}")
    return Instance(unaries, edges, tables)


def restoration_image(rows: int, cols: int, num_states: int, seed: int, noise: float = 1.0, holes: int = 3):
    """Ground truth, noisy observation (``-1`` where masked) for an inpainting task.

    The truth is a smooth ramp plus a few constant blocks; a handful of
    rectangular holes are hidden from the observation.
    """
    rng = np.random.default_rng(seed)
    k = num_states
    r = np.arange(rows)[:, None] / max(rows - 1, 1)
    c = np.arange(cols)[None, :] / max(cols - 1, 1)
    theta = rng.uniform(0, 2 * np.pi)
    ramp = 0.5 + 0.5 * (np.cos(theta) * (r - 0.5) + np.sin(theta) * (c - 0.5)) * 1.4
    truth = ramp * (k - 1)
    for _ in range(int(rng.integers(1, 4))):
        h, w = rng.integers(rows // 6, rows // 2 + 1), rng.integers(cols // 6, cols // 2 + 1)
        r0, c0 = rng.integers(0, rows - h + 1), rng.integers(0, cols - w + 1)
        truth[r0 : r0 + h, c0 : c0 + w] = rng.integers(0, k)
    truth = np.clip(np.rint(truth), 0, k - 1).astype(np.int64)
    obs = np.clip(np.rint(truth + rng.normal(0, noise, size=truth.shape)), 0, k - 1).astype(np.int64)
    for _ in range(holes):
        h, w = rng.integers(rows // 6, rows // 3 + 1), rng.integers(cols // 6, cols // 3 + 1)
        r0, c0 = rng.integers(0, rows - h + 1), rng.integers(0, cols - w + 1)
        obs[r0 : r0 + h, c0 : c0 + w] = -1
    return truth, obs


def restoration_grid(
    rows: int = 30,
    cols: int = 30,
    num_states: int = 16,
    seed: int = 0,
    slope: float = 1.0,
    cap: float = 4.0,
    weight: float = 1.0,
    noise: float = 1.0,
    holes: int = 3,
    quadratic: bool = False,
) -> Instance:
    """Grid with observation unaries, masked holes and truncated smoothness.

    The smoothness term is truncated linear, or truncated quadratic when
    ``quadratic`` is set.
    """
    _, obs = restoration_image(rows, cols, num_states, seed, noise, holes)
    pairwise = TruncatedQuadratic(slope, cap) if quadratic else TruncatedLinear(slope, cap)
    spec = GridSpec(
        rows, cols, num_states,
        pairwise,
        Observation(tuple(map(tuple, obs.tolist())), weight),
    )
    return generate(spec)


def random_small(
    seed: int,
    max_nodes: int = 6,
    max_states: int = 4,
    triangle: bool = True,
    min_states: int = 2,
    magnitude: int = 20,
) -> Instance:
    """Random connected graph with integer energies in ``[0, magnitude]``.

    A random spanning tree is built first, then each remaining pair becomes an
    edge with probability one half.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_nodes + 1))
    k = int(rng.integers(min(min_states, max_states), max_states + 1))
    pairs = set()
    order = rng.permutation(n)
    for pos in range(1, n):
        a, b = int(order[pos]), int(order[rng.integers(pos)])
        pairs.add((min(a, b), max(a, b)))
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in pairs and rng.random() < 0.5:
                pairs.add((a, b))
    edges = sorted(pairs)
    unaries = rng.integers(0, magnitude + 1, size=(n, k)).astype(np.float64)
    if triangle:
        tables = [_random_triangle_table(rng, k, magnitude) for _ in edges]
    else:
        tables = [rng.integers(0, magnitude + 1, size=(k, k)).astype(np.float64) for _ in edges]
    return Instance(unaries, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(tables).reshape(len(edges), k, k))
