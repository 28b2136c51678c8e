"""Text formats: instances, labelings and PGM export.

Instance files look like::

    # comment
    mrf <num_nodes> <num_edges> <num_states>
    unary <node> <E(1)> ... <E(N)>
    edge <i> <j> <E(1,1)> <E(1,2)> ... <E(N,N)>

Node ids are 0-based. Labeling files hold one 1-based state per line.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .energy import Instance, InvalidInputError


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def format_number(v: float) -> str:
    """Shortest decimal that reads back to the same float."""
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _floats(tokens: list[str], lineno: int) -> list[float]:
    try:
        vals = [float(t) for t in tokens]
    except ValueError as err:
        raise ParseError(f"bad number ({err})", lineno) from None
    if not all(np.isfinite(vals)):
        raise ParseError("energies must be finite", lineno)
    return vals


def _int(token: str, lineno: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", lineno) from None


def parse_instance(text: str) -> Instance:
    header = None
    unaries: dict[int, list[float]] = {}
    edges: list[tuple[int, int, list[float]]] = []
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        last = lineno
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        kind = tok[0]
        if header is None:
            if kind != "mrf" or len(tok) != 4:
                raise ParseError("expected header 'mrf <num_nodes> <num_edges> <num_states>'", lineno)
            header = tuple(_int(t, lineno, "count") for t in tok[1:])
            n, m, k = header
            if n < 1 or m < 0 or k < 1:
                raise ParseError("header counts out of range", lineno)
            continue
        n, m, k = header
        if kind == "unary":
            if edges:
                raise ParseError("unary line after edge lines", lineno)
            if len(tok) != 2 + k:
                raise ParseError(f"unary line needs a node id and {k} energies", lineno)
            node = _int(tok[1], lineno, "node id")
            if not 0 <= node < n:
                raise ParseError(f"node id {node} out of range", lineno)
            if node in unaries:
                raise ParseError(f"duplicate unary for node {node}", lineno)
            if len(unaries) >= n:
                raise ParseError("more unary lines than the header declares", lineno)
            unaries[node] = _floats(tok[2:], lineno)
        elif kind == "edge":
            if len(tok) != 3 + k * k:
                raise ParseError(f"edge line needs two node ids and {k * k} energies", lineno)
            i, j = _int(tok[1], lineno, "node id"), _int(tok[2], lineno, "node id")
            if not 0 <= i < j < n:
                raise ParseError(f"edge ({i}, {j}) must satisfy 0 <= i < j < {n}", lineno)
            if len(edges) >= m:
                raise ParseError("more edge lines than the header declares", lineno)
            edges.append((i, j, _floats(tok[3:], lineno)))
        else:
            raise ParseError(f"unknown record {kind!r}", lineno)
    if header is None:
        raise ParseError("missing 'mrf' header", last + 1)
    n, m, k = header
    if len(unaries) != n:
        raise ParseError(f"header declares {n} unary lines, found {len(unaries)}", last + 1)
    if len(edges) != m:
        raise ParseError(f"header declares {m} edges, found {len(edges)}", last + 1)
    try:
        return Instance(
            [unaries[v] for v in range(n)],
            np.array([(i, j) for i, j, _ in edges], dtype=np.int64).reshape(-1, 2),
            np.array([t for _, _, t in edges], dtype=np.float64).reshape(m, k, k),
        )
    except InvalidInputError as err:
        raise ParseError(str(err)) from None


def serialize_instance(inst: Instance) -> str:
    lines = [
        "# states are numbered 1..N in the column order of each table",
        f"mrf {inst.num_nodes} {inst.num_edges} {inst.num_states}",
    ]
    for v, row in enumerate(inst.unaries):
        lines.append(" ".join(["unary", str(v)] + [format_number(e) for e in row]))
    for (i, j), t in zip(inst.edge_index.tolist(), inst.tables):
        lines.append(" ".join(["edge", str(i), str(j)] + [format_number(e) for e in t.ravel()]))
    return "\n".join(lines) + "\n"


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def write_text_atomic(path, text: str | bytes) -> None:
    path = Path(path)
    data = text.encode("utf-8") if isinstance(text, str) else text
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_instance(path, inst: Instance) -> None:
    write_text_atomic(path, serialize_instance(inst))


def parse_labeling(text: str, num_states: int | None = None) -> tuple[int, ...]:
    """1-based states, one per line, returned 0-based."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        v = _int(line, lineno, "state")
        if v < 1 or (num_states is not None and v > num_states):
            raise ParseError(f"state {v} out of range", lineno)
        out.append(v - 1)
    return tuple(out)


def serialize_labeling(y) -> str:
    return "".join(f"{int(v) + 1}\n" for v in y)


def pgm_bytes(y, rows: int, cols: int, num_states: int) -> bytes:
    """Binary P5 image; state ``k`` (0-based) maps to gray ``k * 255 / (N - 1)`` rounded half up."""
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (rows * cols,):
        raise InvalidInputError(f"{len(y)} labels do not fill a {rows}x{cols} image")
    if num_states > 1:
        gray = np.floor(y * 255.0 / (num_states - 1) + 0.5)
    else:
        gray = np.zeros_like(y, dtype=np.float64)
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + gray.astype(np.uint8).tobytes()
