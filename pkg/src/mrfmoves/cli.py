"""``mrfmoves`` command line.

Exit codes: 0 success, 1 a ``check`` found violations, 2 unreadable or
inconsistent input files, 3 invalid flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators
from .energy import InvalidInputError, check_pairwise_submodular, check_triangle
from .io import (
    ParseError,
    parse_labeling,
    pgm_bytes,
    read_instance,
    serialize_instance,
    serialize_labeling,
    write_text_atomic,
)
from .schedule import Method, RunReport, relative_energy_report, run

EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_FLAGS = 3


class FlagError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FLAGS, f"{self.prog}: error: {message}\n")


def _emit(path: str | None, text: str | bytes) -> None:
    if path is None or path == "-":
        if isinstance(text, bytes):
            sys.stdout.buffer.write(text)
        else:
            sys.stdout.write(text)
    else:
        write_text_atomic(path, text)


def _load(path: str):
    try:
        return read_instance(path)
    except (OSError, ParseError) as err:
        raise InputError(f"{path}: {err}") from None


def cmd_solve(args) -> int:
    inst = _load(args.input)
    if args.init == "first-state":
        init = (0,) * inst.num_nodes
    else:
        try:
            init = parse_labeling(Path(args.init).read_text(encoding="utf-8"), inst.num_states)
        except (OSError, ParseError) as err:
            raise InputError(f"{args.init}: {err}") from None
        if len(init) != inst.num_nodes:
            raise InputError(f"{args.init}: {len(init)} labels for {inst.num_nodes} nodes")
    report = run(inst, init, Method(args.method), seed=args.seed, max_sweeps=args.max_sweeps, eps=args.eps)
    if args.out:
        write_text_atomic(args.out, serialize_labeling(report.labeling))
    doc = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.report:
        write_text_atomic(args.report, doc)
    if not args.out and not args.report:
        sys.stdout.write(doc)
    else:
        print(f"{args.method}: energy {report.initial_energy:g} -> {report.final_energy:g} "
              f"in {report.sweeps} sweeps ({report.accepted_moves} moves accepted)")
    return 0


def cmd_check(args) -> int:
    inst = _load(args.input)
    ok = True
    for e, (i, j, table) in enumerate(inst.edges):
        if args.triangle:
            res = check_triangle(table, args.eps)
            where = None if res.holds else "(alpha={}, g1={}, g2={})".format(*(v + 1 for v in res.violation))
        else:
            res = check_pairwise_submodular(table, args.eps)
            where = None if res.holds else "(alpha={}, beta={})".format(*(v + 1 for v in res.violation))
        ok &= res.holds
        print(f"edge {e} ({i}, {j}): " + ("ok" if res.holds else f"violated at {where}"))
    cond = "triangle" if args.triangle else "pairwise-submodular"
    print(f"{cond}: {'holds' if ok else 'violated'} on {inst.num_edges} edges")
    return 0 if ok else EXIT_VIOLATION


def cmd_report(args) -> int:
    def load(path):
        try:
            return RunReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as err:
            raise InputError(f"{path}: {err}") from None

    baseline = load(args.baseline)
    runs = [load(p) for p in args.runs]
    try:
        table = relative_energy_report(runs, baseline)
    except InvalidInputError as err:
        raise InputError(str(err)) from None
    _emit(args.out, table.to_text(args.name))
    return 0


def cmd_generate(args) -> int:
    kind = args.kind
    if kind == "random-small":
        inst = generators.random_small(
            args.seed, args.max_nodes, args.max_states, triangle=not args.no_triangle
        )
    else:
        if args.rows is None or args.cols is None or args.states is None:
            raise FlagError(f"--kind {kind} needs --rows, --cols and --states")
        rows, cols, k = args.rows, args.cols, args.states
        if kind == "potts-grid":
            inst = generators.generate(generators.GridSpec(
                rows, cols, k, generators.Potts(args.weight),
                generators.RandomUnary(args.seed, args.magnitude)))
        elif kind in ("trunclin-grid", "truncquad-grid"):
            inst = generators.restoration_grid(
                rows, cols, k, seed=args.seed, slope=args.slope, cap=args.cap, weight=args.weight,
                quadratic=kind == "truncquad-grid")
        else:
            inst = generators.generate(generators.GridSpec(
                rows, cols, k,
                generators.RandomTable(args.seed, args.magnitude, args.force_triangle),
                generators.RandomUnary(args.seed + 1, args.magnitude)))
    _emit(args.out, serialize_instance(inst))
    return 0


def cmd_export_pgm(args) -> int:
    try:
        labels = parse_labeling(Path(args.labels).read_text(encoding="utf-8"))
    except (OSError, ParseError) as err:
        raise InputError(f"{args.labels}: {err}") from None
    k = args.states if args.states is not None else (max(labels) + 1 if labels else 1)
    if labels and max(labels) >= k:
        raise InputError(f"{args.labels}: state {max(labels) + 1} exceeds --states {k}")
    try:
        data = pgm_bytes(np.array(labels, dtype=np.int64), args.rows, args.cols, k)
    except InvalidInputError as err:
        raise InputError(str(err)) from None
    _emit(args.out, data)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mrfmoves", description="Move-making minimisation of pairwise discrete energies.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run a move schedule on an instance file")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--method", required=True, choices=[m.value for m in Method])
    s.add_argument("--init", default="first-state", help="'first-state' or a labeling file")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--max-sweeps", type=int, default=100)
    s.add_argument("--eps", type=float, default=1e-9)
    s.add_argument("--out", help="write the final labeling here")
    s.add_argument("--report", help="write the JSON run report here")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="check edge tables against a condition")
    c.add_argument("--in", dest="input", required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--pairwise-submodular", action="store_true")
    g.add_argument("--triangle", action="store_true")
    c.add_argument("--eps", type=float, default=1e-9)
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("report", help="relative-energy table from JSON run reports")
    r.add_argument("--baseline", required=True)
    r.add_argument("--runs", nargs="+", required=True)
    r.add_argument("--name", default="instance")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)

    gen = sub.add_parser("generate", help="write a synthetic instance file")
    gen.add_argument("--kind", required=True, choices=["potts-grid", "trunclin-grid", "truncquad-grid", "random-grid", "random-small"])
    gen.add_argument("--rows", type=int)
    gen.add_argument("--cols", type=int)
    gen.add_argument("--states", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--weight", type=float, default=1.0, help="Potts weight or unary weight")
    gen.add_argument("--slope", type=float, default=1.0)
    gen.add_argument("--cap", type=float, default=4.0)
    gen.add_argument("--magnitude", type=int, default=10)
    gen.add_argument("--force-triangle", action="store_true")
    gen.add_argument("--max-nodes", type=int, default=6)
    gen.add_argument("--max-states", type=int, default=4)
    gen.add_argument("--no-triangle", action="store_true")
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_generate)

    x = sub.add_parser("export-pgm", help="render a grid labeling as a PGM image")
    x.add_argument("--labels", required=True)
    x.add_argument("--rows", type=int, required=True)
    x.add_argument("--cols", type=int, required=True)
    x.add_argument("--states", type=int)
    x.add_argument("--out")
    x.set_defaults(func=cmd_export_pgm)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for name in ("rows", "cols", "states", "max_sweeps", "max_nodes", "max_states"):
            v = getattr(args, name, None)
            if v is not None and v < 1:
                raise FlagError(f"--{name.replace('_', '-')} must be positive")
        return args.func(args)
    except FlagError as err:
        print(f"mrfmoves: error: {err}", file=sys.stderr)
        return EXIT_FLAGS
    except InputError as err:
        print(f"mrfmoves: error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
