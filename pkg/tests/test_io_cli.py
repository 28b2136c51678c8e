import json

import numpy as np
import pytest

from mrfmoves.cli import main
from mrfmoves.energy import Instance
from mrfmoves.generators import potts_table, random_small
from mrfmoves.io import (
    ParseError,
    parse_instance,
    parse_labeling,
    pgm_bytes,
    read_instance,
    serialize_instance,
    serialize_labeling,
    write_instance,
)
from mrfmoves.schedule import format_ratio


def test_round_trip(inst_a):
    assert parse_instance(serialize_instance(inst_a)) == inst_a
    for seed in range(20):
        inst = random_small(seed, triangle=False)
        assert parse_instance(serialize_instance(inst)) == inst


def test_round_trip_floats():
    inst = Instance([[0.1, 1 / 3]], [], np.zeros((0, 2, 2)))
    assert parse_instance(serialize_instance(inst)) == inst


def test_minimal_file():
    inst = parse_instance("mrf 1 0 2\nunary 0 0 0\n")
    assert inst.num_nodes == 1 and inst.num_edges == 0 and inst.num_states == 2


def test_count_mismatch_reported_at_end():
    text = "mrf 2 2 2\nunary 0 0 0\nunary 1 0 0\nedge 0 1 0 1 1 0\n"
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert err.value.line == 5 and "2 edges" in str(err.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("", 1),
        ("mrf 1 0\n", 1),
        ("mrf 1 0 2\nunary 0 0\n", 2),
        ("mrf 1 0 2\nunary 3 0 0\n", 2),
        ("mrf 2 1 2\nunary 0 0 0\nunary 1 0 0\nedge 1 0 0 0 0 0\n", 4),
        ("mrf 1 0 2\nunary 0 0 x\n", 2),
        ("mrf 1 0 2\nbogus\n", 2),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        parse_instance(text)
    assert err.value.line == line


def test_labeling_io():
    assert parse_labeling("1\n2\n# note\n3\n") == (0, 1, 2)
    assert serialize_labeling((0, 1, 2)) == "1\n2\n3\n"
    with pytest.raises(ParseError):
        parse_labeling("0\n")
    with pytest.raises(ParseError):
        parse_labeling("4\n", num_states=3)


def test_pgm():
    data = pgm_bytes([2, 2, 2, 2], 2, 2, 3)
    assert data == b"P5\n2 2\n255\n" + bytes([255] * 4)
    assert pgm_bytes([0, 1], 1, 2, 3).endswith(bytes([0, 128]))


@pytest.fixture
def files(tmp_path, inst_a, inst_c, triangle_violation_table):
    paths = {}
    for name, inst in {
        "a": inst_a,
        "c": inst_c,
        "viol": Instance(np.zeros((2, 3)), [[0, 1]], [triangle_violation_table]),
        "potts": Instance(np.zeros((3, 3)), [[0, 1], [1, 2]], [potts_table(3)] * 2),
        "unary": Instance([[1, 2]]),
    }.items():
        paths[name] = tmp_path / f"{name}.mrf"
        write_instance(paths[name], inst)
    return paths


def test_solve_expansion(files, tmp_path, capsys):
    assert main(["solve", "--in", str(files["a"]), "--method", "expansion", "--init", "first-state"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["final_energy"] == 1 and doc["labeling"] == [1, 2]


def test_solve_expshrink_next_with_outputs(files, tmp_path):
    out, rep = tmp_path / "y.txt", tmp_path / "r.json"
    code = main(["solve", "--in", str(files["c"]), "--method", "expshrink-next", "--out", str(out), "--report", str(rep)])
    assert code == 0
    assert json.loads(rep.read_text())["final_energy"] == 0
    assert out.read_text() == "2\n1\n1\n"


def test_solve_with_init_file(files, tmp_path, capsys):
    init = tmp_path / "init.txt"
    init.write_text("2\n1\n")
    assert main(["solve", "--in", str(files["a"]), "--method", "icm", "--init", str(init)]) == 0
    assert json.loads(capsys.readouterr().out)["final_energy"] == 1
    init.write_text("2\n")
    assert main(["solve", "--in", str(files["a"]), "--method", "icm", "--init", str(init)]) == 2


def test_exit_codes(files, tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["solve", "--in", str(files["a"]), "--method", "nope"])
    assert err.value.code == 3
    assert main(["solve", "--in", str(tmp_path / "missing.mrf"), "--method", "swap"]) == 2
    bad = tmp_path / "bad.mrf"
    bad.write_text("mrf 2 0 2\nunary 0 0 0\n")
    assert main(["solve", "--in", str(bad), "--method", "swap"]) == 2
    assert main(["solve", "--in", str(files["a"]), "--method", "swap", "--max-sweeps", "0"]) == 3


def test_check(files, capsys):
    assert main(["check", "--in", str(files["potts"]), "--triangle"]) == 0
    assert main(["check", "--in", str(files["unary"]), "--pairwise-submodular"]) == 0
    capsys.readouterr()
    assert main(["check", "--in", str(files["viol"]), "--triangle"]) == 1
    assert "(alpha=3, g1=1, g2=2)" in capsys.readouterr().out
    assert main(["check", "--in", str(files["viol"]), "--pairwise-submodular"]) == 0


def test_report_command(files, tmp_path):
    base, other, table = tmp_path / "b.json", tmp_path / "o.json", tmp_path / "t.txt"
    main(["solve", "--in", str(files["c"]), "--method", "expansion", "--report", str(base)])
    main(["solve", "--in", str(files["c"]), "--method", "expshrink-next", "--report", str(other)])
    assert main(["report", "--baseline", str(base), "--runs", str(other), str(base), "--name", "C", "--out", str(table)]) == 0
    lines = table.read_text().splitlines()
    assert lines[1] == "Name | expshrink-next | expansion"
    # the baseline reaches 0 too, so cells are absolute energies
    assert lines[0].startswith("# absolute energies") and lines[2] == "C | 0 | 0"
    mismatch = tmp_path / "m.json"
    main(["solve", "--in", str(files["a"]), "--method", "expansion", "--report", str(mismatch)])
    assert main(["report", "--baseline", str(base), "--runs", str(mismatch)]) == 2


def test_report_ratios_on_grid(tmp_path):
    grid = tmp_path / "g.mrf"
    main(["generate", "--kind", "trunclin-grid", "--rows", "6", "--cols", "6", "--states", "5", "--seed", "1", "--out", str(grid)])
    reports = {}
    for method in ("expansion", "icm", "swap"):
        reports[method] = tmp_path / f"{method}.json"
        main(["solve", "--in", str(grid), "--method", method, "--report", str(reports[method])])
    table = tmp_path / "t.txt"
    main(["report", "--baseline", str(reports["expansion"]), "--runs", str(reports["icm"]), str(reports["swap"]), "--name", "G", "--out", str(table)])
    base = json.loads(reports["expansion"].read_text())["final_energy"]
    cells = [format_ratio(json.loads(reports[m].read_text())["final_energy"], base) for m in ("icm", "swap")]
    assert base > 0
    assert table.read_text().splitlines()[2] == "G | " + " | ".join(cells)


def test_generate(tmp_path):
    a, b = tmp_path / "a.mrf", tmp_path / "b.mrf"
    args = ["generate", "--kind", "potts-grid", "--rows", "3", "--cols", "3", "--states", "2", "--seed", "4"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    inst = read_instance(a)
    assert inst.num_nodes == 9 and inst.num_edges == 12
    for kind in ("trunclin-grid", "truncquad-grid", "random-grid"):
        assert main(["generate", "--kind", kind, "--rows", "4", "--cols", "3", "--states", "5", "--out", str(a)]) == 0
        assert read_instance(a).num_nodes == 12
    assert main(["generate", "--kind", "random-small", "--seed", "3", "--out", str(a)]) == 0
    assert main(["generate", "--kind", "potts-grid", "--rows", "3"]) == 3


def test_export_pgm(tmp_path):
    labels, img = tmp_path / "y.txt", tmp_path / "y.pgm"
    labels.write_text("2\n" * 6)
    assert main(["export-pgm", "--labels", str(labels), "--rows", "2", "--cols", "3", "--states", "3", "--out", str(img)]) == 0
    data = img.read_bytes()
    assert data.startswith(b"P5\n3 2\n255\n") and set(data[-6:]) == {128}
    assert main(["export-pgm", "--labels", str(labels), "--rows", "4", "--cols", "3", "--out", str(img)]) == 2
