import subprocess
import sys

import pytest

from cyclectl.cli import main

from .helpers import CORPUS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_mc_witness_selfloop(capsys):
    code, out, err = run(capsys, "mc", CORPUS / "selfloop.kr", "EC G p", "--witness")
    assert code == 0
    assert out == "TRUE\nprefix:\nloop: a (anchor: a)\n"
    assert err.startswith("# mc finished in ")


def test_mc_witness_ring(capsys):
    _, out, _ = run(capsys, "mc", CORPUS / "ring2.kr", "EC G (p -> X q)", "--witness")
    assert out == "TRUE\nprefix:\nloop: a b (anchor: a)\n"


def test_mc_false_has_no_witness(capsys):
    code, out, _ = run(capsys, "mc", CORPUS / "chain.kr", "EC true", "--witness")
    assert code == 0
    assert out == "FALSE\nwitness: none\n"


def test_mc_table(capsys):
    _, out, _ = run(capsys, "mc", CORPUS / "ring2.kr", "A G EC X q", "--table")
    assert out.splitlines() == [
        "FALSE",
        "formula\tworld\tvalue",
        "EC X q\ta\ttrue",
        "EC X q\tb\tfalse",
        "A G EC X q\ta\tfalse",
        "A G EC X q\tb\tfalse",
    ]


def test_mc_formula_file_and_world(capsys, tmp_path):
    f = tmp_path / "phi.txt"
    f.write_text("# comment\nq\n")
    _, out, _ = run(capsys, "mc", CORPUS / "ring2.kr", "-f", f, "--world", "b")
    assert out == "TRUE\n"


def test_mc_scheduler(capsys):
    phi = ("A G (dec -> EC((dec & !res1 & G !res2) -> F res1)"
           " & EC((dec & !res2 & G !res1) -> F res2))")
    assert run(capsys, "mc", CORPUS / "scheduler.kr", phi)[1] == "TRUE\n"


@pytest.mark.parametrize("argv,code", [
    (["mc", "ring2.kr", "E F zz"], 4),
    (["mc", "ring2.kr", "E F ("], 2),
    (["mc", "ring2.kr", "G p"], 2),
    (["mc", "missing.kr", "p"], 3),
    (["pg", "delaygame.pg", "--check", "par"], 0),
    (["sat", "A G ! EC true", "--max-states", "2"], 0),
])
def test_exit_codes(capsys, argv, code):
    argv = [str(CORPUS / a) if a.endswith((".kr", ".pg")) else a for a in argv]
    assert run(capsys, *argv)[0] == code


def test_invalid_model_exit(capsys, tmp_path):
    bad = tmp_path / "bad.kr"
    bad.write_text("world a []\nedge a b\ninit a\n")
    assert run(capsys, "mc", bad, "true")[0] == 3


def test_missing_strategy_exit(capsys, tmp_path):
    g = tmp_path / "g.pg"
    g.write_text("state a 0 0\nstate b 1 1\nedge a b\nedge b a\ninit a\n")
    code, _, err = run(capsys, "pg", g, "--check", "par")
    assert code == 3 and "error:" in err


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["unwind", str(CORPUS / "selfloop.kr"), "--depth", "0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["mc", str(CORPUS / "selfloop.kr")])
    assert exc.value.code == 2


def test_sat_outputs(capsys):
    _, out, _ = run(capsys, "sat", "EC true")
    assert out == "model with 1 world\nworld w0 []\ninit w0\nedge w0 w0\n"
    _, out, _ = run(capsys, "sat", "E X p & E X !p")
    assert out.splitlines()[0] == "model with 2 worlds"
    _, out, _ = run(capsys, "sat", "A G ! EC true", "--max-states", "4")
    assert out == ("no model with ≤ 4 worlds (logic lacks the finite-model property;"
                   " this is not UNSAT)\n")


def test_unwind_dot(capsys):
    _, out, _ = run(capsys, "unwind", CORPUS / "selfloop.kr", "--depth", "2", "--out", "dot")
    assert out == (
        "digraph unwinding {\n"
        "  node [shape=ellipse];\n"
        '  n0 [label="ε (a)\\n{p}"];\n'
        '  n1 [label="a:n\\n{p}"];\n'
        '  n2 [label="a:n\\n{p}"];\n'
        "  n0 -> n1;\n"
        "  n1 -> n2;\n"
        "  n1 -> n0 [style=dashed];\n"
        "}\n")


def test_pg_npmt_variants(capsys):
    game = CORPUS / "delaygame.pg"
    _, out, _ = run(capsys, "pg", game, "--check", "npmt", "--show-formula")
    assert out == "# E (G F p1 & G (p1 -> !p2 U EC G !p2))\nTRUE\n"
    _, out, _ = run(capsys, "pg", game, "--check", "npmt", "--npmt-variant", "global")
    assert out == "FALSE\n"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "cyclectl", "mc", str(CORPUS / "ring2.kr"), "p"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "TRUE\n"
