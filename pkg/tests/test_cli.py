import pytest

from regiso.automata import Alphabet, Dfa, Nfa, format_automaton
from regiso.cli import run
from regiso.isocore import LayeredCircuit
from regiso.gadgets import format_circuit

AB = Alphabet(("a", "b"))


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(obj if isinstance(obj, str) else format_automaton(obj))
        return str(p)
    return write


def full(alphabet="ab"):
    return Dfa(1, Alphabet(tuple(alphabet)), {(0, s, 0) for s in alphabet}, 0, {0})


ETA = Dfa(2, Alphabet(("0", "1")), {(0, "0", 0), (0, "1", 1), (1, "0", 0), (1, "1", 1)}, 0, {1})


def test_tree_iso(files, capsys):
    a, b = files("a.aut", full("ab")), files("b.aut", full("cd"))
    assert run(["tree-iso", a, b]) == 0
    assert capsys.readouterr().out.strip() == "isomorphic"
    c = files("c.aut", full("abc"))
    assert run(["tree-iso", a, c]) == 1
    assert capsys.readouterr().out.strip() == "not-isomorphic"


def test_tree_canon(files, capsys):
    t = Dfa(3, AB, {(0, "a", 1), (0, "b", 2)}, 0, {0, 1, 2})
    assert run(["tree-canon", files("t.aut", t)]) == 0
    assert capsys.readouterr().out.strip() == "(()())"


def test_missing_file(capsys):
    assert run(["tree-iso", "/nonexistent/a.aut", "/nonexistent/b.aut"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_bad_usage():
    assert run(["no-such-command"]) == 2
    assert run([]) == 2


def test_determinization_overflow(files, capsys):
    n = 8
    trans = {(0, "a", 0), (0, "b", 0), (0, "a", 1)}
    trans |= {(i, s, i + 1) for i in range(1, n - 1) for s in "ab"}
    a = files("blow.aut", Nfa(n, AB, trans, 0, set(range(n))))
    assert run(["tree-iso", a, a, "--cap", "4"]) == 3
    assert "--cap" in capsys.readouterr().err
    assert run(["tree-iso", a, a]) == 0


def test_parse_error_is_exit_2(files, capsys):
    bad = files("bad.aut", "type: dfa\nalphabet: a\nstates: 1\ninitial: 5\n")
    assert run(["tree-canon", bad]) == 2
    assert "regiso:" in capsys.readouterr().err


def test_slp_commands(files, capsys):
    x = files("x.ses", "ses\nX = Y Y\nY = 'a' 'b'\n")
    z = files("z.ses", "ses\nZ = 'a' 'b' 'a' 'b'\n")
    w = files("w.ses", "ses\nW = 'b' 'a'\n")
    assert run(["slp", "len", x]) == 0
    assert capsys.readouterr().out.strip() == "4"
    assert run(["slp", "eq", x, z]) == 0
    assert run(["slp", "eq", x, w]) == 1
    assert run(["slp", "factor", w, x]) == 0
    assert run(["slp", "factor", x, w]) == 1
    assert run(["slp", "len", files("s.ses", "ses\nX = 'a'^omega\n")]) == 2


def test_heilbrunner_and_word_iso(files, capsys, tmp_path):
    p = files("p.pdfa", "type: pdfa\nalphabet: a b\nstates: 2\ninitial: 0\n"
                        "colors: x=1\ntrans: 0 b 0\ntrans: 0 a 1\n")
    q = files("q.pdfa", "type: pdfa\nalphabet: a\nstates: 1\ninitial: 0\n"
                        "colors: x=0\ntrans: 0 a 0\n")
    out = tmp_path / "p.ses"
    assert run(["heilbrunner", p, "-o", str(out)]) == 0
    assert out.read_text().startswith("ses")
    assert run(["word-iso", p, q]) == 0
    # the emitted system reproduces the decision: its start value is x^omega
    h = files("h.ses", out.read_text().replace("start:", "# start:") + "Y = 'x'^omega\n")
    start = [ln.split()[-1] for ln in out.read_text().splitlines() if ln.startswith("start:")][0]
    capsys.readouterr()
    assert run(["ses-iso", h, start, "Y"]) == 0


def test_order_iso(files, capsys):
    eta = files("eta.aut", ETA)
    dense = files("ab.aut", Dfa(2, AB, {(0, "a", 0), (0, "b", 1), (1, "a", 0), (1, "b", 1)}, 0, {1}))
    omegabar = files("ab1.aut", Dfa(2, AB, {(0, "a", 0), (0, "b", 1)}, 0, {1}))
    assert run(["order-iso", eta, dense]) == 0
    assert run(["order-iso", eta, omegabar]) == 1


def test_ses_iso_trace(files, capsys):
    s = files("s.ses", "ses\nS = ['a' 'b', 'c']^eta\nX = S S\n")
    assert run(["ses-iso", s, "X", "S", "--trace"]) == 0
    captured = capsys.readouterr()
    assert captured.out.strip() == "isomorphic"
    assert "# round 1" in captured.err and "ses" in captured.err
    assert run(["ses-iso", s, "X", "nope"]) == 2


def test_otree_iso(files):
    t1 = files("t1.aut", Dfa(4, AB, {(0, "a", 1), (0, "b", 2), (2, "a", 3)}, 0, {0, 1, 2, 3}))
    t2 = files("t2.aut", Dfa(4, AB, {(0, "a", 1), (0, "b", 2), (1, "b", 3)}, 0, {0, 1, 2, 3}))
    assert run(["tree-iso", t1, t2]) == 0
    assert run(["otree-iso", t1, t2]) == 1
    assert run(["otree-iso", t1, t1, "--prefix-closed"]) == 0
    assert run(["otree-iso", t1, t2, "--prefix-closed"]) == 1


@pytest.mark.parametrize("value", [True, False])
def test_circuit_gadgets_round_trip(files, tmp_path, capsys, value):
    c = LayeredCircuit([["x", "y"], ["g"]], ["input", "or"], {"x": value, "y": False, "g": ("x", "y")})
    circ = files("c.circ", format_circuit(c))
    a, b = tmp_path / "a.aut", tmp_path / "b.aut"
    assert run(["gadget", "circuit-tree", circ, "-o", str(a), str(b)]) == 0
    assert run(["tree-iso", str(a), str(b)]) == (0 if value else 1)
    s = tmp_path / "s.ses"
    capsys.readouterr()
    assert run(["gadget", "circuit-ses", circ, "-o", str(s)]) == 0
    x, y = capsys.readouterr().out.split()
    assert run(["ses-iso", str(s), x, y]) == (0 if value else 1)
    assert run(["gadget", "circuit-tree", circ, "-o", str(a)]) == 2


def test_eta_gadget_round_trip(files, tmp_path):
    k = files("k.aut", Nfa(1, AB, {(0, "a", 0), (0, "b", 0)}, 0, {0}))
    out = tmp_path / "l.aut"
    assert run(["gadget", "eta", k, "-o", str(out)]) == 0
    assert run(["order-iso", str(out), files("eta.aut", ETA)]) == 0


def test_bool_tree_gadget(files, tmp_path):
    from regiso.gadgets import leaf_tree
    u, v = files("u.aut", leaf_tree(True)), files("v.aut", leaf_tree(False))
    t1, t2 = tmp_path / "t1.aut", tmp_path / "t2.aut"
    assert run(["gadget", "bool-tree", u, v, "--kind", "or", "-o", str(t1), str(t2)]) == 0
    assert run(["tree-iso", str(t1), str(t2)]) == 0
    assert run(["gadget", "bool-tree", u, v, "--kind", "and", "-o", str(t1), str(t2)]) == 0
    assert run(["tree-iso", str(t1), str(t2)]) == 1


def test_corpus_build_and_check(tmp_path, capsys):
    d = tmp_path / "corpus"
    assert run(["corpus", "build", str(d), "--seed", "3"]) == 0
    assert len(list(d.glob("*.ses"))) > 200
    capsys.readouterr()
    assert run(["corpus", "check", str(d), "--jobs", "2"]) == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.endswith("files satisfy the main-step contract")
    assert run(["corpus", "check", str(tmp_path / "empty")]) == 2
