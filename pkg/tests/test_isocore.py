import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regiso.automata import Alphabet, Dfa
from regiso.corpus import random_ses
from regiso.errors import InvalidInput
from regiso.isocore import (
    Blocked, LayeredCircuit, TwoLevelSystem, bad_shape, height_violations, is_good,
    is_irreducible, is_semi_good, main_step, make_good, make_good_periodic, make_irredundant,
    merges, order_iso, ordered_tree_iso, ordered_tree_iso_prefix_closed, prepare_ses,
    proper_violations, rewrite_forms, ses_disjoint_union, ses_iso, ses_iso_pair, ses_iso_run,
    validate_proper, word_iso, one_color,
)
from regiso.slp import slp_from_word
from regiso.treeiso import tree_iso_dfa
from regiso.words import (
    Concat, Finite, Omega, RightRay, Shuffle, Symbol, Uniform, Var, classify_primitive,
    is_primitive, parse_ses, primitive_eq,
)

AB = Alphabet(("a", "b"))
G = Uniform(("a", "b"))


def fin(s):
    return Finite(slp_from_word(s))


def ses(text):
    return parse_ses("ses\n" + text)


# --- the rewriting system


def test_finite_words_merge():
    assert merges([fin("ab"), fin("ba")])


def test_shuffle_of_a_word_is_not_primitive_and_does_not_merge():
    f = classify_primitive(ses("X = ['a' 'b']^eta\n"))["X"]
    assert not is_primitive(f)
    assert not merges([f, f])


def test_letter_between_dense_words_merges():
    assert merges([G, fin("a"), G])
    assert not merges([Uniform(("a",)), fin("b"), Uniform(("a",))])


def test_rewrite_examples():
    out = rewrite_forms([fin("a"), fin("b"), G, G])
    assert len(out) == 2 and primitive_eq(out[0], fin("ab")) and out[1] == G
    assert rewrite_forms([G, fin("a"), G]) == [G]
    seq = [fin("a"), G, fin("ab"), Uniform(("a",))]
    assert rewrite_forms(seq) == seq


# --- two-level systems


def system(**lo):
    sys = TwoLevelSystem(Alphabet(("a", "b", "c")))
    for name, rhs in lo.items():
        sys.set_lo(name, rhs)
    return sys


def shuffle(*letters):
    return Shuffle(tuple(Symbol(c) for c in letters))


def word(s):
    return Symbol(s) if len(s) == 1 else Concat(tuple(Symbol(c) for c in s))


def test_make_good_fuses_a_closed_pair():
    sys = system(A=Symbol("a"), B=Symbol("b"))
    sys, out = make_good(sys, ["A", "B"])
    assert len(out) == 1
    c = out[0]
    assert sys.lo_rhs[c] == Concat((Var("A"), Var("B")))
    assert primitive_eq(sys.lo_forms[c], fin("ab"))


def test_make_good_keeps_good_sequences():
    sys = system(A=word("ab"), G=shuffle("a", "b"), C=word("c"), H=shuffle("a"))
    sys.set_up("X", Concat((Var("C"), Var("G"))))
    # X needs guarding neighbours on both sides
    assert not is_semi_good(sys.summaries(["A", "G", "X"]))
    seq = ["A", "G", "X", "H"]
    assert is_good(sys.summaries(seq))
    _, out = make_good(sys, seq)
    assert out == seq


def test_make_good_periodic_closed_seam():
    sys = system(P=word("ab"), G=shuffle("a", "b"), Q=word("ba"))
    sys, prefix, period = make_good_periodic(sys, ["P", "G", "Q"])
    assert prefix == ["P", "G"]
    assert period[1:] == ["G"]
    assert primitive_eq(sys.lo_forms[period[0]], fin("baab"))
    assert is_irreducible([sys.lo_forms[x] for x in period + period])
    # the two omega words are the same
    flat = sys.flat_ses()
    rhs = dict(flat.rhs)
    rhs["L"] = Omega(Concat((Var("P"), Var("G"), Var("Q"))))
    rhs["R1"] = Omega(Concat(tuple(Var(x) for x in period)))
    rhs["R"] = Concat(tuple(Var(x) for x in prefix) + (Var("R1"),))
    s = type(flat)(flat.alphabet, rhs)
    assert ses_iso(s, "L", "R")


def test_make_good_periodic_dense_seam():
    sys = system(G=shuffle("a", "b"), B=word("bb"))
    sys, prefix, period = make_good_periodic(sys, ["G", "B", "G"])
    assert prefix == ["G", "B", "G"] and period == ["B", "G"]


def test_make_good_periodic_irreducible_seam():
    sys = system(G=shuffle("a", "b"), C=word("c"), H=shuffle("a"))
    assert make_good_periodic(sys, ["G", "C", "H"])[1:] == ([], ["G", "C", "H"])
    with pytest.raises(InvalidInput):
        make_good_periodic(sys, ["G", "C"])
    sys = system(A=word("a"), U=Omega(Symbol("b")), B=word("c"))
    with pytest.raises(InvalidInput):
        make_good_periodic(sys, ["A", "U", "B"])


def test_make_irredundant():
    sys = system(A=word("ab"), B=word("ab"), C=word("ba"))
    make_irredundant(sys)
    assert sorted(sys.lo_rhs) == ["A", "C"]
    sys = system(P=Omega(word("ab")), Q=Concat((Symbol("a"), Omega(word("ba")))))
    make_irredundant(sys)
    assert len(sys.lo_rhs) == 1
    sys = system(A=word("a"), B=word("b"))
    make_irredundant(sys)
    assert sorted(sys.lo_rhs) == ["A", "B"]


# --- main step


def test_main_step_on_shuffle_of_a_word():
    s = prepare_ses(ses("Y = 'a' 'b'\nX = [Y]^eta\n"))
    assert "X" in bad_shape(s)
    sys = main_step(s)
    assert "X" in sys.up_rhs and "Y" in sys.lo_rhs
    assert isinstance(sys.lo_forms["Y"], Finite)
    assert validate_proper(sys)
    assert height_violations(s, sys) == []
    assert "X" not in bad_shape(sys.up_ses())


def test_main_step_moves_primitive_powers_down():
    s = prepare_ses(ses("Y = ['a', 'b']^eta\nX = Y^omega\n"))
    assert classify_primitive(s)["X"] == G
    sys = main_step(s)
    # X is primitive, and equal to Y, so it leaves no upper variable behind
    assert "X" not in sys.up_rhs
    assert list(sys.lo_forms.values()) == [G]


def test_main_step_unrolls_omega_of_a_ray():
    sys = main_step(prepare_ses(ses("A = 'a'^omega\nY = 'b' A\nX = Y^omega\n")))
    assert validate_proper(sys)
    rhs = sys.up_rhs["X"]
    assert isinstance(rhs, Concat) and len(rhs.items) == 3
    y1, y2, z = (v.name for v in rhs.items)
    assert y1 == y2 and sys.is_lo(y1) and isinstance(sys.lo_forms[y1], RightRay)
    assert sys.up_rhs[z] == Omega(Var(y1))


def test_properness_violations():
    sys = system(A=Symbol("a"), B=Symbol("b"))
    sys.set_up("X", Concat((Var("A"), Var("B"))))
    assert not validate_proper(sys)
    sys = system(A=word("ab"), B=word("ab"), U=Omega(Symbol("c")))
    sys.set_up("X", Concat((Var("A"), Var("U"))))
    assert any("equal" in v for v in proper_violations(sys))


# --- decisions


def test_ses_iso_examples():
    s = ses("S = ['a' 'b', 'c']^eta\nX = S S\nY = S 'c' S\n"
            "P = ('a' 'b')^omega\nQ = 'a' ('b' 'a')^omega\nR = ('b' 'a')^omega\n")
    assert ses_iso(s, "X", "S") and ses_iso(s, "Y", "S")
    assert ses_iso(s, "P", "Q")
    assert not ses_iso(s, "P", "R")


def test_ses_iso_unknown_variable():
    with pytest.raises(InvalidInput):
        ses_iso(ses("X = 'a'\n"), "X", "Y")


def test_disjoint_union_keeps_both_sides():
    s1, s2 = ses("X = 'a'^omega\n"), ses("X = 'b'^omega\n")
    u, m1, m2 = ses_disjoint_union(s1, s2)
    assert m1["X"] != m2["X"] and set(u.alphabet) == {"a", "b"}
    assert not ses_iso(u, m1["X"], m2["X"])
    assert ses_iso_pair(s1, "X", ses("Y = 'a' 'a'^omega\n"), "Y")


def pdfa(n, alphabet, trans, finals, initial=0):
    return one_color(Dfa(n, Alphabet(tuple(alphabet)), trans, initial, finals))


def test_word_iso_examples():
    b_star_a = pdfa(2, "ab", {(0, "b", 0), (0, "a", 1)}, {1})
    a_star = pdfa(1, "a", {(0, "a", 0)}, {0})
    a_star_b = pdfa(2, "ab", {(0, "a", 0), (0, "b", 1)}, {1})
    assert word_iso(b_star_a, a_star)
    assert not word_iso(b_star_a, a_star_b)
    renamed = pdfa(2, "cd", {(0, "d", 0), (0, "c", 1)}, {1})
    assert word_iso(b_star_a, renamed)


def dfa(n, alphabet, trans, finals, initial=0):
    return Dfa(n, Alphabet(tuple(alphabet)), trans, initial, finals)


def test_order_iso_examples():
    eta01 = dfa(2, "01", {(0, "0", 0), (0, "1", 1), (1, "0", 0), (1, "1", 1)}, {1})
    etaab = dfa(2, "ab", {(0, "a", 0), (0, "b", 1), (1, "a", 0), (1, "b", 1)}, {1})
    assert order_iso(eta01, etaab)
    a_star_b = dfa(2, "ab", {(0, "a", 0), (0, "b", 1)}, {1})
    b_star_a = dfa(2, "ab", {(0, "b", 0), (0, "a", 1)}, {1})
    assert not order_iso(a_star_b, b_star_a)
    assert order_iso(dfa(1, "a", {(0, "a", 0)}, {0}), dfa(1, "b", {(0, "b", 0)}, {0}))


def test_ordered_trees():
    full_ab = dfa(1, "ab", {(0, "a", 0), (0, "b", 0)}, {0})
    full_cd = dfa(1, "cd", {(0, "c", 0), (0, "d", 0)}, {0})
    assert ordered_tree_iso(full_ab, full_cd)
    # {e, a, b, ba} and {e, a, b, ab}: only the unordered trees agree
    t1 = dfa(4, "ab", {(0, "a", 1), (0, "b", 2), (2, "a", 3)}, {0, 1, 2, 3})
    t2 = dfa(4, "ab", {(0, "a", 1), (0, "b", 2), (1, "b", 3)}, {0, 1, 2, 3})
    assert tree_iso_dfa(t1, t2)
    assert not ordered_tree_iso(t1, t2)
    assert not ordered_tree_iso_prefix_closed(t1, t2)
    assert ordered_tree_iso(t1, t1)


def test_prefix_closed_ordered_trees():
    two = dfa(1, "ab", {(0, "a", 0), (0, "b", 0)}, {0})
    two_again = dfa(2, "ab", {(0, "a", 1), (0, "b", 1), (1, "a", 0), (1, "b", 0)}, {0, 1})
    three = dfa(1, "abc", {(0, s, 0) for s in "abc"}, {0})
    assert ordered_tree_iso_prefix_closed(two, two_again)
    assert not ordered_tree_iso_prefix_closed(two, three)
    with pytest.raises(InvalidInput):
        ordered_tree_iso_prefix_closed(dfa(2, "a", {(0, "a", 1)}, {1}), two)


# --- circuits


def test_layered_circuit():
    c = LayeredCircuit([["x", "y"], ["g"]], ["input", "and"],
                       {"x": True, "y": False, "g": ("x", "y")})
    assert c.output == "g" and not c.evaluate()
    with pytest.raises(InvalidInput):
        LayeredCircuit([["x"], ["g"]], ["input", "or"], {"x": True, "g": ("x", "z")})
    with pytest.raises(InvalidInput):
        LayeredCircuit([["x", "y"]], ["input"], {"x": True, "y": True})


# --- properties


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_ses_iso_is_an_equivalence(seed):
    rng = random.Random(seed)
    s = random_ses(rng, rng.randint(3, 6), rng.choice(["a", "ab"]))
    xs = list(s.rhs)
    m = {(x, y): ses_iso(s, x, y) for x in xs for y in xs}
    forms = classify_primitive(s)
    for x in xs:
        assert m[x, x]
    for x, y in itertools.product(xs, repeat=2):
        assert m[x, y] == m[y, x]
        if is_primitive(forms[x]) and is_primitive(forms[y]):
            assert m[x, y] == primitive_eq(forms[x], forms[y])
    for x, y, z in itertools.product(xs, repeat=3):
        if m[x, y] and m[y, z]:
            assert m[x, z]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_main_step_contract_on_random_systems(seed):
    rng = random.Random(seed)
    s = prepare_ses(random_ses(rng, rng.randint(3, 8), rng.choice(["a", "ab", "abc"])))
    sys = main_step(s)
    assert proper_violations(sys) == []
    assert height_violations(s, sys) == []
    run = ses_iso_run(s, list(s.rhs)[0], list(s.rhs)[-1])
    assert run.rounds <= run.bound


def _forms(rng):
    pool = [fin("a"), fin("b"), fin("ab"), G, Uniform(("a",)), RightRay(None, slp_from_word("ab"))]
    return [rng.choice(pool) for _ in range(rng.randint(0, 7))]


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_good_implies_irreducible(seed):
    rng = random.Random(seed)
    seq = _forms(rng)
    if rng.random() < 0.5 and seq:
        seq.insert(rng.randrange(len(seq) + 1), Blocked((G, fin("a")), (fin("b"), G)))
    if is_good(seq):
        assert is_irreducible(seq)
    assert is_good(rewrite_forms(seq)) or not is_semi_good(rewrite_forms(seq))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_make_good_output_is_good(seed):
    rng = random.Random(seed)
    sys = system(A=word("a"), B=word("b"), C=word("ab"), G=shuffle("a", "b"),
                 H=shuffle("a"), R=Omega(word("ab")))
    seq = [rng.choice("ABCGHR") for _ in range(rng.randint(1, 8))]
    _, out = make_good(sys, seq)
    assert is_good(sys.summaries(out))
    assert len(out) <= len(seq)
    flat = sys.flat_ses()
    rhs = dict(flat.rhs)
    rhs["IN"] = Concat(tuple(Var(x) for x in seq)) if len(seq) > 1 else Var(seq[0])
    rhs["OUT"] = Concat(tuple(Var(x) for x in out)) if len(out) > 1 else Var(out[0])
    assert ses_iso(type(flat)(flat.alphabet, rhs), "IN", "OUT")
