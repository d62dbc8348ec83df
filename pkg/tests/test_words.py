import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import biinfinite_eq, biray_window_eq, ray_eq
from regiso.errors import InvalidInput
from regiso.slp import slp_expand, slp_from_word
from regiso.words import (
    BiRay, Concat, Finite, LeftRay, LUniform, Omega, RightRay, Shuffle, Symbol, Uniform, Var,
    biray_eq, classify_primitive, depth_height, format_form, format_ses, is_normal,
    normalize_ses, parse_ses, primitive_eq,
)


def w(s):
    return slp_from_word(s) if s else None


def ses(text):
    return parse_ses("ses\n" + text)


# --- text format


def test_parse_and_format_round_trip():
    s = ses("A = 'a' B\nB = ('a' 'b')^omega\nC = [A, 'c']^eta\nD = B^omegabar\nstart: C\n")
    again = parse_ses(format_ses(s))
    assert format_ses(again) == format_ses(s)
    assert again.start == "C"


def test_parse_rejects_cycles_and_unknowns():
    with pytest.raises(InvalidInput):
        ses("A = B\nB = A\n")
    with pytest.raises(InvalidInput):
        ses("A = 'a' Z\n")
    with pytest.raises(InvalidInput):
        parse_ses("A = 'a'\n")


# --- normal form


def test_normalize_extracts_periods():
    s = normalize_ses(ses("X = ('a' 'b')^omega\n"))
    assert is_normal(s)
    rhs = s.rhs["X"]
    assert isinstance(rhs, Omega) and isinstance(rhs.child, Var)
    assert s.rhs[rhs.child.name] == Concat((Symbol("a"), Symbol("b")))


def test_normalize_keeps_normal_system():
    s = ses("X = Y^omega\nY = 'a' 'b'\n")
    assert normalize_ses(s) is s


def test_normalize_shuffle_item():
    s = normalize_ses(ses("Y = 'a'\nZ = 'b'\nX = [Y Z, 'a']^eta\n"))
    rhs = s.rhs["X"]
    assert isinstance(rhs, Shuffle) and rhs.items[1] == Symbol("a")
    assert s.rhs[rhs.items[0].name] == Concat((Var("Y"), Var("Z")))


def test_depth_and_height():
    s = ses("Y = 'a' 'b'\nX = Y^omega\n")
    assert depth_height(s, "X") == (2, 1)
    assert depth_height(s, "Y") == (1, 0)
    s = ses("Z = 'a'\nY = Z^omega\nX = [Y]^eta\n")
    assert depth_height(s, "X")[1] == 2


# --- classification


def test_classify_examples():
    f = classify_primitive(ses("Y = 'a' 'b'\nX = Y^omega\n"))
    assert format_form(f["X"]) == "RightRay(, ab)"
    f = classify_primitive(ses("A = 'a'\nB = 'b'\nX = [A, B]^eta\n"))
    assert f["X"] == Uniform(("a", "b"))
    f = classify_primitive(ses("G = ['a']^eta\nY = 'a' G\nX = [Y]^eta\n"))
    assert f["Y"] == LUniform("a", ("a",))
    assert f["X"] == Uniform(("a",))


def test_classify_bi_infinite_and_unclassifiable():
    f = classify_primitive(ses("L = 'a'^omegabar\nR = 'b'^omega\nX = L 'c' R\nY = R L\n"))
    assert isinstance(f["X"], BiRay)
    assert format_form(f["Y"]) == "NotClassifiable"


# --- bi-infinite words


def test_biray_examples():
    ab, ba = w("ab"), w("ba")
    # both sides are the alternating bi-infinite word
    assert biray_eq(ab, ab, ab, ba, ba, ba)
    assert biray_eq(ab, ba, ab, ab, ba, ab)
    # a single b among a's, cut at different places: still one word
    assert biray_eq(w("aa"), w("ab"), w("aa"), w("aa"), w("ba"), w("aa"))
    assert biray_window_eq(("aa", "ab", "aa"), ("aa", "ba", "aa"))
    # a single b against two b's
    assert not biray_eq(w("aa"), w("ab"), w("aa"), w("aa"), w("bb"), w("aa"))


def test_biray_needs_equal_lengths():
    with pytest.raises(InvalidInput):
        biray_eq(w("a"), w("ab"), w("a"), w("a"), w("a"), w("a"))


def test_biray_compressed_route():
    # long words go through the compressed factor tests; compare with the windowed oracle
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(600, 700)
        base = "".join(rng.choice("ab") for _ in range(n))
        u = base
        v = base if rng.random() < 0.5 else "".join(rng.choice("ab") for _ in range(n))
        ww = "".join(rng.choice("ab") for _ in range(n))
        k = rng.randrange(n)
        t1 = (u, v, ww)
        t2 = (u[k:] + u[:k], u[k:] + u[:k], ww) if rng.random() < 0.5 else \
            (u, "".join(rng.choice("ab") for _ in range(n)), ww)
        assert biray_eq(*map(w, t1), *map(w, t2)) == biray_window_eq(t1, t2)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 4), st.data())
def test_biray_matches_window_oracle(n, data):
    word = st.text("ab", min_size=n, max_size=n)
    t1 = tuple(data.draw(word) for _ in range(3))
    t2 = tuple(data.draw(word) for _ in range(3))
    assert biray_eq(*map(w, t1), *map(w, t2)) == biray_window_eq(t1, t2)


# --- equality of primitive words


def test_rotation_identities():
    assert primitive_eq(RightRay(None, w("ab")), RightRay(w("a"), w("ba")))
    # (vw)^omegabar == (wv)^omegabar w with v = a, w = b
    assert primitive_eq(LeftRay(w("ab"), None), LeftRay(w("ba"), w("b")))
    assert not primitive_eq(RightRay(None, w("ab")), RightRay(None, w("ba")))


def test_primitive_eq_by_kind():
    assert primitive_eq(Uniform(("a", "b")), Uniform(("b", "a")))
    assert not primitive_eq(Uniform(("a",)), Uniform(("a", "b")))
    assert not primitive_eq(Finite(w("a")), RightRay(None, w("a")))
    with pytest.raises(InvalidInput):
        primitive_eq(LUniform("a", ("a",)), Uniform(("a",)))


def _text(x):
    return "".join(slp_expand(x)) if x is not None else ""


words_ab = st.text("ab", min_size=1, max_size=6)
opt_ab = st.text("ab", max_size=6)


@settings(max_examples=300, deadline=None)
@given(opt_ab, words_ab, opt_ab, words_ab)
def test_right_rays_match_prefix_oracle(v1, w1, v2, w2):
    assert primitive_eq(RightRay(w(v1), w(w1)), RightRay(w(v2), w(w2))) == ray_eq(v1, w1, v2, w2)


@settings(max_examples=300, deadline=None)
@given(words_ab, opt_ab, words_ab, opt_ab)
def test_left_rays_match_mirrored_oracle(u1, v1, u2, v2):
    want = ray_eq(v1[::-1], u1[::-1], v2[::-1], u2[::-1])
    assert primitive_eq(LeftRay(w(u1), w(v1)), LeftRay(w(u2), w(v2))) == want


@settings(max_examples=300, deadline=None)
@given(words_ab, opt_ab, words_ab, words_ab, opt_ab, words_ab)
def test_birays_of_any_lengths_match_oracle(u1, v1, w1, u2, v2, w2):
    got = primitive_eq(BiRay(w(u1), w(v1), w(w1)), BiRay(w(u2), w(v2), w(w2)))
    assert got == biinfinite_eq((u1, v1, w1), (u2, v2, w2))


def test_exhaustive_tiny_birays():
    words = ["a", "b", "ab", "ba", "aab"]
    for t1 in itertools.product(words, repeat=3):
        for t2 in itertools.product(words[:3], repeat=3):
            got = primitive_eq(BiRay(*map(w, t1)), BiRay(*map(w, t2)))
            assert got == biinfinite_eq(t1, t2), (t1, t2)
