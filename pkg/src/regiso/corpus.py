"""Generators for SES instances: random systems, identity pairs and the main-step corpus."""

from __future__ import annotations

import random
from pathlib import Path

from .automata import Alphabet, Dfa, PartitionedDfa
from .errors import EmptyLanguage
from .gadgets import circuit_to_ses, random_circuit
from .heilbrunner import heilbrunner_expression
from .isocore import height_violations, main_step, prepare_ses, proper_violations, ses_size
from .words import (
    Concat, Omega, OmegaBar, Ses, Shuffle, Symbol, Var, classify_primitive, format_ses,
    is_primitive, parse_ses, rename_vars,
)


def random_ses(rng: random.Random, nvars: int = 6, syms: str = "abc") -> Ses:
    """Random SES; every variable refers only to earlier ones."""
    rhs = {}
    names = []
    for i in range(nvars):
        def atom():
            if names and rng.random() < 0.6:
                return Var(rng.choice(names))
            return Symbol(rng.choice(syms))
        k = rng.random()
        if k < 0.3:
            e = Concat([atom() for _ in range(rng.randint(2, 3))])
        elif k < 0.5:
            e = Omega(atom())
        elif k < 0.65:
            e = OmegaBar(atom())
        else:
            e = Shuffle([atom() for _ in range(rng.randint(1, 3))])
        rhs[f"X{i}"] = e
        names.append(f"X{i}")
    return Ses(Alphabet(tuple(syms)), rhs)


def random_pdfa(rng: random.Random, n: int, alphabet: str = "ab", colors: str = "xy",
                acyclic: bool = False) -> PartitionedDfa:
    trans = set()
    for p in range(n):
        for s in alphabet:
            lo = p + 1 if acyclic else 0
            if lo < n and rng.random() < 0.6:
                trans.add((p, s, rng.randrange(lo, n)))
    finals = {q for q in range(n) if rng.random() < 0.5} or {n - 1}
    d = Dfa(n, Alphabet(tuple(alphabet)), trans, 0, finals)
    return PartitionedDfa(d, Alphabet(tuple(colors)), {q: rng.choice(colors) for q in finals})


# ---------------------------------------------------------------------------
# identity instances: (name, ses, x, y) with val(x) isomorphic to val(y)

IDENTITY_NAMES = (
    "shuffle-square", "shuffle-sandwich", "shuffle-omega", "shuffle-letter-omega",
    "shuffle-omegabar", "letter-shuffle-omegabar", "shuffle-absorb",
    "omega-rotation", "omegabar-rotation",
)


def _filler(rng, rhs, base, syms, depth=2):
    """Add a random regular word under the name base (plus helpers) and return base."""
    sub = random_ses(rng, rng.randint(1, depth + 2), syms)
    ren = {x: f"{base}_{x}" for x in sub.rhs}
    for x, e in sub.rhs.items():
        rhs[ren[x]] = rename_vars(e, ren)
    return ren[list(sub.rhs)[-1]]


def identity_instance(rng: random.Random, name: str, syms: str = "abc"):
    """One random filling of the named identity."""
    rhs = {}
    if name in IDENTITY_NAMES[:6]:
        # X^eta is a shuffle of random words; u is one of its elements
        k = rng.randint(1, 3)
        elems = [_filler(rng, rhs, f"W{i}", syms) for i in range(k)]
        rhs["S"] = Shuffle([Var(w) for w in elems])
        u = Var(rng.choice(elems))
        s = Var("S")
        rhs["L"] = {
            "shuffle-square": Concat([s, s]),
            "shuffle-sandwich": Concat([s, u, s]),
            "shuffle-omega": Omega(s),
            "shuffle-letter-omega": Omega(Concat([s, u])),
            "shuffle-omegabar": OmegaBar(s),
            "letter-shuffle-omegabar": OmegaBar(Concat([u, s])),
        }[name]
        return Ses(Alphabet(tuple(syms)), rhs), "L", "S"
    if name == "shuffle-absorb":
        # [a_1..a_n, v_1..v_m]^eta with letters of G and v_j in {G^eta, cG^eta, G^eta c, cG^eta d}
        gamma = sorted(rng.sample(syms, rng.randint(1, len(syms))))
        rhs["G"] = Shuffle([Symbol(c) for c in gamma])
        items = [Symbol(c) for c in rng.sample(gamma, rng.randint(0, len(gamma)))]
        for _ in range(rng.randint(1, 3)):
            c, d = rng.choice(gamma), rng.choice(gamma)
            items.append(rng.choice([Var("G"), Concat([Symbol(c), Var("G")]),
                                     Concat([Var("G"), Symbol(c)]),
                                     Concat([Symbol(c), Var("G"), Symbol(d)])]))
        rng.shuffle(items)
        # every letter of G must occur somewhere, which the G-parts guarantee
        rhs["L"] = Shuffle(items)
        return Ses(Alphabet(tuple(syms)), rhs), "L", "G"
    v = Var(_filler(rng, rhs, "V", syms))
    w = Var(_filler(rng, rhs, "W", syms))
    if name == "omega-rotation":
        rhs["L"] = Omega(Concat([v, w]))
        rhs["R"] = Concat([v, Omega(Concat([w, v]))])
    elif name == "omegabar-rotation":
        rhs["L"] = OmegaBar(Concat([v, w]))
        rhs["R"] = Concat([OmegaBar(Concat([w, v])), w])
    else:
        raise ValueError(f"unknown identity {name!r}")
    return Ses(Alphabet(tuple(syms)), rhs), "L", "R"


# ---------------------------------------------------------------------------
# the main-step corpus

HAND_WRITTEN = {
    "rotation": "ses\nA = ('a' 'b')^omega\nB = 'a' ('b' 'a')^omega\n",
    "shuffle-square": "ses\nS = ['a' 'b', 'c']^eta\nX = S S\nY = S 'c' S\n",
    "nested-omega": "ses\nA = 'a'^omega\nB = A^omega\nC = (A A)^omega\nD = B^omegabar\n",
    "bi-infinite": "ses\nA = ('a' 'b')^omegabar 'c' ('b' 'a')^omega\nB = A A\nC = [A, 'c']^eta\n",
    "mixed": "ses\nG = ['a', 'b']^eta\nU = ('a' G)^omega\nV = (G 'b')^omegabar\nW = U 'c' V\n"
             "Z = [W, U, 'c']^eta Z2\nZ2 = W^omega\n",
    "deep": "ses\nA = 'a' 'b'\nB = A A 'c'\nC = B^omega\nD = (C B)^omegabar\nE = [D, C, A]^eta\n"
            "F = E D C\nG = F^omega\n",
}


def build_corpus(seed: int = 0, random_count: int = 150) -> dict:
    """name -> SES for the main-step contract checks."""
    rng = random.Random(seed)
    out = {f"hand-{k}": parse_ses(v) for k, v in HAND_WRITTEN.items()}
    for i in range(random_count):
        syms = rng.choice(["a", "ab", "abc"])
        out[f"random-{i:03d}"] = random_ses(rng, rng.randint(3, 9), syms)
    for name in IDENTITY_NAMES:
        for j in range(5):
            s, _, _ = identity_instance(rng, name)
            out[f"identity-{name}-{j}"] = s
    for i in range(20):
        c = random_circuit(rng, 4, 3)
        out[f"circuit-{i:02d}"] = circuit_to_ses(c)[0]
    i = 0
    while i < 30:
        try:
            s = heilbrunner_expression(random_pdfa(rng, rng.randint(2, 6)))
        except EmptyLanguage:
            continue
        out[f"heilbrunner-{i:02d}"] = s
        i += 1
    return out


def check_contract(s: Ses) -> tuple:
    """Run main_step to a fixpoint on every variable; returns (problems, rounds, bound).

    Every round must yield a proper system with sound height bookkeeping, and
    the number of rounds must stay within twice the size of the prepared system.
    """
    cur = prepare_ses(s)
    bound = 2 * ses_size(cur)
    problems = []
    rounds = 0
    while not all(is_primitive(f) for f in classify_primitive(cur).values()):
        if rounds >= bound:
            problems.append(f"no fixpoint after {rounds} rounds")
            break
        sys = main_step(cur)
        rounds += 1
        problems += [f"round {rounds}: {v}" for v in proper_violations(sys)]
        problems += [f"round {rounds}: {v}" for v in height_violations(cur, sys)]
        cur = sys.up_ses()
    return problems, rounds, bound


def write_corpus(directory, corpus: dict) -> list:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, s in sorted(corpus.items()):
        p = d / f"{name}.ses"
        p.write_text(format_ses(s))
        paths.append(p)
    return paths


def read_corpus(directory) -> dict:
    return {p.stem: parse_ses(p.read_text()) for p in sorted(Path(directory).glob("*.ses"))}
