"""Reduction gadgets: instance generators whose answers are known in advance.

* monotone circuits become pairs of tree DAGs (prefix order) or a unary SES
  whose isomorphism questions encode the circuit value;
* trees over the gate alphabet ``OMEGA`` are mapped by two transducers to
  trees over ``{l, r}`` that are isomorphic exactly when the Boolean formula
  carried by the tree evaluates to true;
* an NFA K over ``{a, b}`` becomes an NFA whose lexicographic order is the
  rationals exactly when K accepts every word.
"""

from __future__ import annotations

import random
import re

from .automata import (
    Alphabet, Dfa, Nfa, RationalTransducer, determinize, transducer_image, trim,
)
from .errors import InvalidInput
from .isocore import LayeredCircuit
from .words import Concat, Omega, Ses, Shuffle, Symbol, Var

# ---------------------------------------------------------------------------
# Boolean trees over the gate alphabet

LEAF = "a"
L_AND, LP_AND, R_AND = "l_and", "lp_and", "r_and"
L_OR, LP_OR, R_OR = "l_or", "lp_or", "r_or"
OMEGA = Alphabet((LEAF, L_AND, LP_AND, R_AND, L_OR, LP_OR, R_OR))
LR = Alphabet(("l", "r"))

_Q1, _Q2, _S = 0, 1, 2


def _bracket_transducer(initial: int) -> RationalTransducer:
    """The two-state (plus sink) transducer; initial 0 gives [T]_1, 1 gives [T]_2."""
    t = []
    for q in (_Q1, _Q2):
        t += [(q, L_AND, "l", q), (q, R_AND, "rl", q), (q, R_OR, "rrl", q)]
        t += [(q, LP_OR, "ll", _S), (q, LP_OR, "rll", _S), (q, LP_AND, "l", _S),
              (q, LEAF, "lll", _S)]
    t += [(_Q1, L_OR, "ll", _Q1), (_Q2, L_OR, "rl", _Q2),
          (_Q1, L_OR, "rl", _Q2), (_Q2, L_OR, "ll", _Q1),
          (_Q1, R_OR, "lrl", _Q2), (_Q2, R_OR, "lrl", _Q1),
          (_Q2, LEAF, "lr", _S)]
    trans = {(p, s, tuple(w), q) for p, s, w, q in t}
    return RationalTransducer(3, OMEGA, LR, trans, initial, {_Q1, _Q2, _S})


BRACKET_1 = _bracket_transducer(_Q1)
BRACKET_2 = _bracket_transducer(_Q2)


def _prefix_closed_dfa(a: Nfa, what: str) -> Dfa:
    # a trim DFA is prefix-closed exactly when all its states are final
    d = trim(determinize(a))
    if d.initial is None or len(d.finals) != d.state_count:
        raise InvalidInput(f"{what} is not a nonempty prefix-closed language")
    if d.alphabet != OMEGA and any(s not in OMEGA for s in d.alphabet):
        raise InvalidInput(f"{what} uses symbols outside the gate alphabet")
    return d


def _embed(a: Nfa, shift: int):
    return {(p + shift, s, q + shift) for p, s, q in a.transitions}


def leaf_tree(value: bool, infinite: bool = False) -> Dfa:
    """A cut leaf: true is an or-node with inputs lp_or and a, false an and-node with lp_and and a.

    The root also gets the r-child of its kind (a single node, or an endless
    r-path when infinite is set), so the tree is well formed.
    """
    lp, r = (LP_OR, R_OR) if value else (LP_AND, R_AND)
    if infinite:
        # root 0 loops on r; the side leaves hang below every r-node
        trans = {(0, r, 1), (1, r, 1), (1, lp, 2), (0, lp, 2), (0, LEAF, 2)}
        return Dfa(3, OMEGA, trans, 0, {0, 1, 2})
    trans = {(0, lp, 1), (0, LEAF, 1), (0, r, 1)}
    return Dfa(2, OMEGA, trans, 0, {0, 1})


def combine_trees(u: Nfa, v: Nfa, kind: str) -> Nfa:
    """T = {eps} + l_kind L(u) + r_kind L(v) for prefix-closed u, v over OMEGA."""
    if kind not in ("and", "or"):
        raise InvalidInput(f"kind must be 'and' or 'or', got {kind!r}")
    du = _prefix_closed_dfa(u, "first tree")
    dv = _prefix_closed_dfa(v, "second tree")
    lsym, rsym = (L_AND, R_AND) if kind == "and" else (L_OR, R_OR)
    n1 = 1 + du.state_count
    trans = _embed(du, 1) | _embed(dv, n1)
    trans |= {(0, lsym, du.initial + 1), (0, rsym, dv.initial + n1)}
    n = n1 + dv.state_count
    return Nfa(n, OMEGA, trans, 0, set(range(n)))


def bracket_pair(t: Nfa) -> tuple:
    """([T]_1, [T]_2): prefix-closed NFAs over {l, r}."""
    d = _prefix_closed_dfa(t, "tree")
    return transducer_image(d, BRACKET_1), transducer_image(d, BRACKET_2)


def boolean_tree_gadget(u: Nfa, v: Nfa, kind: str) -> tuple:
    """Bracket pair of the and/or combination of two trees over OMEGA."""
    return bracket_pair(combine_trees(u, v, kind))


def formula_tree(f, infinite_leaves: bool = False) -> Nfa:
    """Tree over OMEGA for a nested formula: bool leaves, (kind, f1, f2) inner nodes."""
    if isinstance(f, bool):
        return leaf_tree(f, infinite_leaves)
    kind, f1, f2 = f
    return combine_trees(formula_tree(f1, infinite_leaves), formula_tree(f2, infinite_leaves), kind)


def eval_formula(f) -> bool:
    if isinstance(f, bool):
        return f
    kind, f1, f2 = f
    x, y = eval_formula(f1), eval_formula(f2)
    return (x and y) if kind == "and" else (x or y)


def random_formula(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.25:
        return rng.random() < 0.5
    return (rng.choice(("and", "or")), random_formula(rng, depth - 1),
            random_formula(rng, depth - 1))


# ---------------------------------------------------------------------------
# circuits


def random_circuit(rng: random.Random, max_layers: int = 5, max_width: int = 4) -> LayeredCircuit:
    nlayers = rng.randint(1, max_layers)
    layers, kinds, inputs = [], [], {}
    for i in range(nlayers):
        width = 1 if i == nlayers - 1 else rng.randint(1, max_width)
        gates = [f"g{i + 1}_{j}" for j in range(width)]
        if i == 0:
            kinds.append("input")
            for g in gates:
                inputs[g] = rng.random() < 0.5
        else:
            kinds.append(rng.choice(("and", "or")))
            for g in gates:
                inputs[g] = (rng.choice(layers[-1]), rng.choice(layers[-1]))
        layers.append(gates)
    return LayeredCircuit(layers, kinds, inputs)


_GATE_ID = re.compile(r"[A-Za-z0-9_]+")


def parse_circuit(text: str) -> LayeredCircuit:
    """Read `layer <i> and|or|input` headers followed by `gate <id> = ...` lines."""
    layers, kinds, inputs = [], [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "layer":
            if len(parts) != 3 or parts[2] not in ("input", "and", "or"):
                raise InvalidInput(f"line {lineno}: expected 'layer <i> input|and|or'")
            if parts[1] != str(len(layers) + 1):
                raise InvalidInput(f"line {lineno}: layers must be numbered 1, 2, ... in order")
            layers.append([])
            kinds.append(parts[2])
        elif parts[0] == "gate":
            if not layers:
                raise InvalidInput(f"line {lineno}: gate before the first layer")
            if len(parts) < 4 or parts[2] != "=" or not _GATE_ID.fullmatch(parts[1]):
                raise InvalidInput(f"line {lineno}: expected 'gate <id> = ...'")
            g, rest = parts[1], parts[3:]
            if g in inputs:
                raise InvalidInput(f"line {lineno}: gate {g!r} defined twice")
            if kinds[-1] == "input":
                if rest not in (["true"], ["false"]):
                    raise InvalidInput(f"line {lineno}: input gates take true or false")
                inputs[g] = rest == ["true"]
            else:
                if len(rest) != 2:
                    raise InvalidInput(f"line {lineno}: gates read exactly two gates")
                inputs[g] = (rest[0], rest[1])
            layers[-1].append(g)
        else:
            raise InvalidInput(f"line {lineno}: unknown directive {parts[0]!r}")
    return LayeredCircuit(layers, kinds, inputs)


def format_circuit(c: LayeredCircuit) -> str:
    lines = []
    for i, (layer, kind) in enumerate(zip(c.layers, c.kinds), 1):
        lines.append(f"layer {i} {kind}")
        for g in layer:
            v = c.inputs[g]
            rhs = ("true" if v else "false") if kind == "input" else f"{v[0]} {v[1]}"
            lines.append(f"gate {g} = {rhs}")
    return "\n".join(lines) + "\n"


def circuit_dag(c: LayeredCircuit) -> tuple:
    """One DAG over {l, r} with two nodes per gate; returns (Dfa, {gate: (node1, node2)}).

    Every gate node has exactly two children, which keeps the and/or
    constructions below unambiguous.
    """
    c.validate()
    trans = set()
    count = [0]

    def node():
        count[0] += 1
        return count[0] - 1

    leaf = node()
    yes = node()
    trans |= {(yes, "l", leaf), (yes, "r", leaf)}
    no = node()
    mid = node()
    trans |= {(no, "l", leaf), (no, "r", mid), (mid, "l", leaf)}
    nodes = {}
    for i, layer in enumerate(c.layers):
        kind = c.kinds[i]
        for g in layer:
            if kind == "input":
                nodes[g] = (yes, yes) if c.inputs[g] else (yes, no)
                continue
            (u1, u2), (v1, v2) = nodes[c.inputs[g][0]], nodes[c.inputs[g][1]]
            if kind == "and":
                # t_i -> u_i and a unary path to v_i
                pair = []
                for u, v in ((u1, v1), (u2, v2)):
                    t, y = node(), node()
                    trans |= {(t, "l", u), (t, "r", y), (y, "l", v)}
                    pair.append(t)
                nodes[g] = tuple(pair)
            else:
                x1, x2 = node(), node()
                trans |= {(x1, "l", v1), (x2, "l", v2)}
                # t_1 -> {u1, x(v2)}, {u2, x(v1)};  t_2 -> {u1, x(v1)}, {u2, x(v2)}
                pair = []
                for xa, xb in ((x2, x1), (x1, x2)):
                    t, p, q = node(), node(), node()
                    trans |= {(t, "l", p), (t, "r", q), (p, "l", u1), (p, "r", xa),
                              (q, "l", u2), (q, "r", xb)}
                    pair.append(t)
                nodes[g] = tuple(pair)
    n = count[0]
    return Dfa(n, LR, trans, None, set(range(n))), nodes


def circuit_to_tree_dags(c: LayeredCircuit) -> tuple:
    """Two prefix-closed acyclic DFAs whose trees are isomorphic iff the circuit is true."""
    d, nodes = circuit_dag(c)
    r1, r2 = nodes[c.output]
    return (Dfa(d.state_count, LR, d.transitions, r1, d.finals),
            Dfa(d.state_count, LR, d.transitions, r2, d.finals))


def circuit_to_ses(c: LayeredCircuit) -> tuple:
    """Unary SES with test/good/bad variables; returns (ses, test of output, good of last layer).

    Per layer d the words good_d and bad_d are non-isomorphic, and test_g is
    isomorphic to good_d exactly when gate g is true.  The prefix of d copies
    of a^omega keeps the layers apart.
    """
    c.validate()
    a = Symbol("a")
    rhs = {"inf": Omega(a), "good_1": a, "bad_1": Concat((a, a))}
    for g in c.layers[0]:
        rhs[f"test_{g}"] = a if c.inputs[g] else Concat((a, a))
    for d in range(1, len(c.layers)):
        rep = [Var("inf")] * d

        def shifted(x):
            return Concat(tuple(rep) + (Var(x),))

        good, bad = f"good_{d}", f"bad_{d}"
        if c.kinds[d] == "and":
            filler = good
            rhs[f"good_{d + 1}"] = Shuffle((shifted(good),))
            rhs[f"bad_{d + 1}"] = Shuffle((shifted(good), shifted(bad)))
        else:
            filler = bad
            rhs[f"good_{d + 1}"] = Shuffle((shifted(good), shifted(bad)))
            rhs[f"bad_{d + 1}"] = Shuffle((shifted(bad),))
        for g in c.layers[d]:
            g1, g2 = c.inputs[g]
            rhs[f"test_{g}"] = Shuffle((shifted(f"test_{g1}"), shifted(f"test_{g2}"),
                                        shifted(filler)))
    x, y = f"test_{c.output}", f"good_{len(c.layers)}"
    return Ses(Alphabet(("a",)), rhs, x), x, y


# ---------------------------------------------------------------------------
# universality to density

ETA_ALPHABET = Alphabet(("$1", "0", "1", "$2", "a", "b"))


def eta_dfa() -> Dfa:
    """DFA for {0,1}*1, whose lexicographic order is the rationals."""
    a = Alphabet(("0", "1"))
    return Dfa(2, a, {(0, "0", 0), (0, "1", 1), (1, "0", 0), (1, "1", 1)}, 0, {1})


def eta_universality_gadget(k: Nfa) -> Nfa:
    """NFA for {a,b}*b$1 + K b{0,1}*1 + {a,b}*b$2 over $1 < 0 < 1 < $2 < a < b.

    Its lexicographic order is dense without endpoints exactly when K = {a,b}*;
    otherwise some w b with w outside K contributes a two-element interval.
    """
    if set(k.alphabet) != {"a", "b"}:
        raise InvalidInput("the automaton must be over exactly the alphabet {a, b}")
    if k.initial is None:
        raise InvalidInput("the automaton needs an initial state")
    init, loop, after_b, done, tail, tail_end = 0, 1, 2, 3, 4, 5
    shift = 6
    n = shift + k.state_count
    trans = set()
    for src in (init, loop):
        trans |= {(src, "a", loop), (src, "b", loop), (src, "b", after_b)}
    trans |= {(after_b, "$1", done), (after_b, "$2", done)}
    # K b {0,1}* 1
    trans |= _embed(k, shift)
    trans |= {(init, s, q + shift) for p, s, q in k.transitions if p == k.initial}
    trans |= {(f + shift, "b", tail) for f in k.finals}
    if k.initial in k.finals:
        trans.add((init, "b", tail))
    trans |= {(tail, "0", tail), (tail, "1", tail), (tail, "1", tail_end)}
    return Nfa(n, ETA_ALPHABET, trans, init, {done, tail_end})
