"""From partitioned DFAs to succinct expression systems.

The regular word of a partitioned DFA lists the accepted words in
lexicographic order and colors each by the class of its final state.  The
translation gives every state a variable whose value is the word read from
that state; strongly connected components are eliminated from the bottom of
the reachability order upwards.
"""

from __future__ import annotations

from .automata import (
    END_MARKER, Alphabet, Dfa, PartitionedDfa, scc_topological, trim_pdfa,
)
from .errors import EmptyLanguage
from .words import Concat, Omega, OmegaBar, Ses, Shuffle, Symbol, Var


def dead_end_transform(a: PartitionedDfa) -> PartitionedDfa:
    """Move every color onto a fresh copy reached by a new smallest symbol (`$` unless taken)."""
    d = a.dfa
    t = trim_pdfa(a)
    if t.dfa.initial is None:
        raise EmptyLanguage("the automaton accepts no word")
    marker = END_MARKER
    while marker in d.alphabet:
        marker += END_MARKER
    alpha = Alphabet((marker,) + tuple(d.alphabet.symbols))
    n = d.state_count
    finals = sorted(d.finals)
    copy = {q: n + i for i, q in enumerate(finals)}
    trans = set(d.transitions) | {(q, marker, copy[q]) for q in finals}
    colors = {copy[q]: a.color_of[q] for q in finals}
    dfa = Dfa(n + len(finals), alpha, trans, d.initial, set(colors))
    return PartitionedDfa(dfa, a.color_alphabet, colors)


def state_var(q: int) -> str:
    return f"q{q}"


def _seq(states):
    return [Var(state_var(q)) for q in states]


def _concat(items):
    if not items:
        return None
    return items[0] if len(items) == 1 else Concat(items)


def heilbrunner_expression(a: PartitionedDfa) -> Ses:
    """SES with one variable per state; the start variable is the initial state."""
    t = trim_pdfa(dead_end_transform(a))
    d = t.dfa
    if d.initial is None:
        raise EmptyLanguage("the automaton accepts no word")
    out = {p: [q for _, q in d.successors[p]] for p in range(d.state_count)}
    sccs = scc_topological(d)
    rhs = {}
    for comp, cyclic in zip(reversed(sccs.components), reversed(sccs.cyclic)):
        if not cyclic:
            (p,) = comp
            if p in d.finals:
                rhs[p] = Symbol(t.color_of[p])
            else:
                rhs[p] = _concat(_seq(out[p]))
            continue
        _eliminate(comp, out, rhs)
    order = sorted(rhs)
    return Ses(Alphabet(a.color_alphabet.symbols),
               {state_var(p): rhs[p] for p in order}, state_var(d.initial))


def _eliminate(comp, out, rhs):
    members = set(comp)
    u, v, first, last = {}, {}, {}, {}
    for p in comp:
        word = out[p]
        inside = [i for i, q in enumerate(word) if q in members]
        i, j = inside[0], inside[-1]
        u[p] = word[:i]
        v[p] = word[j + 1:]
        first[p] = word[i]
        last[p] = word[j]

    def orbit(p, f):
        seq = [p]
        pos = {p: 0}
        while f[seq[-1]] not in pos:
            pos[f[seq[-1]]] = len(seq)
            seq.append(f[seq[-1]])
        return seq, pos[f[seq[-1]]]

    left, right = {}, {}
    for p in comp:
        seq, b = orbit(p, first)
        pre = [q for s in seq[:b] for q in u[s]]
        per = [q for s in seq[b:] for q in u[s]]
        parts = _seq(pre)
        if per:
            parts.append(Omega(_concat(_seq(per))))
        left[p] = parts
        seq, dd = orbit(p, last)
        per = [q for s in reversed(seq[dd:]) for q in v[s]]
        post = [q for s in reversed(seq[:dd]) for q in v[s]]
        parts = []
        if per:
            parts.append(OmegaBar(_concat(_seq(per))))
        parts.extend(_seq(post))
        right[p] = parts
    triples = set()
    for p in comp:
        word = out[p]
        inside = [i for i, q in enumerate(word) if q in members]
        for i, j in zip(inside, inside[1:]):
            triples.add((word[i], tuple(word[i + 1:j]), word[j]))
    # between consecutive occurrences of s and t lie the tail of s, y, and the head of t
    elements = []
    for s, y, t in sorted(triples):
        e = _concat(right[s] + _seq(y) + left[t])
        if e is not None and e not in elements:
            elements.append(e)
    for p in comp:
        parts = list(left[p])
        if elements:
            parts.append(Shuffle(elements))
        parts.extend(right[p])
        if not parts:
            raise EmptyLanguage("component without exits")
        rhs[p] = _concat(parts)
