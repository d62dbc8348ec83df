"""Isomorphism of unordered regular trees (L; prefix order).

The nodes of the tree presented by an automaton A are the words of L(A); the
parent of a word is its longest proper prefix that also lies in L(A).  Two
final states p, q are equivalent when the subtrees below them are
isomorphic.  Equivalence is found by partition refinement on the final
states, splitting classes by the number of "child words" leading into each
class.
"""

from __future__ import annotations

from dataclasses import dataclass

from .automata import (
    DEFAULT_CAP, INFINITE, Alphabet, Dfa, Nfa, count_language, determinize, is_acyclic, trim,
)
from .errors import InvalidInput, ResourceLimit

DEFAULT_EXPANSION_CAP = 200000


@dataclass(frozen=True)
class TreePartition:
    classes: tuple  # sorted tuples of final states, ordered by smallest member

    @property
    def class_id(self) -> dict:
        return {q: i for i, c in enumerate(self.classes) for q in c}

    @staticmethod
    def of(groups) -> "TreePartition":
        cls = sorted(tuple(sorted(g)) for g in groups if g)
        return TreePartition(tuple(cls))


@dataclass(frozen=True)
class ChildCountProfile:
    counts: dict  # (state, class index) -> int or INFINITE

    def signature(self, p, nclasses) -> tuple:
        return tuple(self.counts[(p, i)] for i in range(nclasses))


def k_automaton(a: Nfa, p: int, c) -> Dfa:
    """Automaton for the words leading from final state p into c without passing a final state."""
    if p not in a.finals:
        raise InvalidInput(f"state {p} is not final")
    c = set(c)
    if not c <= a.finals:
        raise InvalidInput("target set must consist of final states")
    n = a.state_count
    trans = {(s, x, t) for s, x, t in a.transitions if s not in a.finals}
    trans |= {(n, x, t) for s, x, t in a.transitions if s == p}
    return Dfa(n + 1, a.alphabet, trans, n, c)


def child_count_matrix(a: Nfa) -> dict:
    """n(p, q) for all final p, q, computed by path counting directly.

    Equivalent to count_language(k_automaton(a, p, {q})) but shares work across
    all pairs.  Values are ints or INFINITE.
    """
    finals = sorted(a.finals)
    succ = a.successors
    cyc = _cyclic_inner_states(a)
    matrix = {}
    for q in finals:
        # memo[v] = number of paths from non-final v into q through non-finals;
        # states of co reaching a cycle inside co give infinitely many
        co = _coreach_inner(a, q)
        memo = {}
        bad = set()
        on_cycle = co & cyc
        if on_cycle:
            bad = _reach_backwards(a, on_cycle, co)
        for v in _topo_inner(a, co - bad):
            total = 0
            for _, w in succ[v]:
                if w == q:
                    total += 1
                elif w in bad:
                    total = INFINITE
                    break
                elif w in co:
                    total += memo[w]
            memo[v] = total
        for p in finals:
            total = 0
            for _, w in succ[p]:
                if w == q:
                    total += 1
                elif w in bad:
                    total = INFINITE
                    break
                elif w in memo:
                    total += memo[w]
            matrix[(p, q)] = total
    return matrix


def _cyclic_inner_states(a):
    # non-final states lying on a cycle of non-final states
    nonfinal = [q for q in range(a.state_count) if q not in a.finals]
    sub = set(nonfinal)
    return {v for v in nonfinal if _cycle_within(a, v, sub)}


def _cycle_within(a, v, allowed):
    seen = set()
    stack = [w for _, w in a.successors[v] if w in allowed]
    while stack:
        w = stack.pop()
        if w == v:
            return True
        if w in seen:
            continue
        seen.add(w)
        stack.extend(x for _, x in a.successors[w] if x in allowed)
    return False


def _coreach_inner(a, q):
    pred = {}
    for s, _, t in a.transitions:
        pred.setdefault(t, []).append(s)
    out = set()
    stack = [s for s in pred.get(q, []) if s not in a.finals]
    while stack:
        v = stack.pop()
        if v in out:
            continue
        out.add(v)
        stack.extend(s for s in pred.get(v, []) if s not in a.finals and s not in out)
    return out


def _reach_backwards(a, seeds, allowed):
    pred = {}
    for s, _, t in a.transitions:
        pred.setdefault(t, []).append(s)
    out = set(seeds)
    stack = list(seeds)
    while stack:
        v = stack.pop()
        for s in pred.get(v, []):
            if s in allowed and s not in out:
                out.add(s)
                stack.append(s)
    return out


def _topo_inner(a, nodes):
    # reverse topological order (sinks first) of an acyclic node set
    order = []
    seen = set()
    for root in sorted(nodes):
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, iter(a.successors[root]))]
        while stack:
            v, it = stack[-1]
            for _, w in it:
                if w in nodes and w not in seen:
                    seen.add(w)
                    stack.append((w, iter(a.successors[w])))
                    break
            else:
                stack.pop()
                order.append(v)
    return order


def child_count_profile(a: Nfa, r: TreePartition, matrix=None) -> ChildCountProfile:
    """n(p, C) for every final p and class C of r."""
    counts = {}
    for p in sorted(a.finals):
        for i, cls in enumerate(r.classes):
            if matrix is None:
                counts[(p, i)] = count_language(k_automaton(a, p, cls))
            else:
                counts[(p, i)] = sum(matrix[(p, q)] for q in cls)
    return ChildCountProfile(counts)


def refine_step(a: Nfa, r: TreePartition, matrix=None) -> TreePartition:
    """Split every class of r by the child-count signature of its members."""
    prof = child_count_profile(a, r, matrix)
    k = len(r.classes)
    groups = []
    for cls in r.classes:
        buckets = {}
        for p in cls:
            buckets.setdefault(prof.signature(p, k), []).append(p)
        groups.extend(buckets.values())
    return TreePartition.of(groups)


def coarsest_partition(a: Nfa, matrix=None) -> TreePartition:
    """Iterate refine_step from the one-class partition to its fixpoint."""
    if matrix is None:
        matrix = child_count_matrix(a)
    r = TreePartition.of([a.finals])
    while True:
        nxt = refine_step(a, r, matrix)
        if nxt == r:
            return r
        r = nxt


def _disjoint_union(a1: Nfa, a2: Nfa):
    if a1.alphabet != a2.alphabet:
        syms = list(a1.alphabet.symbols)
        syms += [s for s in a2.alphabet.symbols if s not in a1.alphabet]
        alpha = Alphabet(tuple(syms))
    else:
        alpha = a1.alphabet
    n1 = a1.state_count
    trans = set(a1.transitions) | {(p + n1, s, q + n1) for p, s, q in a2.transitions}
    finals = set(a1.finals) | {f + n1 for f in a2.finals}
    return Dfa(n1 + a2.state_count, alpha, trans, None, finals), n1


def _rooted(a: Nfa, what: str):
    t = trim(a)
    if t.initial is None or t.initial not in t.finals:
        raise InvalidInput(f"{what}: the empty word must be accepted")
    return t


def tree_iso_dfa(a1: Dfa, a2: Dfa) -> bool:
    """Decide (L(a1); prefix order) isomorphic to (L(a2); prefix order)."""
    t1 = _rooted(a1, "first automaton")
    t2 = _rooted(a2, "second automaton")
    u, shift = _disjoint_union(t1, t2)
    r = coarsest_partition(u)
    cid = r.class_id
    return cid[t1.initial] == cid[t2.initial + shift]


def tree_iso_nfa(a1: Nfa, a2: Nfa, cap: int = DEFAULT_CAP) -> bool:
    return tree_iso_dfa(determinize(a1, cap), determinize(a2, cap))


def finite_tree_canon(a: Nfa, cap: int = DEFAULT_EXPANSION_CAP) -> str:
    """Canonical parenthesis code of the finite tree presented by an acyclic automaton."""
    t = trim(a)
    if t.initial is None or t.initial not in t.finals:
        raise InvalidInput("the empty word must be accepted")
    if not is_acyclic(t):
        raise InvalidInput("automaton must be acyclic")
    succ = t.successors
    budget = [cap]

    def step(subset, sym):
        return frozenset(q for p in subset for s, q in succ[p] if s == sym)

    def below(subset):
        # codes of the topmost accepted words strictly below the current prefix
        out = []
        syms = []
        for p in subset:
            for s, _ in succ[p]:
                if s not in syms:
                    syms.append(s)
        for s in syms:
            budget[0] -= 1
            if budget[0] < 0:
                raise ResourceLimit(f"tree expansion exceeded {cap} nodes (raise --cap)")
            nxt = step(subset, s)
            if nxt & t.finals:
                out.append(code(nxt))
            else:
                out.extend(below(nxt))
        return out

    def code(subset):
        return "(" + "".join(sorted(below(subset))) + ")"

    return code(frozenset([t.initial]))
