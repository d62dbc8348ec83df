"""Brute-force reference implementations used to check the deciders.

Everything here works on explicit expansions and shares no code with the
package beyond the data classes.
"""

from regiso.automata import Alphabet, Dfa, Nfa, PartitionedDfa
from regiso.words import Concat, Symbol, Var


def language(a: Nfa, limit=10**5) -> list:
    """All accepted words of an acyclic automaton (as tuples of symbols)."""
    succ = {}
    for p, s, q in a.transitions:
        succ.setdefault(p, []).append((s, q))
    out = set()
    if a.initial is None:
        return []
    stack = [(a.initial, ())]
    while stack:
        p, w = stack.pop()
        if p in a.finals:
            out.add(w)
            if len(out) > limit:
                raise RuntimeError("language too large for the oracle")
        for s, q in succ.get(p, ()):
            stack.append((q, w + (s,)))
    return sorted(out)


def _children(words):
    ws = set(words)
    kids = {w: [] for w in ws}
    for w in ws:
        for k in range(len(w) - 1, -1, -1):
            if w[:k] in ws:
                kids[w[:k]].append(w)
                break
    return kids


def ahu_code(words) -> str:
    """Unordered AHU code of the tree of a finite language containing the empty word."""
    kids = _children(words)
    memo = {}
    for w in sorted(kids, key=len, reverse=True):
        memo[w] = "(" + "".join(sorted(memo[c] for c in kids[w])) + ")"
    return memo[()]


def ordered_ahu_code(words, alphabet: Alphabet) -> str:
    """AHU code keeping siblings in lexicographic order."""
    kids = _children(words)
    memo = {}
    for w in sorted(kids, key=len, reverse=True):
        cs = sorted(kids[w], key=alphabet.word_key)
        memo[w] = "(" + "".join(memo[c] for c in cs) + ")"
    return memo[()]


def colored_word(p: PartitionedDfa) -> list:
    """Colors of the accepted words listed in lexicographic order."""
    ws = language(p.dfa)
    ws.sort(key=p.dfa.alphabet.word_key)
    out = []
    for w in ws:
        q = p.dfa.initial
        for s in w:
            q = p.dfa.delta[(q, s)]
        out.append(p.color_of[q])
    return out


def expand_finite(s, x) -> list:
    """Explicit value of a variable whose definition uses only concatenation."""
    memo = {}

    def go(e):
        if isinstance(e, Symbol):
            return [e.token]
        if isinstance(e, Var):
            if e.name not in memo:
                memo[e.name] = go(s.rhs[e.name])
            return memo[e.name]
        if isinstance(e, Concat):
            out = []
            for it in e.items:
                out += go(it)
            return out
        raise ValueError(f"not a finite expression: {e!r}")
    return go(Var(x))


def biray_window_eq(t1, t2) -> bool:
    """Is u1^omegabar v1 w1^omega a shift of u2^omegabar v2 w2^omega?  Strings of one length l.

    A word that is not periodic everywhere breaks its left period within
    3l letters of v, so aligning shifts lie in [-3l, 3l]; outside a window of
    7l letters to either side both words are l-periodic, so comparing the
    window decides equality.
    """
    n = len(t1[0])
    m = 7 * n

    def window(u, v, w):
        # positions -m .. m+n-1 (v occupies 0 .. n-1)
        return u * (m // n) + v + w * (m // n)

    a, b = window(*t1), window(*t2)
    for k in range(-3 * n, 3 * n + 1):
        # compare a[i] with b[i + k] where both exist
        lo = max(0, -k)
        hi = min(len(a), len(b) - k)
        if a[lo:hi] == b[lo + k:hi + k]:
            return True
    return False


def is_universal(k: Nfa) -> bool:
    """Does k accept every word over its alphabet?  Subset search for a rejecting set."""
    if k.initial is None:
        return False
    succ = {}
    for p, s, q in k.transitions:
        succ.setdefault((p, s), set()).add(q)
    start = frozenset([k.initial])
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        if not cur & k.finals:
            return False
        for s in k.alphabet:
            nxt = frozenset(q for p in cur for q in succ.get((p, s), ()))
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return True


def eval_circuit(c) -> bool:
    val = {}
    for i, layer in enumerate(c.layers):
        for g in layer:
            if c.kinds[i] == "input":
                val[g] = c.inputs[g]
            else:
                x, y = (val[h] for h in c.inputs[g])
                val[g] = x and y if c.kinds[i] == "and" else x or y
    return val[c.layers[-1][0]]


# ---------------------------------------------------------------------------
# random automata


def random_acyclic_dfa(rng, n, alphabet, root_final=True) -> Dfa:
    trans = set()
    for p in range(n):
        for s in alphabet:
            if p + 1 < n and rng.random() < 0.55:
                trans.add((p, s, rng.randrange(p + 1, n)))
    finals = {q for q in range(n) if rng.random() < 0.6}
    if root_final:
        finals.add(0)
    return Dfa(n, Alphabet(tuple(alphabet)), trans, 0, finals)


def random_acyclic_nfa(rng, n, alphabet) -> Nfa:
    trans = set()
    for p in range(n):
        for s in alphabet:
            for q in range(p + 1, n):
                if rng.random() < 0.35:
                    trans.add((p, s, q))
    finals = {0} | {q for q in range(n) if rng.random() < 0.6}
    return Nfa(n, Alphabet(tuple(alphabet)), trans, 0, finals)


def relabel(a, rng, keep_order=False):
    """Isomorphic copy: states permuted, symbols renamed (order kept if asked)."""
    n = a.state_count
    perm = list(range(n))
    rng.shuffle(perm)
    syms = list(a.alphabet)
    fresh = [f"s{i}" for i in range(len(syms))]
    if not keep_order:
        rng.shuffle(fresh)
    ren = dict(zip(syms, fresh))
    trans = {(perm[p], ren[s], perm[q]) for p, s, q in a.transitions}
    cls = Dfa if isinstance(a, Dfa) else Nfa
    return cls(n, Alphabet(tuple(f"s{i}" for i in range(len(syms)))), trans,
               perm[a.initial], {perm[q] for q in a.finals})


def random_prefix_closed_dfa(rng, n, alphabet) -> Dfa:
    """Every state final and reachable; cycles allowed."""
    trans = set()
    for q in range(1, n):
        p = rng.randrange(q)
        s = rng.choice([c for c in alphabet if not any(t[0] == p and t[1] == c for t in trans)]
                       or [None])
        if s is None:
            n = q
            break
        trans.add((p, s, q))
    for p in range(n):
        for s in alphabet:
            if not any(t[0] == p and t[1] == s for t in trans) and rng.random() < 0.3:
                trans.add((p, s, rng.randrange(n)))
    return Dfa(n, Alphabet(tuple(alphabet)), trans, 0, set(range(n)))


def unfold_twice(a: Dfa) -> Dfa:
    """Language-equal DFA with two copies of every state (product with a parity bit)."""
    n = a.state_count
    trans = set()
    for p, s, q in a.transitions:
        for b in (0, 1):
            trans.add((p + n * b, s, q + n * (1 - b)))
    return Dfa(2 * n, a.alphabet, trans, a.initial,
               set(a.finals) | {q + n for q in a.finals})


def random_nfa(rng, n, alphabet="ab", density=0.4) -> Nfa:
    trans = {(p, s, q) for p in range(n) for s in alphabet for q in range(n)
             if rng.random() < density}
    finals = {q for q in range(n) if rng.random() < 0.5}
    return Nfa(n, Alphabet(tuple(alphabet)), trans, 0, finals)


def ray_eq(v1, w1, v2, w2) -> bool:
    """v1 w1^omega == v2 w2^omega, by comparing a prefix long enough to cover both periods."""
    from math import lcm
    n = max(len(v1), len(v2)) + lcm(len(w1), len(w2))

    def prefix(v, w):
        s = v
        while len(s) < n:
            s += w
        return s[:n]
    return prefix(v1, w1) == prefix(v2, w2)


def biinfinite_eq(t1, t2) -> bool:
    """u1^omegabar v1 w1^omega is a shift of u2^omegabar v2 w2^omega (any lengths)."""
    from math import lcm
    (u1, v1, w1), (u2, v2, w2) = t1, t2
    p = lcm(len(u1), len(w1), len(u2), len(w2))
    m = len(v1) + len(v2) + 3 * p
    reach = 3 * m

    def window(u, v, w):
        left = u * (reach // len(u) + 1)
        right = w * (reach // len(w) + 1)
        return left[-reach:] + v + right[:reach], reach

    a, oa = window(*t1)
    b, ob = window(*t2)
    for k in range(-m, m + 1):
        # a position i (relative to v1) meets b position i + k (relative to v2)
        lo = max(-oa, -ob - k)
        hi = min(len(a) - oa, len(b) - ob - k)
        if a[lo + oa:hi + oa] == b[lo + ob + k:hi + ob + k]:
            return True
    return False
