"""Finite automata, transducers and the basic operations on them.

State ids are always dense naturals ``0..n-1``.  Symbols are plain string
tokens; the declaration order of an :class:`Alphabet` is the letter order
used for lexicographic comparisons.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional

from .errors import EmptyLanguage, InvalidInput, ResourceLimit

INFINITE = float("inf")
DEFAULT_CAP = 65536

# reserved by the dead-end transform
END_MARKER = "$"


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise InvalidInput("alphabet must be nonempty")
        if len(set(syms)) != len(syms):
            raise InvalidInput("alphabet has duplicate symbols")

    @cached_property
    def rank(self) -> dict:
        return {s: i for i, s in enumerate(self.symbols)}

    def __contains__(self, sym) -> bool:
        return sym in self.rank

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def word_key(self, word) -> tuple:
        """Sort key for words under the prefix-extended lexicographic order."""
        return tuple(self.rank[s] for s in word)


@dataclass(frozen=True)
class Nfa:
    state_count: int
    alphabet: Alphabet
    transitions: frozenset
    initial: Optional[int]
    finals: frozenset

    def __post_init__(self):
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "finals", frozenset(self.finals))
        n = self.state_count
        for p, s, q in self.transitions:
            if not (0 <= p < n and 0 <= q < n):
                raise InvalidInput(f"transition ({p}, {s}, {q}) uses a state out of range")
            if s not in self.alphabet:
                raise InvalidInput(f"symbol {s!r} not in alphabet")
        if self.initial is not None and not 0 <= self.initial < n:
            raise InvalidInput(f"initial state {self.initial} out of range")
        for f in self.finals:
            if not 0 <= f < n:
                raise InvalidInput(f"final state {f} out of range")

    @cached_property
    def successors(self) -> list:
        """successors[p] = list of (symbol, target) sorted by symbol rank then target."""
        out = [[] for _ in range(self.state_count)]
        for p, s, q in self.transitions:
            out[p].append((s, q))
        rank = self.alphabet.rank
        for lst in out:
            lst.sort(key=lambda e: (rank[e[0]], e[1]))
        return out

    def is_deterministic(self) -> bool:
        seen = set()
        for p, s, _ in self.transitions:
            if (p, s) in seen:
                return False
            seen.add((p, s))
        return True


@dataclass(frozen=True)
class Dfa(Nfa):
    def __post_init__(self):
        super().__post_init__()
        if not self.is_deterministic():
            raise InvalidInput("DFA has two transitions for the same state and symbol")

    @cached_property
    def delta(self) -> dict:
        return {(p, s): q for p, s, q in self.transitions}

    def step(self, p, s):
        return self.delta.get((p, s))


@dataclass(frozen=True)
class PartitionedDfa:
    dfa: Dfa
    color_alphabet: Alphabet
    color_of: dict = field(hash=False)

    def __post_init__(self):
        if set(self.color_of) != set(self.dfa.finals):
            raise InvalidInput("every final state needs exactly one color")
        for c in self.color_of.values():
            if c not in self.color_alphabet:
                raise InvalidInput(f"color {c!r} not in color alphabet")


@dataclass(frozen=True)
class RationalTransducer:
    state_count: int
    input_alphabet: Alphabet
    output_alphabet: Alphabet
    transitions: frozenset  # (source, input symbol, output tuple, target)
    initial: int
    finals: frozenset

    def __post_init__(self):
        object.__setattr__(self, "transitions",
                           frozenset((p, s, tuple(w), q) for p, s, w, q in self.transitions))
        object.__setattr__(self, "finals", frozenset(self.finals))
        n = self.state_count
        for p, s, w, q in self.transitions:
            if not (0 <= p < n and 0 <= q < n):
                raise InvalidInput("transducer transition uses a state out of range")
            if s not in self.input_alphabet:
                raise InvalidInput(f"input symbol {s!r} not in alphabet")
            if not w:
                raise InvalidInput("transducer outputs must be nonempty")
            for o in w:
                if o not in self.output_alphabet:
                    raise InvalidInput(f"output symbol {o!r} not in output alphabet")
        if not 0 <= self.initial < n:
            raise InvalidInput("transducer initial state out of range")


@dataclass(frozen=True)
class SccOrder:
    components: tuple  # tuples of state ids, sources first
    cyclic: tuple  # parallel flags: component carries a cycle

    def __len__(self):
        return len(self.components)


# ---------------------------------------------------------------------------
# basic helpers


def accessible_states(a: Nfa) -> set:
    if a.initial is None:
        return set()
    seen = {a.initial}
    todo = [a.initial]
    succ = a.successors
    while todo:
        p = todo.pop()
        for _, q in succ[p]:
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def coaccessible_states(a: Nfa) -> set:
    pred = [[] for _ in range(a.state_count)]
    for p, _, q in a.transitions:
        pred[q].append(p)
    seen = set(a.finals)
    todo = list(seen)
    while todo:
        q = todo.pop()
        for p in pred[q]:
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


def restrict(a: Nfa, keep: Iterable[int]):
    """Sub-automaton induced by `keep`, renumbered densely in id order."""
    keep = sorted(set(keep))
    new = {old: i for i, old in enumerate(keep)}
    trans = {(new[p], s, new[q]) for p, s, q in a.transitions if p in new and q in new}
    init = new.get(a.initial) if a.initial is not None else None
    finals = {new[f] for f in a.finals if f in new}
    return type(a)(len(keep), a.alphabet, trans, init, finals), new


def trim(a: Nfa):
    """Keep only accessible and coaccessible states."""
    useful = accessible_states(a) & coaccessible_states(a)
    return restrict(a, useful)[0]


def trim_pdfa(p: PartitionedDfa) -> PartitionedDfa:
    useful = accessible_states(p.dfa) & coaccessible_states(p.dfa)
    d, new = restrict(p.dfa, useful)
    colors = {new[f]: c for f, c in p.color_of.items() if f in new}
    return PartitionedDfa(d, p.color_alphabet, colors)


def accepts(a: Nfa, word) -> bool:
    if a.initial is None:
        return False
    cur = {a.initial}
    for s in word:
        cur = {q for p in cur for t, q in a.successors[p] if t == s}
        if not cur:
            return False
    return bool(cur & a.finals)


def words_upto(a: Nfa, max_len: int) -> set:
    """All accepted words (as tuples) of length at most max_len."""
    out = set()
    if a.initial is None:
        return out
    layer = {((), a.initial)}
    for depth in range(max_len + 1):
        nxt = set()
        for w, p in layer:
            if p in a.finals:
                out.add(w)
            if depth < max_len:
                for s, q in a.successors[p]:
                    nxt.add((w + (s,), q))
        layer = nxt
    return out


def finite_language(a: Nfa, limit: int = 10**6) -> list:
    """Explicit list of words of a finite language (acyclic after trimming)."""
    t = trim(a)
    if t.initial is None:
        return []
    if not is_acyclic(t):
        raise InvalidInput("language is infinite")
    out = set()
    stack = [((), t.initial)]
    while stack:
        w, p = stack.pop()
        if p in t.finals:
            out.add(w)
            if len(out) > limit:
                raise ResourceLimit(f"more than {limit} words")
        for s, q in t.successors[p]:
            stack.append((w + (s,), q))
    return sorted(out, key=a.alphabet.word_key)


def dfa_from_words(words: Iterable, alphabet: Alphabet) -> Dfa:
    """Trie automaton for a finite set of words."""
    trans = {}
    finals = set()
    count = 1
    for w in words:
        p = 0
        for s in w:
            if (p, s) not in trans:
                trans[(p, s)] = count
                count += 1
            p = trans[(p, s)]
        finals.add(p)
    return Dfa(count, alphabet, {(p, s, q) for (p, s), q in trans.items()}, 0, finals)


# ---------------------------------------------------------------------------
# operations


def prefix_closure(a: Nfa) -> Nfa:
    """Automaton for the set of prefixes of L(a); every state is final."""
    t = trim(a)
    if t.initial is None:
        raise EmptyLanguage("prefix closure of the empty language")
    return type(t)(t.state_count, t.alphabet, t.transitions, t.initial, range(t.state_count))


def determinize(a: Nfa, cap: int = DEFAULT_CAP) -> Dfa:
    """Accessible subset construction, limited to `cap` subset-states."""
    if a.initial is None:
        raise InvalidInput("determinize needs an initial state")
    succ = a.successors
    start = frozenset([a.initial])
    index = {start: 0}
    order = [start]
    trans = set()
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        i = index[cur]
        moves = {}
        for p in cur:
            for s, q in succ[p]:
                moves.setdefault(s, set()).add(q)
        for s in a.alphabet:
            if s not in moves:
                continue
            tgt = frozenset(moves[s])
            if tgt not in index:
                if len(order) >= cap:
                    raise ResourceLimit(
                        f"subset construction exceeded {cap} states (raise --cap)")
                index[tgt] = len(order)
                order.append(tgt)
                queue.append(tgt)
            trans.add((i, s, index[tgt]))
    finals = {i for i, st in enumerate(order) if st & a.finals}
    return Dfa(len(order), a.alphabet, trans, 0, finals)


def _topo_order(a: Nfa):
    """Topological order of all states, or None if there is a cycle."""
    indeg = [0] * a.state_count
    for _, _, q in a.transitions:
        indeg[q] += 1
    ready = [p for p in range(a.state_count) if indeg[p] == 0]
    order = []
    while ready:
        p = ready.pop()
        order.append(p)
        for _, q in a.successors[p]:
            indeg[q] -= 1
            if indeg[q] == 0:
                ready.append(q)
    return order if len(order) == a.state_count else None


def count_language(a: Dfa):
    """Number of accepted words; ``INFINITE`` if the trimmed automaton has a cycle.

    Counts accepting paths, which equals |L| for deterministic input.
    """
    t = trim(a)
    if t.initial is None:
        return 0
    order = _topo_order(t)
    if order is None:
        return INFINITE
    paths = [0] * t.state_count
    for p in reversed(order):
        c = 1 if p in t.finals else 0
        for _, q in t.successors[p]:
            c += paths[q]
        paths[p] = c
    return paths[t.initial]


def transducer_image(a: Nfa, t: RationalTransducer) -> Nfa:
    """Prefix-closed NFA for pref(t(L(a))) by product construction."""
    ta = trim(a)
    if ta.initial is None:
        raise EmptyLanguage("input language is empty")
    if len(ta.finals) != ta.state_count:
        raise InvalidInput("transducer_image expects a prefix-closed automaton")
    by_input = {}
    for p, s, w, q in t.transitions:
        by_input.setdefault((p, s), []).append((w, q))
    index = {}
    order = []

    def state(pair):
        if pair not in index:
            index[pair] = len(order)
            order.append(pair)
        return index[pair]

    start = state((ta.initial, t.initial))
    trans = set()
    # fresh chain states are numbered after the product states
    chains = []
    todo = [(ta.initial, t.initial)]
    seen = {todo[0]}
    while todo:
        pa, pt = todo.pop()
        src = index[(pa, pt)]
        for s, qa in ta.successors[pa]:
            for w, qt in sorted(by_input.get((pt, s), ())):
                tgt_pair = (qa, qt)
                state(tgt_pair)
                chains.append((src, w, tgt_pair))
                if tgt_pair not in seen:
                    seen.add(tgt_pair)
                    todo.append(tgt_pair)
    n = len(order)
    for src, w, tgt_pair in chains:
        cur = src
        for o in w[:-1]:
            trans.add((cur, o, n))
            cur = n
            n += 1
        trans.add((cur, w[-1], index[tgt_pair]))
    finals = {index[pr] for pr in order if pr[1] in t.finals}
    out = Nfa(n, t.output_alphabet, trans, start, finals)
    return prefix_closure(out)


def scc_topological(a: Nfa) -> SccOrder:
    """SCCs of the accessible part, sources first, ties broken by smallest state id."""
    acc = accessible_states(a)
    succ = a.successors
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = 0
    for root in sorted(acc):
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            pushed = False
            for _, w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    pushed = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if pushed:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(sorted(comp)))
    comp_of = {}
    for i, c in enumerate(comps):
        for p in c:
            comp_of[p] = i
    edges = [set() for _ in comps]
    indeg = [0] * len(comps)
    cyclic = [False] * len(comps)
    for p in acc:
        for _, q in succ[p]:
            cp, cq = comp_of[p], comp_of[q]
            if cp == cq:
                cyclic[cp] = True
            elif cq not in edges[cp]:
                edges[cp].add(cq)
                indeg[cq] += 1
    heap = [(c[0], i) for i, c in enumerate(comps) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, i = heapq.heappop(heap)
        out.append(i)
        for j in edges[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (comps[j][0], j))
    return SccOrder(tuple(comps[i] for i in out), tuple(cyclic[i] for i in out))


def is_acyclic(a: Nfa) -> bool:
    acc = accessible_states(a)
    sub, _ = restrict(a, acc)
    return _topo_order(sub) is not None


# ---------------------------------------------------------------------------
# text format

_KEYS = {"type", "alphabet", "output", "states", "initial", "finals", "colors", "trans"}


def _tokenize_output(word: str, out_alpha: Optional[Alphabet]):
    if "," in word:
        return tuple(x for x in word.split(",") if x)
    if out_alpha is None:
        return tuple(word)
    syms = sorted(out_alpha.symbols, key=len, reverse=True)
    res = []
    i = 0
    while i < len(word):
        for s in syms:
            if word.startswith(s, i):
                res.append(s)
                i += len(s)
                break
        else:
            raise InvalidInput(f"cannot split output word {word!r}")
    return tuple(res)


def _int(tok, what):
    try:
        return int(tok)
    except ValueError:
        raise InvalidInput(f"{what}: expected a state number, got {tok!r}") from None


def parse_automaton(text: str, allow_marker: bool = False):
    """Parse the line-based automaton format into Nfa, Dfa, PartitionedDfa or RationalTransducer."""
    fields = {}
    trans_lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise InvalidInput(f"line {lineno}: expected 'key: value'")
        key, val = line.split(":", 1)
        key = key.strip()
        val = val.strip()
        if key not in _KEYS:
            raise InvalidInput(f"line {lineno}: unknown key {key!r}")
        if key == "trans":
            trans_lines.append((lineno, val.split()))
        elif key in fields:
            raise InvalidInput(f"line {lineno}: duplicate key {key!r}")
        else:
            fields[key] = val
    kind = fields.get("type")
    if kind not in ("nfa", "dfa", "pdfa", "transducer"):
        raise InvalidInput(f"unknown or missing type {kind!r}")
    if "alphabet" not in fields or "states" not in fields:
        raise InvalidInput("alphabet and states are required")
    alpha = Alphabet(tuple(fields["alphabet"].split()))
    if not allow_marker and END_MARKER in alpha:
        raise InvalidInput(f"symbol {END_MARKER!r} is reserved")
    n = _int(fields["states"], "states")
    if n < 0:
        raise InvalidInput("negative state count")
    initial = None
    if "initial" in fields and fields["initial"]:
        initial = _int(fields["initial"], "initial")

    def check_state(q, lineno):
        if not 0 <= q < n:
            raise InvalidInput(f"line {lineno}: state {q} out of range")
        return q

    if kind == "transducer":
        out_alpha = Alphabet(tuple(fields["output"].split())) if "output" in fields else None
        trans = set()
        for lineno, parts in trans_lines:
            if len(parts) != 4:
                raise InvalidInput(f"line {lineno}: transducer trans needs 4 fields")
            p = check_state(_int(parts[0], "trans"), lineno)
            q = check_state(_int(parts[3], "trans"), lineno)
            trans.add((p, parts[1], _tokenize_output(parts[2], out_alpha), q))
        if out_alpha is None:
            seen = []
            for _, _, w, _ in sorted(trans):
                for o in w:
                    if o not in seen:
                        seen.append(o)
            out_alpha = Alphabet(tuple(seen) or ("_",))
        finals = {check_state(_int(x, "finals"), 0) for x in fields.get("finals", "").split()}
        if initial is None:
            raise InvalidInput("transducer needs an initial state")
        return RationalTransducer(n, alpha, out_alpha, trans, initial, finals)

    trans = set()
    seen_keys = set()
    for lineno, parts in trans_lines:
        if len(parts) != 3:
            raise InvalidInput(f"line {lineno}: trans needs 3 fields")
        p = check_state(_int(parts[0], "trans"), lineno)
        q = check_state(_int(parts[2], "trans"), lineno)
        if parts[1] not in alpha:
            raise InvalidInput(f"line {lineno}: symbol {parts[1]!r} not in alphabet")
        if kind in ("dfa", "pdfa"):
            if (p, parts[1]) in seen_keys:
                raise InvalidInput(f"line {lineno}: duplicate DFA transition")
            seen_keys.add((p, parts[1]))
        trans.add((p, parts[1], q))
    if kind == "pdfa":
        if "finals" in fields:
            raise InvalidInput("pdfa uses colors: instead of finals:")
        colors = []
        color_of = {}
        for item in fields.get("colors", "").split():
            if "=" not in item:
                raise InvalidInput(f"bad color item {item!r}")
            name, states = item.split("=", 1)
            if name not in colors:
                colors.append(name)
            for tok in states.split(","):
                if not tok:
                    continue
                q = check_state(_int(tok, "colors"), 0)
                if q in color_of and color_of[q] != name:
                    raise InvalidInput(f"state {q} has two colors")
                color_of[q] = name
        if not colors:
            raise InvalidInput("pdfa needs at least one color")
        d = Dfa(n, alpha, trans, initial, set(color_of))
        return PartitionedDfa(d, Alphabet(tuple(colors)), color_of)
    if "colors" in fields:
        raise InvalidInput("colors: only allowed for pdfa")
    finals = {check_state(_int(x, "finals"), 0) for x in fields.get("finals", "").split()}
    cls = Dfa if kind == "dfa" else Nfa
    return cls(n, alpha, trans, initial, finals)


def format_automaton(obj) -> str:
    """Inverse of :func:`parse_automaton`."""
    lines = []
    if isinstance(obj, RationalTransducer):
        lines.append("type: transducer")
        lines.append("alphabet: " + " ".join(obj.input_alphabet))
        lines.append("output: " + " ".join(obj.output_alphabet))
        lines.append(f"states: {obj.state_count}")
        lines.append(f"initial: {obj.initial}")
        lines.append("finals: " + " ".join(map(str, sorted(obj.finals))))
        for p, s, w, q in sorted(obj.transitions):
            lines.append(f"trans: {p} {s} {','.join(w)} {q}")
        return "\n".join(lines) + "\n"
    if isinstance(obj, PartitionedDfa):
        a = obj.dfa
        lines.append("type: pdfa")
    else:
        a = obj
        lines.append("type: dfa" if isinstance(a, Dfa) else "type: nfa")
    lines.append("alphabet: " + " ".join(a.alphabet))
    lines.append(f"states: {a.state_count}")
    if a.initial is not None:
        lines.append(f"initial: {a.initial}")
    if isinstance(obj, PartitionedDfa):
        items = []
        for c in obj.color_alphabet:
            qs = sorted(q for q, col in obj.color_of.items() if col == c)
            items.append(f"{c}=" + ",".join(map(str, qs)))
        lines.append("colors: " + " ".join(items))
    else:
        lines.append("finals: " + " ".join(map(str, sorted(a.finals))))
    rank = a.alphabet.rank
    for p, s, q in sorted(a.transitions, key=lambda t: (t[0], rank[t[1]], t[2])):
        lines.append(f"trans: {p} {s} {q}")
    return "\n".join(lines) + "\n"

