"""Straight-line programs: compressed finite words.

An :class:`Slp` is a node of a binary DAG.  Leaves carry one terminal
symbol; inner nodes concatenate their two children.  Every node derives a
nonempty word.  Lengths are Python ints, so words of length 2**100 are fine.

Equality is exact.  Short words are compared by expansion.  Longer ones go
through a polynomial fingerprint, which can only prove inequality; equal
fingerprints are confirmed by recompression (block and pair compression
applied to both grammars in lockstep until the roots become explicit).

Factor queries use a dynamic program over pairs (pattern node, text node)
that tracks the arithmetic progression of pattern occurrences crossing the
split point of the text node.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Optional

from .errors import InvalidInput, OutOfRange

# words up to this length are compared and searched by explicit expansion
EXPAND_EQ_LIMIT = 4096
EXPAND_FACTOR_LIMIT = 10**6
# nodes at most this long keep their expansion cached
CACHE_LIMIT = 4096
# window length under which crossing occurrences are found by direct search
DIRECT_WINDOW = 512

_MOD = (1 << 61) - 1
_BASE = 1_000_003_771

_codes: dict = {}
_tokens: dict = {}
_next_private = [0xE000]


def symbol_code(token) -> str:
    """Single character standing for a terminal token inside expansions."""
    c = _codes.get(token)
    if c is not None:
        return c
    if isinstance(token, str) and len(token) == 1 and token not in _tokens:
        c = token
    else:
        while chr(_next_private[0]) in _tokens:
            _next_private[0] += 1
        c = chr(_next_private[0])
        _next_private[0] += 1
    _codes[token] = c
    _tokens[c] = token
    return c


def code_token(c: str):
    return _tokens[c]


class Slp:
    """Node of a binary straight-line program."""

    __slots__ = ("left", "right", "code", "length", "_small", "_fp", "__weakref__")

    def __init__(self, left=None, right=None, code=None):
        self.left = left
        self.right = right
        self.code = code
        self._small = None
        self._fp = None
        if code is not None:
            self.length = 1
            self._small = code
        else:
            self.length = left.length + right.length

    @property
    def is_leaf(self) -> bool:
        return self.code is not None

    @property
    def symbol(self):
        return _tokens[self.code] if self.code is not None else None

    def __repr__(self):
        if self.length <= 40:
            return f"Slp({''.join(map(str, slp_expand(self)))!r})"
        return f"Slp(<length {self.length}>)"


_leaves: dict = {}


def slp_leaf(token) -> Slp:
    c = symbol_code(token)
    node = _leaves.get(c)
    if node is None:
        node = _leaves[c] = Slp(code=c)
    return node


def slp_concat(*parts: Optional[Slp]) -> Optional[Slp]:
    """Concatenation of any number of SLPs; None stands for the empty word."""
    items = [p for p in parts if p is not None]
    if not items:
        return None
    while len(items) > 1:
        nxt = [Slp(items[i], items[i + 1]) for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def slp_from_word(tokens: Iterable) -> Optional[Slp]:
    return slp_concat(*[slp_leaf(t) for t in tokens])


def slp_from_rules(rules: dict, root) -> Slp:
    """Build from rules ``var -> [item, ...]`` where an item is a variable or ``('T', token)``."""
    built = {}
    state = {}
    stack = [root]
    while stack:
        v = stack[-1]
        if v in built:
            stack.pop()
            continue
        if v not in rules:
            raise InvalidInput(f"undefined variable {v!r}")
        if state.get(v) == "open":
            parts = []
            for it in rules[v]:
                if isinstance(it, tuple) and it[0] == "T":
                    parts.append(slp_leaf(it[1]))
                else:
                    parts.append(built[it])
            node = slp_concat(*parts)
            if node is None:
                raise InvalidInput(f"variable {v!r} derives the empty word")
            built[v] = node
            stack.pop()
            continue
        state[v] = "open"
        for it in rules[v]:
            if isinstance(it, tuple) and it[0] == "T":
                continue
            if it not in built:
                if state.get(it) == "open":
                    raise InvalidInput("cyclic straight-line program")
                stack.append(it)
    return built[root]


def slp_length(s: Optional[Slp]) -> int:
    return 0 if s is None else s.length


def _nodes_postorder(roots) -> list:
    seen = set()
    out = []
    for root in roots:
        if root is None or id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, done = stack.pop()
            if done:
                out.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            if node.code is None:
                if id(node.right) not in seen:
                    stack.append((node.right, False))
                if id(node.left) not in seen:
                    stack.append((node.left, False))
    return out


def slp_size(s: Slp) -> int:
    """Number of distinct nodes."""
    return len(_nodes_postorder([s]))


def _small(node: Slp) -> str:
    if node._small is not None:
        return node._small
    for n in _nodes_postorder([node]):
        if n._small is None and n.length <= CACHE_LIMIT:
            n._small = n.left._small + n.right._small
    return node._small


def expand_code(s: Optional[Slp]) -> str:
    """Expansion as a string of symbol codes."""
    if s is None:
        return ""
    if s.length <= CACHE_LIMIT:
        return _small(s)
    parts = []
    stack = [s]
    while stack:
        n = stack.pop()
        if n.length <= CACHE_LIMIT:
            parts.append(_small(n))
        else:
            stack.append(n.right)
            stack.append(n.left)
    return "".join(parts)


def slp_expand(s: Optional[Slp]) -> tuple:
    return tuple(_tokens[c] for c in expand_code(s))


def slp_char_at(s: Slp, i: int):
    """i-th symbol, 1-based."""
    if not 1 <= i <= slp_length(s):
        raise OutOfRange(f"position {i} outside 1..{slp_length(s)}")
    return _tokens[_code_at(s, i - 1)]


def _code_at(node: Slp, k: int) -> str:
    while True:
        if node._small is not None:
            return node._small[k]
        if k < node.left.length:
            node = node.left
        else:
            k -= node.left.length
            node = node.right


def _prefix(node: Slp, n: int) -> Optional[Slp]:
    # first n symbols, 0 <= n <= length
    if n <= 0:
        return None
    parts = []
    while n < node.length:
        if n <= node.left.length:
            node = node.left
        else:
            parts.append(node.left)
            n -= node.left.length
            node = node.right
    parts.append(node)
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Slp(p, out)
    return out


def _suffix(node: Slp, n: int) -> Optional[Slp]:
    # last n symbols
    if n <= 0:
        return None
    parts = []
    while n < node.length:
        if n <= node.right.length:
            node = node.right
        else:
            parts.append(node.right)
            n -= node.right.length
            node = node.left
    out = node
    for p in reversed(parts):
        out = Slp(out, p)
    return out


def sub(node: Optional[Slp], lo: int, hi: int) -> Optional[Slp]:
    """Factor [lo, hi) with 0-based half-open bounds; None when empty."""
    if node is None or hi <= lo:
        return None
    if lo < 0 or hi > node.length:
        raise OutOfRange(f"range [{lo}, {hi}) outside word of length {node.length}")
    while True:
        if lo == 0 and hi == node.length:
            return node
        if node.code is None:
            mid = node.left.length
            if hi <= mid:
                node = node.left
                continue
            if lo >= mid:
                node = node.right
                lo -= mid
                hi -= mid
                continue
            return Slp(_suffix(node.left, mid - lo), _prefix(node.right, hi - mid))
        return node


def slp_slice(s: Slp, i: int, j: int) -> Slp:
    """Factor from position i to j inclusive, 1-based."""
    n = slp_length(s)
    if not 1 <= i <= j <= n:
        raise OutOfRange(f"slice [{i}:{j}] outside 1..{n}")
    return sub(s, i - 1, j)


def slp_power(s: Slp, k: int) -> Slp:
    """s**k by repeated squaring."""
    if k < 1:
        raise InvalidInput("power exponent must be at least 1")
    acc = None
    sq = s
    while True:
        if k & 1:
            acc = sq if acc is None else Slp(acc, sq)
        k >>= 1
        if not k:
            return acc
        sq = Slp(sq, sq)


# ---------------------------------------------------------------------------
# fingerprints


def _fp(node: Slp) -> tuple:
    """(hash, base**length) modulo a Mersenne prime."""
    if node._fp is not None:
        return node._fp
    for n in _nodes_postorder([node]):
        if n._fp is not None:
            continue
        if n.code is not None:
            n._fp = ((ord(n.code) * 2654435761 + 1) % _MOD, _BASE)
        else:
            hl, pl = n.left._fp
            hr, pr = n.right._fp
            n._fp = ((hl * pr + hr) % _MOD, (pl * pr) % _MOD)
    return node._fp


def _prefix_fp(node: Slp, n: int) -> tuple:
    h, p = 0, 1
    while n > 0:
        if n == node.length:
            hn, pn = _fp(node)
            return ((h * pn + hn) % _MOD, (p * pn) % _MOD)
        if n <= node.left.length:
            node = node.left
        else:
            hl, pl = _fp(node.left)
            h = (h * pl + hl) % _MOD
            p = (p * pl) % _MOD
            n -= node.left.length
            node = node.right
    return h, p


def _range_fp(node: Slp, lo: int, hi: int) -> int:
    h_hi, _ = _prefix_fp(node, hi)
    h_lo, _ = _prefix_fp(node, lo)
    return (h_hi - h_lo * pow(_BASE, hi - lo, _MOD)) % _MOD


# ---------------------------------------------------------------------------
# equality


def slp_eq(s1: Optional[Slp], s2: Optional[Slp]) -> bool:
    """Exact equality of the derived words."""
    if s1 is s2:
        return True
    if s1 is None or s2 is None:
        return False
    if s1.length != s2.length:
        return False
    if s1.length <= EXPAND_EQ_LIMIT:
        return expand_code(s1) == expand_code(s2)
    if _fp(s1) != _fp(s2):
        return False
    return recompression_eq(s1, s2)


def _range_eq(x: Slp, xlo: int, y: Slp, ylo: int, n: int) -> bool:
    """x[xlo:xlo+n] == y[ylo:ylo+n], exact."""
    if n <= 0:
        return True
    if n <= EXPAND_EQ_LIMIT:
        return _window(x, xlo, xlo + n) == _window(y, ylo, ylo + n)
    if _range_fp(x, xlo, xlo + n) != _range_fp(y, ylo, ylo + n):
        return False
    return recompression_eq(sub(x, xlo, xlo + n), sub(y, ylo, ylo + n))


def _window(node: Slp, lo: int, hi: int) -> str:
    return expand_code(sub(node, lo, hi))


def recompression_eq(s1: Slp, s2: Slp) -> bool:
    """Deterministic equality test by recompression."""
    if s1.length != s2.length:
        return False
    g = _Grammar([s1, s2])
    return g.run(s1.length)


class _Grammar:
    """Shared grammar for recompression.

    Rule bodies are lists whose items are either nonterminal ids (int) or
    letter runs ``(letter, count)``.  The two roots are never popped.
    """

    def __init__(self, roots):
        nodes = _nodes_postorder(roots)
        ids = {}
        self.rules = {}
        self.order = []
        for n in nodes:
            if n.code is not None:
                continue
            ids[id(n)] = len(self.order)
            self.order.append(ids[id(n)])
        for n in nodes:
            if n.code is None:
                self.rules[ids[id(n)]] = [self._item(n.left, ids), self._item(n.right, ids)]
        self.roots = []
        for r in roots:
            rid = len(self.order)
            self.order.append(rid)
            self.rules[rid] = [self._item(r, ids)]
            self.roots.append(rid)
        self.fresh = {}
        self.counter = itertools.count(0x110000)

    @staticmethod
    def _item(n, ids):
        return (ord(n.code), 1) if n.code is not None else ids[id(n)]

    def letter(self, key):
        c = self.fresh.get(key)
        if c is None:
            c = self.fresh[key] = next(self.counter)
        return c

    def run(self, length: int) -> bool:
        # every round shortens the words by a constant factor
        for _ in range(4 * length.bit_length() + 16):
            r1, r2 = (self.rules[r] for r in self.roots)
            if all(isinstance(it, tuple) for it in r1 + r2):
                return _merge_runs(r1) == _merge_runs(r2)
            self.block_phase()
            if not self.lengths_agree():
                return False
            self.pair_phase()
            if not self.lengths_agree():
                return False
        raise RuntimeError("recompression did not converge")

    def lengths_agree(self) -> bool:
        length = {}
        for x in self.order:
            total = 0
            for it in self.rules[x]:
                total += it[1] if isinstance(it, tuple) else length[it]
            length[x] = total
        return length[self.roots[0]] == length[self.roots[1]]

    def _substitute(self, body, pre, suf, gone):
        out = []
        for it in body:
            if isinstance(it, tuple):
                out.append(it)
            elif it in gone:
                out.extend(gone[it])
            else:
                if it in pre:
                    out.append(pre[it])
                out.append(it)
                if it in suf:
                    out.append(suf[it])
        return out

    def _finish(self, gone):
        self.order = [x for x in self.order if x not in gone]
        for x in gone:
            del self.rules[x]

    def block_phase(self):
        pre, suf, gone = {}, {}, {}
        roots = set(self.roots)
        for x in self.order:
            body = _merge_runs(self._substitute(self.rules[x], pre, suf, gone))
            if x not in roots:
                first = body.pop(0)
                if not body:
                    gone[x] = [first]
                    continue
                last = body.pop()
                if not body:
                    gone[x] = [first, last]
                    continue
                pre[x] = first
                suf[x] = last
            self.rules[x] = body
        self._finish(gone)
        for x in self.order:
            self.rules[x] = [
                (self.letter(("run",) + it), 1) if isinstance(it, tuple) and it[1] > 1 else it
                for it in self.rules[x]
            ]

    def _ends(self):
        first, last = {}, {}
        for x in self.order:
            body = self.rules[x]
            a, b = body[0], body[-1]
            first[x] = a[0] if isinstance(a, tuple) else first[a]
            last[x] = b[0] if isinstance(b, tuple) else last[b]
        return first, last

    def _partition(self, first, last):
        occ = {x: 0 for x in self.order}
        for r in self.roots:
            occ[r] = 1
        for x in reversed(self.order):
            for it in self.rules[x]:
                if not isinstance(it, tuple):
                    occ[it] += occ[x]
        weight = {}
        for x in self.order:
            body = self.rules[x]
            for u, v in zip(body, body[1:]):
                a = u[0] if isinstance(u, tuple) else last[u]
                b = v[0] if isinstance(v, tuple) else first[v]
                if a != b:
                    weight[(a, b)] = weight.get((a, b), 0) + occ[x]
        nbr = {}
        for (a, b), w in weight.items():
            nbr.setdefault(a, []).append((b, w))
            nbr.setdefault(b, []).append((a, w))
        left, right = set(), set()
        for c in sorted(nbr):
            to_left = sum(w for d, w in nbr[c] if d in left)
            to_right = sum(w for d, w in nbr[c] if d in right)
            if to_left >= to_right:
                right.add(c)
            else:
                left.add(c)
        forward = sum(w for (a, b), w in weight.items() if a in left and b in right)
        backward = sum(w for (a, b), w in weight.items() if a in right and b in left)
        if backward > forward:
            left, right = right, left
        return left, right

    def pair_phase(self):
        first, last = self._ends()
        left, right = self._partition(first, last)
        if not left or not right:
            return
        pre, suf, gone = {}, {}, {}
        roots = set(self.roots)
        for x in self.order:
            body = self._substitute(self.rules[x], pre, suf, gone)
            if x not in roots:
                popped_l = popped_r = None
                if isinstance(body[0], tuple) and body[0][0] in right:
                    popped_l = body.pop(0)
                if body and isinstance(body[-1], tuple) and body[-1][0] in left:
                    popped_r = body.pop()
                if not body:
                    gone[x] = [p for p in (popped_l, popped_r) if p is not None]
                    continue
                if popped_l is not None:
                    pre[x] = popped_l
                if popped_r is not None:
                    suf[x] = popped_r
            self.rules[x] = body
        self._finish(gone)
        for x in self.order:
            body = self.rules[x]
            out = []
            i = 0
            while i < len(body):
                it = body[i]
                if (i + 1 < len(body) and isinstance(it, tuple) and it[0] in left
                        and isinstance(body[i + 1], tuple) and body[i + 1][0] in right):
                    out.append((self.letter(("pair", it[0], body[i + 1][0])), 1))
                    i += 2
                else:
                    out.append(it)
                    i += 1
            self.rules[x] = out


def _merge_runs(body):
    out = []
    for it in body:
        if out and isinstance(it, tuple) and isinstance(out[-1], tuple) and out[-1][0] == it[0]:
            out[-1] = (it[0], out[-1][1] + it[1])
        else:
            out.append(it)
    return out


# ---------------------------------------------------------------------------
# longest common prefix / suffix on compressed words


def _lcp(x: Slp, xlo: int, y: Slp, ylo: int, n: int) -> int:
    """Longest common prefix of x[xlo:xlo+n] and y[ylo:ylo+n], exact."""
    if n <= 0:
        return 0
    if n <= EXPAND_EQ_LIMIT:
        a, b = _window(x, xlo, xlo + n), _window(y, ylo, ylo + n)
        k = 0
        while k < n and a[k] == b[k]:
            k += 1
        return k
    # binary search on fingerprints, then confirm exactly
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _range_fp(x, xlo, xlo + mid) == _range_fp(y, ylo, ylo + mid):
            lo = mid
        else:
            hi = mid - 1
    if _range_eq(x, xlo, y, ylo, lo) and (
            lo == n or _code_at(x, xlo + lo) != _code_at(y, ylo + lo)):
        return lo
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _range_eq(x, xlo, y, ylo, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _lcs(x: Slp, xhi: int, y: Slp, yhi: int, n: int) -> int:
    """Longest common suffix of x[xhi-n:xhi] and y[yhi-n:yhi], exact."""
    if n <= 0:
        return 0
    if n <= EXPAND_EQ_LIMIT:
        a, b = _window(x, xhi - n, xhi), _window(y, yhi - n, yhi)
        k = 0
        while k < n and a[n - 1 - k] == b[n - 1 - k]:
            k += 1
        return k
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _range_fp(x, xhi - mid, xhi) == _range_fp(y, yhi - mid, yhi):
            lo = mid
        else:
            hi = mid - 1
    if _range_eq(x, xhi - lo, y, yhi - lo, lo) and (
            lo == n or _code_at(x, xhi - lo - 1) != _code_at(y, yhi - lo - 1)):
        return lo
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _range_eq(x, xhi - mid, y, yhi - mid, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


# ---------------------------------------------------------------------------
# factor


class _Prog:
    """Arithmetic progression start, start+diff, ... with `count` elements."""

    __slots__ = ("start", "diff", "count")

    def __init__(self, start=0, diff=0, count=0):
        self.start, self.diff, self.count = start, diff, count

    @property
    def last(self):
        return self.start + (self.count - 1) * self.diff

    def __contains__(self, v):
        if self.count == 0 or v < self.start or v > self.last:
            return False
        if self.count == 1:
            return v == self.start
        return (v - self.start) % self.diff == 0

    def elements(self):
        return [self.start + j * self.diff for j in range(self.count)]

    def __eq__(self, other):
        return (isinstance(other, _Prog) and self.count == other.count
                and (self.count == 0 or self.elements()[:2] + [self.last]
                     == other.elements()[:2] + [other.last]))

    def __repr__(self):
        return f"_Prog({self.start}, {self.diff}, {self.count})"


_EMPTY = _Prog()


def _single(v):
    return _Prog(v, 0, 1)


def _union(progs) -> _Prog:
    # the union is known to be an arithmetic progression
    progs = [p for p in progs if p.count]
    if not progs:
        return _EMPTY
    m1 = min(p.start for p in progs)
    m2 = None
    for p in progs:
        if p.start > m1:
            cand = p.start
        elif p.count >= 2:
            cand = p.start + p.diff
        else:
            continue
        if m2 is None or cand < m2:
            m2 = cand
    top = max(p.last for p in progs)
    if m2 is None:
        return _single(m1)
    d = m2 - m1
    return _Prog(m1, d, (top - m1) // d + 1)


def _from_list(positions) -> _Prog:
    positions = sorted(positions)
    if not positions:
        return _EMPTY
    if len(positions) == 1:
        return _single(positions[0])
    d = positions[1] - positions[0]
    return _Prog(positions[0], d, len(positions))


class _Matcher:
    """Occurrences of pattern nodes crossing the cut of text nodes."""

    def __init__(self):
        self.memo = {}

    def crossing(self, x: Slp, y: Slp) -> _Prog:
        key = (id(x), id(y))
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        # iterative evaluation of the dependencies (x.left, y), (x.right, y)
        stack = [(x, y)]
        while stack:
            px, py = stack[-1]
            k = (id(px), id(py))
            if k in self.memo:
                stack.pop()
                continue
            need = []
            if not self._direct(px, py) and px.code is None:
                for child in (px.left, px.right):
                    if (id(child), id(py)) not in self.memo:
                        need.append((child, py))
            if need:
                stack.extend(need)
                continue
            self.memo[k] = (self._compute(px, py), px, py)
            stack.pop()
        return self.memo[key][0]

    @staticmethod
    def _direct(x, y):
        return x.code is not None or y.code is not None or 2 * x.length <= DIRECT_WINDOW

    def _compute(self, x: Slp, y: Slp) -> _Prog:
        if x.code is not None or y.code is not None:
            return _EMPTY
        c = y.left.length
        m = x.length
        ylen = y.length
        if m > ylen:
            return _EMPTY
        lo = max(0, c - m + 1)
        hi = min(ylen, c + m - 1)
        if 2 * m <= DIRECT_WINDOW:
            window = _window(y, lo, hi)
            pat = expand_code(x)
            found = []
            k = window.find(pat)
            while k >= 0:
                found.append(lo + k)
                k = window.find(pat, k + 1)
            return _from_list(found)
        a = x.left.length
        b = x.right.length
        parts = []
        # split point of x on the cut
        i = c - a
        if i >= 0 and i + m <= ylen and _range_eq(x, 0, y, i, m):
            parts.append(_single(i))
        # cut strictly inside x.left
        occ = self.memo[(id(x.left), id(y))][0]
        if occ.count:
            parts.append(self._extend_right(x, y, occ, a, b))
        # cut strictly inside x.right
        occ = self.memo[(id(x.right), id(y))][0]
        if occ.count:
            parts.append(self._extend_left(x, y, occ, a, b))
        return _union(parts)

    def _extend_right(self, x, y, occ, a, b):
        # occ: positions of x.left crossing the cut; keep those followed by x.right
        m = a + b
        ylen = y.length
        if occ.count == 1:
            i = occ.start
            if i + m <= ylen and _range_eq(x, a, y, i + a, b):
                return _single(i)
            return _EMPTY
        d = occ.diff
        s = occ.start
        rho_x = _lcp(x, a, x, a - d, b)
        run_end = s + d + _lcp(y, s + d, y, s, ylen - s - d)
        if rho_x == b:
            if run_end - m - s < 0:
                return _EMPTY
            cnt = min(occ.count, (run_end - m - s) // d + 1)
            return _Prog(s, d, cnt) if cnt > 1 else _single(s)
        i = run_end - a - rho_x
        if i in occ and i + m <= ylen and _range_eq(x, 0, y, i, m):
            return _single(i)
        return _EMPTY

    def _extend_left(self, x, y, occ, a, b):
        # occ: positions of x.right crossing the cut; keep those preceded by x.left
        m = a + b
        if occ.count == 1:
            t = occ.start
            if t - a >= 0 and _range_eq(x, 0, y, t - a, a):
                return _single(t - a)
            return _EMPTY
        d = occ.diff
        e = occ.last + b
        lam_x = _lcs(x, a, x, a + d, a)
        run_start = e - d - _lcs(y, e - d, y, e, e - d)
        if lam_x == a:
            first = run_start + a
            # smallest element of occ that is >= first
            if first <= occ.start:
                j0 = 0
            else:
                j0 = -(-(first - occ.start) // d)
            if j0 >= occ.count:
                return _EMPTY
            cnt = occ.count - j0
            t0 = occ.start + j0 * d
            return _Prog(t0 - a, d, cnt) if cnt > 1 else _single(t0 - a)
        t = run_start + lam_x
        if t in occ and t - a >= 0 and _range_eq(x, 0, y, t - a, m):
            return _single(t - a)
        return _EMPTY


def slp_factor(p: Slp, t: Slp) -> bool:
    """Does val(p) occur as a factor of val(t)?"""
    m, n = p.length, t.length
    if m > n:
        return False
    if n <= EXPAND_FACTOR_LIMIT:
        return expand_code(p) in expand_code(t)
    if m == n:
        return slp_eq(p, t)
    if m == 1:
        return any(node.code == p.code for node in _nodes_postorder([t]) if node.code is not None)
    matcher = _Matcher()
    for node in _nodes_postorder([t]):
        if node.code is None and node.length >= m and matcher.crossing(p, node).count:
            return True
    return False


def factor_positions(p: Slp, t: Slp) -> list:
    """All 0-based occurrence positions of p in t using the compressed matcher (for testing)."""
    out = set()
    if p.length > t.length:
        return []
    if p.length == 1:
        s = expand_code(t)
        return [i for i, ch in enumerate(s) if ch == p.code]
    matcher = _Matcher()
    # positions relative to t: walk every path, so only for small t
    stack = [(t, 0)]
    while stack:
        node, off = stack.pop()
        if node.code is not None or node.length < p.length:
            continue
        for v in matcher.crossing(p, node).elements():
            out.add(off + v)
        stack.append((node.left, off))
        stack.append((node.right, off + node.left.length))
    return sorted(out)
