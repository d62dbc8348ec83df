"""Block calculus, two-level systems and the isomorphism deciders for regular words.

A primitive word consists of a single block.  Sequences of primitive words
are simplified by the rewriting system R:

* ``(G^eta, a, G^eta) -> G^eta`` for a letter a of G,
* ``(u, v) -> uv`` when u has a greatest and v a least element,
* ``(G^eta, G^eta) -> G^eta``.

A two-level system splits the variables of an SES into a lower part whose
values are pairwise distinct primitive words and an upper part over the
lower variables as letters.  The main step turns an SES into a proper
two-level system; iterating it on the upper part strictly lowers the height
of the compared variables until one of them becomes primitive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .automata import Alphabet, Dfa, PartitionedDfa, accessible_states, coaccessible_states, trim
from .errors import InvalidInput, ResourceLimit
from .heilbrunner import heilbrunner_expression
from .treeiso import _disjoint_union, _rooted, k_automaton
from .words import (
    ATOMS, Concat, Finite, LeftRay, Omega, OmegaBar, RightRay, Ses, Shuffle, Symbol, Uniform, Var,
    children, classify_primitive, concat_forms, expr_form, format_expr, is_primitive,
    normalize_ses, primitive_eq, rename_vars, variables_in,
)

# height bookkeeping of the main step is checked on every call when set
CHECK_HEIGHTS = True


# ---------------------------------------------------------------------------
# primitive forms and the rewriting system


class _Opaque:
    """Stands for the interior of a non-primitive word; never takes part in a merge."""

    def __repr__(self):
        return "OPAQUE"


OPAQUE = _Opaque()


def right_closed(f) -> bool:
    """Primitive word with a greatest element."""
    return isinstance(f, (Finite, LeftRay))


def left_closed(f) -> bool:
    """Primitive word with a least element."""
    return isinstance(f, (Finite, RightRay))


def _dense(f):
    return f.gamma if isinstance(f, Uniform) else None


def _letter(f):
    if isinstance(f, Finite) and f.v.length == 1:
        return f.v.symbol
    return None


def _pair_rule(f, g):
    if not (is_primitive(f) and is_primitive(g)):
        return None
    if right_closed(f) and left_closed(g):
        return "closed"
    gf = _dense(f)
    if gf is not None and gf == _dense(g):
        return "dense"
    return None


def _triple_rule(f, g, h) -> bool:
    if not (is_primitive(f) and is_primitive(g) and is_primitive(h)):
        return False
    gamma = _dense(f)
    if gamma is None or gamma != _dense(h):
        return False
    c = _letter(g)
    return c is not None and c in gamma


def merges(forms) -> bool:
    """Does a pair or triple of primitive words merge?"""
    forms = list(forms)
    if len(forms) == 2:
        return _pair_rule(*forms) is not None
    if len(forms) == 3:
        f, g, h = forms
        return (_pair_rule(f, g) is not None or _pair_rule(g, h) is not None
                or _triple_rule(f, g, h))
    raise InvalidInput("merges takes two or three forms")


def redexes(items) -> list:
    """All (position, rule) where a left-hand side of R occurs; rules are
    'closed', 'dense' (pairs) and 'absorb' (triples)."""
    out = []
    for i in range(len(items) - 1):
        r = _pair_rule(items[i], items[i + 1])
        if r:
            out.append((i, r))
    for i in range(len(items) - 2):
        if _triple_rule(items[i], items[i + 1], items[i + 2]):
            out.append((i, "absorb"))
    out.sort(key=lambda x: x[0])
    return out


def apply_redex(items, i, rule) -> list:
    items = list(items)
    if rule == "closed":
        return items[:i] + [concat_forms(items[i], items[i + 1])] + items[i + 2:]
    if rule == "dense":
        return items[:i + 1] + items[i + 2:]
    if rule == "absorb":
        return items[:i + 1] + items[i + 3:]
    raise ValueError(rule)


def rewrite_forms(items, strategy: str = "leftmost") -> list:
    """Exhaustive R-rewriting of a finite sequence, always firing the leftmost
    or the rightmost redex."""
    items = list(items)
    while True:
        rs = redexes(items)
        if not rs:
            return items
        i, rule = rs[0] if strategy == "leftmost" else max(rs, key=lambda x: x[0])
        items = apply_redex(items, i, rule)


def same_word(f, g) -> bool:
    if is_primitive(f) and is_primitive(g):
        return primitive_eq(f, g)
    return f == g


@dataclass(frozen=True)
class Blocked:
    """A non-primitive word summarized by its boundary blocks.

    head holds the forms of the first and second block (as far as they
    exist), tail those of the second-last and last block.  full lists all
    blocks when there are at most four of them.
    """
    head: tuple = ()
    tail: tuple = ()
    full: Optional[tuple] = None

    def expansion(self) -> list:
        if self.full is not None:
            return list(self.full)
        return list(self.head) + [OPAQUE] + list(self.tail)


def _expand(items) -> list:
    flat = []
    for it in items:
        flat.extend(it.expansion() if isinstance(it, Blocked) else [it])
    return flat


def sequence_merges(items) -> bool:
    """Does a finite sequence of primitive forms and Blocked summaries merge?"""
    return bool(redexes(_expand(items)))


def is_irreducible(items) -> bool:
    return not redexes(items)


def is_semi_good(items) -> bool:
    items = list(items)
    n = len(items)
    for i, it in enumerate(items):
        if not isinstance(it, Blocked):
            continue
        if it.head:
            ok = (i >= 1 and isinstance(items[i - 1], Uniform)
                  and not sequence_merges(items[i - 1:i + 1]))
            ok = ok or (i >= 2 and is_primitive(items[i - 1]) and is_primitive(items[i - 2])
                        and not sequence_merges(items[i - 2:i + 1]))
            if not ok:
                return False
        if it.tail:
            ok = (i + 1 < n and isinstance(items[i + 1], Uniform)
                  and not sequence_merges(items[i:i + 2]))
            ok = ok or (i + 2 < n and is_primitive(items[i + 1]) and is_primitive(items[i + 2])
                        and not sequence_merges(items[i:i + 3]))
            if not ok:
                return False
    return True


def is_good(items) -> bool:
    return is_irreducible(items) and is_semi_good(items)


# ---------------------------------------------------------------------------
# two-level systems


@dataclass(frozen=True)
class TecRecord:
    has_first_block: bool
    first_block_ref: Optional[str]
    has_second_block: bool
    second_block_ref: Optional[str]
    has_last_block: bool
    last_block_ref: Optional[str]
    has_second_last_block: bool
    second_last_block_ref: Optional[str]


@dataclass(frozen=True)
class BlockSeq:
    """Finite, omega-periodic or omegabar-periodic sequence of variables."""
    kind: str                   # "finite" | "omega" | "omegabar"
    prefix: tuple = ()          # finite part before the period (omega) or the whole sequence
    period: tuple = ()
    suffix: tuple = ()          # finite part after the period (omegabar)

    def __post_init__(self):
        if self.kind not in ("finite", "omega", "omegabar"):
            raise InvalidInput(f"unknown sequence kind {self.kind!r}")
        if self.kind != "finite" and not self.period:
            raise InvalidInput("periodic sequences need a nonempty period")

    def unrolled(self, copies: int = 3) -> list:
        """Finite window that contains every factor of length three."""
        if self.kind == "finite":
            return list(self.prefix)
        if self.kind == "omega":
            return list(self.prefix) + list(self.period) * copies
        return list(self.period) * copies + list(self.suffix)


def _seq_expr(refs):
    refs = list(refs)
    if not refs:
        raise InvalidInput("empty sequence")
    return Var(refs[0]) if len(refs) == 1 else Concat([Var(r) for r in refs])


def _seq_of(e):
    if isinstance(e, Var):
        return [e.name]
    if isinstance(e, Concat) and all(isinstance(x, Var) for x in e.items):
        return [x.name for x in e.items]
    return None


class TwoLevelSystem:
    """Lower variables (primitive values over the alphabet) and upper variables
    (expressions over lower and upper variables)."""

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.lo_rhs = {}
        self.lo_forms = {}
        self.up_rhs = {}
        self.tec = {}
        self._taken = set(alphabet.symbols)
        self._fused = {}
        self._words = {}
        self._fin = {}
        self._head = {}
        self._tail = {}

    # --- construction

    def fresh(self, base: str) -> str:
        k = 1
        while f"{base}{k}" in self._taken:
            k += 1
        name = f"{base}{k}"
        self._taken.add(name)
        return name

    def reserve(self, name: str):
        self._taken.add(name)

    def is_lo(self, x) -> bool:
        return x in self.lo_rhs

    def set_lo(self, x: str, rhs, form=None):
        self._taken.add(x)
        self.lo_rhs[x] = rhs
        self.lo_forms[x] = form if form is not None else expr_form(rhs, self.lo_forms)
        if not is_primitive(self.lo_forms[x]):
            raise InvalidInput(f"lower variable {x!r} is not primitive")

    def set_up(self, x: str, rhs):
        self._taken.add(x)
        self.up_rhs[x] = rhs
        self._fin.clear()
        self._head.clear()
        self._tail.clear()

    def add_up(self, rhs) -> str:
        x = self.fresh("U")
        self.set_up(x, rhs)
        return x

    def fuse(self, a: str, b: str) -> str:
        """Lower variable for the concatenation of two merging lower variables."""
        key = (a, b)
        if key not in self._fused:
            x = self.fresh("L")
            self.set_lo(x, Concat([Var(a), Var(b)]))
            self._fused[key] = x
        return self._fused[key]

    def word_var(self, tokens) -> str:
        """Lower variable for a finite nonempty word over the alphabet."""
        key = tuple(tokens)
        if key not in self._words:
            x = self.fresh("L")
            rhs = Symbol(key[0]) if len(key) == 1 else Concat([Symbol(t) for t in key])
            self.set_lo(x, rhs)
            self._words[key] = x
        return self._words[key]

    # --- views

    def lo_ses(self) -> Ses:
        return Ses(self.alphabet, dict(self.lo_rhs))

    def up_ses(self, start=None) -> Ses:
        """Upper part as an SES whose letters are the lower variables."""
        lo = set(self.lo_rhs)

        def lift(e):
            if isinstance(e, Var):
                return Symbol(e.name) if e.name in lo else e
            if isinstance(e, Concat):
                return Concat([lift(x) for x in e.items])
            if isinstance(e, Omega):
                return Omega(lift(e.child))
            if isinstance(e, OmegaBar):
                return OmegaBar(lift(e.child))
            if isinstance(e, Shuffle):
                return Shuffle([lift(x) for x in e.items])
            return e
        return Ses(Alphabet(tuple(self.lo_rhs)), {x: lift(e) for x, e in self.up_rhs.items()}, start)

    def flat_ses(self, start=None) -> Ses:
        """All variables over the original alphabet."""
        rhs = dict(self.lo_rhs)
        rhs.update(self.up_rhs)
        return Ses(self.alphabet, rhs, start)

    # --- block structure of upper values (the letters of uval are the blocks)

    def _finite(self, e) -> bool:
        if isinstance(e, Var):
            if e.name in self.lo_rhs:
                return True
            if e.name not in self._fin:
                self._fin[e.name] = self._finite(self.up_rhs[e.name])
            return self._fin[e.name]
        if isinstance(e, Concat):
            return all(self._finite(x) for x in e.items)
        return False

    def _heads(self, e, k, mirror) -> list:
        # first k letters of uval(e) reachable by successor steps from the minimum
        # (or last k, read backwards, when mirror is set)
        if k <= 0:
            return []
        if isinstance(e, Var):
            if e.name in self.lo_rhs:
                return [e.name]
            memo = self._tail if mirror else self._head
            key = (e.name, k)
            if key not in memo:
                memo[key] = self._heads(self.up_rhs[e.name], k, mirror)
            return memo[key]
        if isinstance(e, Concat):
            res = []
            for x in (reversed(e.items) if mirror else e.items):
                res += self._heads(x, k - len(res), mirror)
                if len(res) >= k or not self._finite(x):
                    break
            return res[:k]
        if isinstance(e, (Omega, OmegaBar)):
            if isinstance(e, OmegaBar) != mirror:
                return []
            res = []
            while len(res) < k:
                res += self._heads(e.child, k - len(res), mirror)
                if not self._finite(e.child):
                    break
            return res[:k]
        return []

    def first_blocks(self, x, k=2) -> list:
        return self._heads(Var(x), k, False)

    def last_blocks(self, x, k=2) -> list:
        return list(reversed(self._heads(Var(x), k, True)))

    def summary(self, x):
        """Primitive form of a lower variable, Blocked summary of an upper one."""
        if x in self.lo_rhs:
            return self.lo_forms[x]
        f = self.lo_forms
        if self._finite(Var(x)):
            full = self.first_blocks(x, 5)
            if len(full) <= 4:
                full = tuple(f[r] for r in full)
                return Blocked(full[:2], full[-2:], full)
        return Blocked(tuple(f[r] for r in self.first_blocks(x)),
                       tuple(f[r] for r in self.last_blocks(x)))

    def summaries(self, refs) -> list:
        return [self.summary(r) for r in refs]

    def tec_record(self, x) -> TecRecord:
        h = self.first_blocks(x)
        t = self.last_blocks(x)
        return TecRecord(
            len(h) >= 1, h[0] if h else None,
            len(h) >= 2, h[1] if len(h) >= 2 else None,
            len(t) >= 1, t[-1] if t else None,
            len(t) >= 2, t[0] if len(t) >= 2 else None,
        )


def format_two_level(sys: TwoLevelSystem) -> str:
    lines = ["# lower part"]
    lines += [f"{x} = {format_expr(e)}" for x, e in sys.lo_rhs.items()]
    lines.append("# upper part")
    lines += [f"{x} = {format_expr(e)}" for x, e in sys.up_rhs.items()]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# rewriting on variable sequences


def rewrite_normalize(seq, sys: TwoLevelSystem):
    """Irreducible normal form of a finite variable sequence under R.

    Merging right-closed/left-closed pairs get a fresh lower variable; dense
    duplicates and absorbed letters are dropped.  Upper variables are never
    rewritten.  Returns (sys, normal form); sys is extended in place.
    """
    out = []
    for r in seq:
        out.append(r)
        while True:
            if len(out) >= 3 and all(sys.is_lo(x) for x in out[-3:]) and \
                    _triple_rule(*(sys.lo_forms[x] for x in out[-3:])):
                del out[-2:]
                continue
            if len(out) >= 2 and sys.is_lo(out[-1]) and sys.is_lo(out[-2]):
                rule = _pair_rule(sys.lo_forms[out[-2]], sys.lo_forms[out[-1]])
                if rule == "dense":
                    out.pop()
                    continue
                if rule == "closed":
                    b = out.pop()
                    a = out.pop()
                    out.append(sys.fuse(a, b))
                    continue
            break
    return sys, out


def make_good(sys: TwoLevelSystem, seq, check: bool = True):
    """Equivalent good sequence for a semi-good one (fresh variables for merged pairs)."""
    seq = list(seq)
    if check and not is_semi_good(sys.summaries(seq)):
        raise InvalidInput("make_good needs a semi-good sequence")
    return rewrite_normalize(seq, sys)


def make_good_periodic(sys: TwoLevelSystem, period, direction: str = "omega"):
    """Irreducible presentation of the periodic sequence period^omega (or period^omegabar).

    Returns (sys, prefix, period') with prefix period'^omega equivalent to
    period^omega, or (sys, period', suffix) with period'^omegabar suffix
    equivalent to period^omegabar.
    """
    A = list(period)
    k = len(A)
    if k < 3:
        raise InvalidInput("make_good_periodic needs a period of length at least 3")
    if not all(sys.is_lo(x) for x in A):
        raise InvalidInput("period must consist of lower variables")
    f = [sys.lo_forms[x] for x in A]
    if redexes(f):
        raise InvalidInput("period must be irreducible")
    dense = _pair_rule(f[-1], f[0]) == "dense"
    closed = _pair_rule(f[-1], f[0]) == "closed"
    front = _triple_rule(f[-1], f[0], f[1])
    back = _triple_rule(f[-2], f[-1], f[0])
    if direction == "omega":
        if dense:
            return sys, A, A[1:]
        if closed:
            return sys, A[:-1], [sys.fuse(A[-1], A[0])] + A[1:-1]
        if front:
            return sys, A, A[2:]
        if back:
            return sys, A[:-1], A[1:-1]
        return sys, [], A
    if direction == "omegabar":
        if dense:
            return sys, A[:-1], A
        if closed:
            return sys, A[1:-1] + [sys.fuse(A[-1], A[0])], A[1:]
        if front or back:
            return sys, A[1:-1], A[1:]
        return sys, A, []
    raise InvalidInput(f"unknown direction {direction!r}")


def make_irredundant(sys: TwoLevelSystem) -> TwoLevelSystem:
    """Identify lower variables with equal values.

    The survivor of each group is the one that comes first in the dependency
    order of the lower part, so that no definition becomes cyclic.
    """
    order = sys.lo_ses().order()
    rename = {}
    survivors = {}
    for x in order:
        f = sys.lo_forms[x]
        key = _form_key(f)
        for y in survivors.get(key, []):
            if primitive_eq(sys.lo_forms[y], f):
                rename[x] = y
                break
        else:
            survivors.setdefault(key, []).append(x)
    if not rename:
        return sys

    def sub(e):
        if isinstance(e, Var):
            return Var(rename.get(e.name, e.name))
        if isinstance(e, Concat):
            return Concat([sub(x) for x in e.items])
        if isinstance(e, Omega):
            return Omega(sub(e.child))
        if isinstance(e, OmegaBar):
            return OmegaBar(sub(e.child))
        if isinstance(e, Shuffle):
            return Shuffle([sub(x) for x in e.items])
        return e
    for x in rename:
        del sys.lo_rhs[x]
        del sys.lo_forms[x]
    for x in list(sys.lo_rhs):
        sys.lo_rhs[x] = sub(sys.lo_rhs[x])
    for x in list(sys.up_rhs):
        sys.set_up(x, sub(sys.up_rhs[x]))
    sys._fused = {(rename.get(a, a), rename.get(b, b)): rename.get(v, v)
                  for (a, b), v in sys._fused.items()}
    sys._words = {k: rename.get(v, v) for k, v in sys._words.items()}
    return sys


def _form_key(f):
    # cheap invariant separating most unequal primitive words
    if isinstance(f, Finite):
        return ("F", f.v.length)
    if isinstance(f, Uniform):
        return ("G", f.gamma)
    return (type(f).__name__,)


# ---------------------------------------------------------------------------
# input shape of the main step


def _is_step_rhs(e) -> bool:
    if isinstance(e, ATOMS):
        return True
    if isinstance(e, Concat):
        if not all(isinstance(x, ATOMS) for x in e.items):
            return False
        nvars = sum(isinstance(x, Var) for x in e.items)
        return nvars <= 1 or (nvars == 2 and len(e.items) == 2)
    if isinstance(e, (Omega, OmegaBar)):
        return isinstance(e.child, ATOMS)
    if isinstance(e, Shuffle):
        return all(isinstance(x, ATOMS) for x in e.items)
    return False


def prepare_ses(s: Ses) -> Ses:
    """Equivalent SES whose right-hand sides have the input shape of the main step:
    a word, a word with one variable inside, two variables, Y^omega, Y^omegabar
    or a shuffle of atoms."""
    s = normalize_ses(s)
    if all(_is_step_rhs(e) for e in s.rhs.values()):
        return s
    rhs = {}
    taken = set(s.rhs)

    def fresh(x):
        name = s.fresh_name(x, taken)
        taken.add(name)
        return name

    for x, e in s.rhs.items():
        if _is_step_rhs(e):
            rhs[x] = e
            continue
        items = list(e.items)
        pos = [i for i, it in enumerate(items) if isinstance(it, Var)]
        # one piece per variable, carrying the letters up to the next variable
        cuts = [0] + pos[1:] + [len(items)]
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            piece = items[a:b]
            if len(piece) == 1:
                pieces.append(piece[0])
            else:
                name = fresh(x)
                rhs[name] = Concat(piece)
                pieces.append(Var(name))
        while len(pieces) > 2:
            nxt = []
            for i in range(0, len(pieces) - 1, 2):
                name = fresh(x)
                rhs[name] = Concat(pieces[i:i + 2])
                nxt.append(Var(name))
            if len(pieces) % 2:
                nxt.append(pieces[-1])
            pieces = nxt
        rhs[x] = Concat(pieces)
    ordered = {x: rhs[x] for x in s.rhs}
    ordered.update({x: e for x, e in rhs.items() if x not in ordered})
    return Ses(s.alphabet, ordered, s.start)


def ses_size(s: Ses) -> int:
    """Number of nodes over all right-hand sides."""
    total = 0
    for e in s.rhs.values():
        stack = [e]
        while stack:
            x = stack.pop()
            total += 1
            stack.extend(children(x))
    return total


# ---------------------------------------------------------------------------
# the main step


def main_step(s: Ses) -> TwoLevelSystem:
    """Proper two-level system equivalent to s on every non-primitive variable.

    Primitive variables form the lower part; every other variable of s is an
    upper variable with the same value.
    """
    for x, e in s.rhs.items():
        if not _is_step_rhs(e):
            raise InvalidInput(f"right-hand side of {x!r} does not have the main-step input shape")
    forms = classify_primitive(s)
    sys = TwoLevelSystem(s.alphabet)
    for x in s.rhs:
        sys.reserve(x)
    order = s.order()
    lo = [x for x in order if is_primitive(forms[x])]
    for x in lo:
        f = forms[x]
        if isinstance(f, Uniform):
            # a dense primitive value may be built from non-primitive parts
            items = [Symbol(c) for c in f.gamma]
            rhs = items[0] if len(items) == 1 else Shuffle(items)
        else:
            rhs = s.rhs[x]
        sys.set_lo(x, rhs, f)

    def atom_ref(a):
        return a.name if isinstance(a, Var) else sys.word_var([a.token])

    old = [x for x in order if x not in sys.lo_rhs]
    for x in old:
        e = s.rhs[x]
        if isinstance(e, (Omega, OmegaBar)):
            sys.set_up(x, type(e)(Var(atom_ref(e.child))))
        elif isinstance(e, Shuffle):
            sys.set_up(x, Shuffle([Var(atom_ref(a)) for a in e.items]))
        else:
            items = list(e.items) if isinstance(e, Concat) else [e]
            if sum(isinstance(a, Var) for a in items) == 2:
                refs = [a.name for a in items]
            else:
                refs = []
                word = []
                for a in items:
                    if isinstance(a, Symbol):
                        word.append(a.token)
                    else:
                        if word:
                            refs.append(sys.word_var(word))
                        word = []
                        refs.append(a.name)
                if word:
                    refs.append(sys.word_var(word))
            sys.set_up(x, _seq_expr(refs))

    for x in old:
        _process(sys, x)
    make_irredundant(sys)
    for x in sys.up_rhs:
        sys.tec[x] = sys.tec_record(x)
    if CHECK_HEIGHTS:
        bad = height_violations(s, sys)
        if bad:
            raise AssertionError("height bookkeeping violated: " + "; ".join(bad))
    return sys


def _substitute(sys, refs):
    out = []
    for r in refs:
        if not sys.is_lo(r):
            inner = _seq_of(sys.up_rhs[r])
            if inner is not None:
                out.extend(inner)
                continue
        out.append(r)
    return out


def _process(sys: TwoLevelSystem, x: str):
    e = sys.up_rhs[x]
    seq = _seq_of(e)
    if seq is not None:
        ups = [r for r in seq if not sys.is_lo(r)]
        _, u = make_good(sys, _substitute(sys, seq))
        if len(ups) <= 1:
            # a word of lower variables, or one upper variable with letters around it
            sys.set_up(x, _seq_expr(u))
        else:
            sys.set_up(x, _seq_expr(_restructure(sys, u)))
        return
    if isinstance(e, Shuffle):
        return
    y = e.child.name
    if isinstance(e, Omega):
        sys.set_up(x, _seq_expr(_omega_case(sys, y)))
    else:
        sys.set_up(x, _seq_expr(_omegabar_case(sys, y)))


def _restructure(sys, u):
    """Short right-hand side for a good sequence with at most two upper variables."""
    ups = [i for i, r in enumerate(u) if not sys.is_lo(r)]
    n = len(u)
    if not ups:
        if n <= 5:
            return u
        inner = sys.add_up(_seq_expr(u[2:-2]))
        return u[:2] + [inner] + u[-2:]
    if len(ups) == 1:
        p = ups[0]
        k, ell = p, n - p - 1
        if k <= 2 and ell <= 2:
            return u
        a, b = min(k, 2), min(ell, 2)
        inner = sys.add_up(_seq_expr(u[a:n - b]))
        return u[:a] + [inner] + u[n - b:]
    p, q = ups
    left = u[:p]
    head = left[:2]
    w2_seq = left[2:] + u[p:q]
    w2 = w2_seq[0] if len(w2_seq) == 1 else sys.add_up(_seq_expr(w2_seq))
    w1 = sys.add_up(_seq_expr([w2, u[q]]))
    return head + [w1] + u[q + 1:]


def _resolve_up(sys, y):
    # an upper variable that merely renames a shuffle is treated as the shuffle
    z, r = y, sys.up_rhs[y]
    while isinstance(r, Var) and not sys.is_lo(r.name):
        z = r.name
        r = sys.up_rhs[z]
    if isinstance(r, Shuffle):
        return z, r
    return y, sys.up_rhs[y]


def _omega_case(sys, y):
    if sys.is_lo(y):
        z = sys.add_up(Omega(Var(y)))
        return [y, y, z]
    y, r = _resolve_up(sys, y)
    if isinstance(r, Shuffle):
        # (shuffle)^omega is the shuffle itself
        return [y]
    seq = _seq_of(r)
    ups = [i for i, t in enumerate(seq) if not sys.is_lo(t)]
    if ups:
        p = ups[0]
        u, z, v = seq[:p], seq[p], seq[p + 1:]
        _, w = rewrite_normalize(v + u, sys)
        unit = z if not w else sys.add_up(_seq_expr([z] + w))
        return u + [sys.add_up(Omega(Var(unit)))]
    if len(seq) == 2:
        a1, a2 = seq
        f1, f2 = sys.lo_forms[a1], sys.lo_forms[a2]
        if is_irreducible([f1, f2, f1, f2, f1]):
            return [a1, a2, sys.add_up(Omega(Var(y)))]
        if right_closed(f2) and left_closed(f1):
            b = sys.fuse(a2, a1)
            return [a1, b, sys.add_up(Omega(Var(b)))]
        if _dense(f2) is not None and _letter(f1) in _dense(f2):
            # (a G^eta)^omega = a G^eta
            return [a1, a2]
        raise AssertionError("omega of a two-block word collapsed to a primitive word")
    _, prefix, period = make_good_periodic(sys, seq, "omega")
    while len(prefix) < 2:
        prefix = prefix + period
    unit = period[0] if len(period) == 1 else sys.add_up(_seq_expr(period))
    return prefix + [sys.add_up(Omega(Var(unit)))]


def _omegabar_case(sys, y):
    if sys.is_lo(y):
        z = sys.add_up(OmegaBar(Var(y)))
        return [z, y, y]
    y, r = _resolve_up(sys, y)
    if isinstance(r, Shuffle):
        return [y]
    seq = _seq_of(r)
    ups = [i for i, t in enumerate(seq) if not sys.is_lo(t)]
    if ups:
        p = ups[0]
        u, z, v = seq[:p], seq[p], seq[p + 1:]
        _, w = rewrite_normalize(v + u, sys)
        unit = z if not w else sys.add_up(_seq_expr(w + [z]))
        return [sys.add_up(OmegaBar(Var(unit)))] + v
    if len(seq) == 2:
        a1, a2 = seq
        f1, f2 = sys.lo_forms[a1], sys.lo_forms[a2]
        if is_irreducible([f1, f2, f1, f2, f1]):
            return [sys.add_up(OmegaBar(Var(y))), a1, a2]
        if right_closed(f2) and left_closed(f1):
            b = sys.fuse(a2, a1)
            return [sys.add_up(OmegaBar(Var(b))), b, a2]
        if _dense(f1) is not None and _letter(f2) in _dense(f1):
            # (G^eta a)^omegabar = G^eta a
            return [a1, a2]
        raise AssertionError("omegabar of a two-block word collapsed to a primitive word")
    _, period, suffix = make_good_periodic(sys, seq, "omegabar")
    while len(suffix) < 2:
        suffix = period + suffix
    unit = period[0] if len(period) == 1 else sys.add_up(_seq_expr(period))
    return [sys.add_up(OmegaBar(Var(unit)))] + suffix


# ---------------------------------------------------------------------------
# properness


def proper_violations(sys: TwoLevelSystem) -> list:
    """Reasons why sys is not proper (empty when it is)."""
    out = []
    los = list(sys.lo_rhs)
    for x in los:
        if not is_primitive(sys.lo_forms[x]):
            out.append(f"lower variable {x} is not primitive")
    for i, x in enumerate(los):
        for y in los[i + 1:]:
            fx, fy = sys.lo_forms[x], sys.lo_forms[y]
            if _form_key(fx) == _form_key(fy) and primitive_eq(fx, fy):
                out.append(f"lower variables {x} and {y} are equal")
    flat = None
    for x, e in sys.up_rhs.items():
        seq = _seq_of(e)
        if seq is not None:
            if sequence_merges(sys.summaries(seq)):
                out.append(f"right-hand side of {x} merges")
        elif isinstance(e, (Omega, OmegaBar)) and isinstance(e.child, Var):
            y = e.child.name
            if sequence_merges(sys.summaries([y, y, y])):
                out.append(f"{y}{y}{y} merges in {x}")
        elif isinstance(e, Shuffle) and all(isinstance(a, Var) for a in e.items):
            if flat is None:
                flat = classify_primitive(sys.flat_ses(), dict(sys.lo_forms))
            if is_primitive(flat[x]):
                out.append(f"shuffle {x} has a primitive value")
        else:
            out.append(f"right-hand side of {x} has an unexpected shape")
    return out


def validate_proper(sys: TwoLevelSystem) -> bool:
    return not proper_violations(sys)


# ---------------------------------------------------------------------------
# height bookkeeping


def _heights(s: Ses) -> dict:
    h = {}
    for x in s.order():
        e = s.rhs[x]
        sub = [h[a.name] if isinstance(a, Var) else 0 for a in (children(e) or (e,))]
        h[x] = max(sub) + (1 if isinstance(e, (Omega, OmegaBar, Shuffle)) else 0)
    return h


def _resolve(s: Ses, e):
    # follow right-hand sides that consist of a single variable
    while isinstance(e, Var) and e.name in s.rhs:
        e = s.rhs[e.name]
    return e


def _bad_base(s: Ses, h: dict, forms: dict, x: str) -> bool:
    # height one and the value is a shuffle of finite words, one of length >= 2
    if h[x] != 1:
        return False
    e = _resolve(s, s.rhs[x])
    if not isinstance(e, Shuffle):
        return False
    if not all(isinstance(a, Symbol) or h[a.name] == 0 for a in e.items):
        return False
    return any(isinstance(a, Var) and isinstance(forms[a.name], Finite)
               and forms[a.name].v.length >= 2 for a in e.items)


def bad_shape(s: Ses, reading: str = "critical") -> set:
    """Variables of bad shape.

    reading="literal": X has a chain X_1 <= ... <= X_h = X in the hierarchical
    order with height(X_i) = i whose bottom X_1 is a shuffle of finite words,
    one of length at least two.

    reading="critical" (used by the main step): the chain only follows
    subterms that realize the height, i.e. a child of equal height below a
    concatenation and a child of height one less below an operator; an omega
    power of a shuffle is not followed since it collapses to the shuffle.
    """
    h = _heights(s)
    forms = classify_primitive(s)
    bad = set()
    if reading == "literal":
        below = {}
        for x in s.order():
            reach = set()
            for y in variables_in(s.rhs[x]):
                reach.add(y)
                reach |= below[y]
            below[x] = reach
            if _bad_base(s, h, forms, x) or any(y in bad and h[y] == h[x] - 1 for y in reach):
                bad.add(x)
        return bad
    if reading != "critical":
        raise InvalidInput(f"unknown reading {reading!r}")
    for x in s.order():
        e = s.rhs[x]
        kids = [a.name for a in (children(e) or (e,)) if isinstance(a, Var)]
        if isinstance(e, (Omega, OmegaBar)):
            is_bad = bool(kids) and kids[0] in bad and \
                not isinstance(_resolve(s, s.rhs[kids[0]]), Shuffle)
        elif isinstance(e, Shuffle):
            is_bad = _bad_base(s, h, forms, x) or any(y in bad and h[y] == h[x] - 1 for y in kids)
        else:
            is_bad = any(y in bad and h[y] == h[x] for y in kids)
        if is_bad:
            bad.add(x)
    return bad


def height_violations(before: Ses, after: TwoLevelSystem, reading: str = "critical") -> list:
    """Check height accounting for every variable of `before` with a non-primitive value:
    good shape strictly lowers the height, bad shape keeps it and becomes good shape."""
    up = after.up_ses()
    hb, hc = _heights(before), _heights(up)
    bad_b, bad_c = bad_shape(before, reading), bad_shape(up, reading)
    out = []
    for x in before.rhs:
        if x not in after.up_rhs:
            continue
        if x in bad_b:
            if hc[x] != hb[x]:
                out.append(f"{x}: bad shape but height {hb[x]} -> {hc[x]}")
            if x in bad_c:
                out.append(f"{x}: still of bad shape")
        elif not hc[x] < hb[x]:
            out.append(f"{x}: good shape but height {hb[x]} -> {hc[x]}")
    return out


# ---------------------------------------------------------------------------
# deciders


def ses_disjoint_union(s1: Ses, s2: Ses):
    """Union of two SESs with source-tagged variable names; returns (ses, map1, map2)."""
    m1 = {x: f"a.{x}" for x in s1.rhs}
    m2 = {x: f"b.{x}" for x in s2.rhs}
    syms = list(s1.alphabet.symbols) + [c for c in s2.alphabet.symbols if c not in s1.alphabet]
    rhs = {m1[x]: rename_vars(e, m1) for x, e in s1.rhs.items()}
    rhs.update({m2[x]: rename_vars(e, m2) for x, e in s2.rhs.items()})
    return Ses(Alphabet(tuple(syms)), rhs), m1, m2


def _restrict(s: Ses, roots) -> Ses:
    keep = set(s.reachable(roots))
    start = s.start if s.start in keep else None
    return Ses(s.alphabet, {x: e for x, e in s.rhs.items() if x in keep}, start)


@dataclass
class IsoRun:
    verdict: bool
    rounds: int
    bound: int
    systems: list = field(default_factory=list)


def ses_iso_run(s: Ses, x: str, y: str, keep_systems: bool = False) -> IsoRun:
    """ses_iso with the number of main-step rounds and (optionally) the systems built."""
    for v in (x, y):
        if v not in s.rhs:
            raise InvalidInput(f"unknown variable {v!r}")
    cur = _restrict(prepare_ses(s), [x, y])
    bound = 2 * ses_size(cur)
    systems = []
    rounds = 0
    while True:
        forms = classify_primitive(cur)
        px, py = is_primitive(forms[x]), is_primitive(forms[y])
        if px and py:
            return IsoRun(primitive_eq(forms[x], forms[y]), rounds, bound, systems)
        if px or py:
            return IsoRun(False, rounds, bound, systems)
        if rounds >= bound:
            raise ResourceLimit(f"no primitive value after {rounds} rounds")
        sys = main_step(cur)
        rounds += 1
        if keep_systems:
            systems.append(sys)
        cur = _restrict(sys.up_ses(), [x, y])


def ses_iso(s: Ses, x: str, y: str) -> bool:
    """Is val(x) isomorphic to val(y)?"""
    return ses_iso_run(s, x, y).verdict


def ses_iso_pair(s1: Ses, x: str, s2: Ses, y: str) -> bool:
    u, m1, m2 = ses_disjoint_union(s1, s2)
    return ses_iso(u, m1[x], m2[y])


def word_iso(a1: PartitionedDfa, a2: PartitionedDfa) -> bool:
    """Isomorphism of the regular words of two partitioned DFAs."""
    s1 = heilbrunner_expression(a1)
    s2 = heilbrunner_expression(a2)
    return ses_iso_pair(s1, s1.start, s2, s2.start)


def one_color(a: Dfa, color: str = "x") -> PartitionedDfa:
    return PartitionedDfa(a, Alphabet((color,)), {q: color for q in a.finals})


def order_iso(a1: Dfa, a2: Dfa) -> bool:
    """Isomorphism of (L(a1); lex order) and (L(a2); lex order)."""
    return word_iso(one_color(a1), one_color(a2))


def _child_word(u: Dfa, p: int, cid: dict):
    """Partitioned DFA listing the children of p in order, colored by class; None for a leaf."""
    k = k_automaton(u, p, u.finals)
    if not accessible_states(k) & coaccessible_states(k):
        return None
    names = tuple(f"c{i}" for i in sorted(set(cid.values())))
    colors = {q: f"c{cid[q]}" for q in k.finals}
    return PartitionedDfa(Dfa(k.state_count, k.alphabet, k.transitions, k.initial, k.finals),
                          Alphabet(names), colors)


def ordered_tree_iso(a1: Dfa, a2: Dfa) -> bool:
    """Isomorphism of the ordered trees (L(a_i); prefix order, lex order on siblings)."""
    t1 = _rooted(a1, "first automaton")
    t2 = _rooted(a2, "second automaton")
    u, shift = _disjoint_union(t1, t2)
    classes = [sorted(u.finals)]
    for _ in range(len(u.finals) + 1):
        cid = {q: i for i, c in enumerate(classes) for q in c}
        words = {q: _child_word(u, q, cid) for q in u.finals}
        nxt = []
        for c in classes:
            groups = []
            for q in c:
                for g in groups:
                    if _same_children(words[g[0]], words[q]):
                        g.append(q)
                        break
                else:
                    groups.append([q])
            nxt.extend(groups)
        nxt.sort()
        if len(nxt) == len(classes):
            break
        classes = nxt
    cid = {q: i for i, c in enumerate(classes) for q in c}
    return cid[t1.initial] == cid[t2.initial + shift]


def _same_children(w1, w2) -> bool:
    if w1 is None or w2 is None:
        return w1 is None and w2 is None
    return word_iso(w1, w2)


def ordered_tree_iso_prefix_closed(a1: Dfa, a2: Dfa) -> bool:
    """Ordered tree isomorphism for prefix-closed DFAs by exploring pairs of states."""
    ts = []
    for a, what in ((a1, "first automaton"), (a2, "second automaton")):
        t = trim(a)
        if t.initial is None or set(range(t.state_count)) != set(t.finals):
            raise InvalidInput(f"{what}: language must be nonempty and prefix-closed")
        ts.append(t)
    t1, t2 = ts
    start = (t1.initial, t2.initial)
    seen = {start}
    stack = [start]
    while stack:
        p, q = stack.pop()
        s1, s2 = t1.successors[p], t2.successors[q]
        if len(s1) != len(s2):
            return False
        for (_, p2), (_, q2) in zip(s1, s2):
            if (p2, q2) not in seen:
                seen.add((p2, q2))
                stack.append((p2, q2))
    return True


# ---------------------------------------------------------------------------
# layered monotone circuits


@dataclass
class LayeredCircuit:
    """Monotone circuit whose gates are arranged in layers.

    kinds[i] is "input", "and" or "or"; the first layer holds the inputs, every
    later layer is uniform and each of its gates reads two gates of the layer
    directly below.  The last layer is the single output gate.
    """
    layers: list               # list of lists of gate ids
    kinds: list                # per layer
    inputs: dict               # gate -> bool for input gates, (g1, g2) otherwise

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.layers or len(self.layers) != len(self.kinds):
            raise InvalidInput("circuit needs at least one layer and one kind per layer")
        if self.kinds[0] != "input" or any(k not in ("and", "or") for k in self.kinds[1:]):
            raise InvalidInput("first layer must be input, later layers and/or")
        if len(self.layers[-1]) != 1:
            raise InvalidInput("the last layer must hold exactly one gate")
        seen = set()
        for i, layer in enumerate(self.layers):
            if not layer:
                raise InvalidInput(f"layer {i + 1} is empty")
            for g in layer:
                if g in seen:
                    raise InvalidInput(f"gate {g!r} appears twice")
                seen.add(g)
                v = self.inputs.get(g)
                if i == 0:
                    if not isinstance(v, bool):
                        raise InvalidInput(f"input gate {g!r} needs a constant")
                else:
                    below = set(self.layers[i - 1])
                    if not (isinstance(v, tuple) and len(v) == 2 and set(v) <= below):
                        raise InvalidInput(f"gate {g!r} must read two gates of layer {i}")

    @property
    def output(self):
        return self.layers[-1][0]

    def values(self) -> dict:
        val = {}
        for i, layer in enumerate(self.layers):
            for g in layer:
                if i == 0:
                    val[g] = self.inputs[g]
                else:
                    a, b = self.inputs[g]
                    val[g] = (val[a] and val[b]) if self.kinds[i] == "and" else (val[a] or val[b])
        return val

    def evaluate(self) -> bool:
        return self.values()[self.output]
