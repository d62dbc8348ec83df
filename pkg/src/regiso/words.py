"""Succinct expression systems (SES) for regular words and primitive words.

An SES assigns to every variable an expression built from terminal symbols,
variables, concatenation, omega (``X^omega``), omega-bar (``X^omegabar``)
and the dense shuffle (``[X, Y, ...]^eta``).  The variable dependency
relation is acyclic, so every variable denotes one countable colored linear
order ("regular word").

A word is primitive when it is isomorphic to one of

* ``v`` (finite),
* ``v w^omega`` (right ray),
* ``u^omegabar v`` (left ray),
* ``u^omegabar v w^omega`` (bi-ray),
* ``G^eta`` (dense shuffle of the letter set G).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import gcd
from typing import Optional

from .automata import Alphabet
from .errors import InvalidInput
from .slp import (
    Slp, expand_code, slp_concat, slp_eq, slp_expand, slp_factor, slp_leaf, slp_length, slp_power,
    sub,
)

# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Symbol:
    token: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Concat:
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if not self.items:
            raise InvalidInput("empty concatenation")


@dataclass(frozen=True)
class Omega:
    child: object


@dataclass(frozen=True)
class OmegaBar:
    child: object


@dataclass(frozen=True)
class Shuffle:
    items: tuple

    def __post_init__(self):
        seen = []
        for it in self.items:
            if it not in seen:
                seen.append(it)
        object.__setattr__(self, "items", tuple(seen))
        if not self.items:
            raise InvalidInput("empty shuffle")


ATOMS = (Symbol, Var)


def children(e):
    if isinstance(e, (Concat, Shuffle)):
        return e.items
    if isinstance(e, (Omega, OmegaBar)):
        return (e.child,)
    return ()


def variables_in(e) -> list:
    out = []
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if x.name not in out:
                out.append(x.name)
        else:
            stack.extend(reversed(children(x)))
    return out


def rename_vars(e, m: dict):
    """Copy of e with every variable x replaced by m[x]."""
    if isinstance(e, Var):
        return Var(m[e.name])
    if isinstance(e, Concat):
        return Concat([rename_vars(x, m) for x in e.items])
    if isinstance(e, Shuffle):
        return Shuffle([rename_vars(x, m) for x in e.items])
    if isinstance(e, Omega):
        return Omega(rename_vars(e.child, m))
    if isinstance(e, OmegaBar):
        return OmegaBar(rename_vars(e.child, m))
    return e


def symbols_in(e) -> set:
    out = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, Symbol):
            out.add(x.token)
        else:
            stack.extend(children(x))
    return out


@dataclass(frozen=True)
class Ses:
    alphabet: Alphabet
    rhs: dict = field(hash=False)
    start: Optional[str] = None

    def __post_init__(self):
        for x, e in self.rhs.items():
            for y in variables_in(e):
                if y not in self.rhs:
                    raise InvalidInput(f"variable {y!r} used in {x!r} is not defined")
            for s in symbols_in(e):
                if s not in self.alphabet:
                    raise InvalidInput(f"symbol {s!r} in {x!r} is not in the alphabet")
        if self.start is not None and self.start not in self.rhs:
            raise InvalidInput(f"start variable {self.start!r} is not defined")
        self.order()

    @property
    def variables(self) -> list:
        return list(self.rhs)

    def order(self) -> list:
        """Variables with dependencies first; raises InvalidInput on cycles."""
        done = {}
        out = []
        for root in self.rhs:
            if root in done:
                continue
            stack = [(root, iter(variables_in(self.rhs[root])))]
            done[root] = 1
            while stack:
                v, it = stack[-1]
                for w in it:
                    state = done.get(w)
                    if state == 1:
                        raise InvalidInput(f"cyclic definition through {w!r}")
                    if state is None:
                        done[w] = 1
                        stack.append((w, iter(variables_in(self.rhs[w]))))
                        break
                else:
                    stack.pop()
                    done[v] = 2
                    out.append(v)
        return out

    def reachable(self, roots) -> list:
        seen = []
        stack = list(roots)
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.append(v)
            stack.extend(variables_in(self.rhs[v]))
        return seen

    def fresh_name(self, base: str, taken=()) -> str:
        k = 1
        while True:
            name = f"{base}_{k}"
            if name not in self.rhs and name not in taken:
                return name
            k += 1


# ---------------------------------------------------------------------------
# text format

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<sym>'(?:[^'\\]|\\.)*')
  | (?P<post>\^\s*(?:omegabar|omega|eta))
  | (?P<name>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[()\[\],])
""", re.VERBOSE)


def _lex(text: str, lineno: int) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InvalidInput(f"line {lineno}: unexpected character {text[pos]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind == "ws":
            continue
        val = m.group(kind)
        if kind == "sym":
            val = re.sub(r"\\(.)", r"\1", val[1:-1])
        elif kind == "post":
            val = val[1:].strip()
        out.append((kind, val))
    return out


class _Parser:
    def __init__(self, tokens, lineno):
        self.toks = tokens
        self.i = 0
        self.lineno = lineno

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, val=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (val and tok[1] != val):
            want = val or kind or "token"
            raise InvalidInput(f"line {self.lineno}: expected {want}, got {tok[1]!r}")
        self.i += 1
        return tok

    def concat(self, stop):
        items = []
        while True:
            kind, val = self.peek()
            if kind is None or (kind == "punct" and val in stop):
                break
            items.append(self.atom())
        if not items:
            raise InvalidInput(f"line {self.lineno}: empty expression")
        return items[0] if len(items) == 1 else Concat(items)

    def atom(self):
        kind, val = self.take()
        if kind == "sym":
            node = Symbol(val)
        elif kind == "name":
            node = Var(val)
        elif kind == "punct" and val == "(":
            node = self.concat({")"})
            self.take("punct", ")")
        elif kind == "punct" and val == "[":
            parts = [self.concat({",", "]"})]
            while self.peek() == ("punct", ","):
                self.take()
                parts.append(self.concat({",", "]"}))
            self.take("punct", "]")
            self.take("post", "eta")
            node = Shuffle(parts)
        else:
            raise InvalidInput(f"line {self.lineno}: unexpected {val!r}")
        while self.peek()[0] == "post":
            _, op = self.peek()
            if op == "eta":
                raise InvalidInput(f"line {self.lineno}: ^eta needs a bracketed list")
            self.take()
            node = Omega(node) if op == "omega" else OmegaBar(node)
        return node


def parse_ses(text: str) -> Ses:
    alphabet = None
    start = None
    rhs = {}
    header = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not header:
            if line != "ses":
                raise InvalidInput(f"line {lineno}: expected header 'ses'")
            header = True
            continue
        if line.startswith("alphabet:"):
            alphabet = Alphabet(tuple(line[len("alphabet:"):].split()))
            continue
        if line.startswith("start:"):
            start = line[len("start:"):].strip() or None
            continue
        if "=" not in line:
            raise InvalidInput(f"line {lineno}: expected 'Var = expression'")
        name, expr = line.split("=", 1)
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_.]*", name):
            raise InvalidInput(f"line {lineno}: bad variable name {name!r}")
        if name in rhs:
            raise InvalidInput(f"line {lineno}: variable {name!r} defined twice")
        p = _Parser(_lex(expr, lineno), lineno)
        rhs[name] = p.concat(set())
    if not header:
        raise InvalidInput("missing header 'ses'")
    if alphabet is None:
        syms = []
        for e in rhs.values():
            syms.extend(sorted(symbols_in(e) - set(syms)))
        alphabet = Alphabet(tuple(syms) or ("a",))
    return Ses(alphabet, rhs, start)


def format_expr(e) -> str:
    if isinstance(e, Symbol):
        return "'" + e.token.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Concat):
        return " ".join(_wrap(x) for x in e.items)
    if isinstance(e, Omega):
        return _wrap(e.child, True) + "^omega"
    if isinstance(e, OmegaBar):
        return _wrap(e.child, True) + "^omegabar"
    if isinstance(e, Shuffle):
        return "[" + ", ".join(format_expr(x) for x in e.items) + "]^eta"
    raise TypeError(e)


def _wrap(e, tight=False):
    s = format_expr(e)
    if isinstance(e, Concat) and (tight or len(e.items) > 1):
        return "(" + s + ")" if tight else s
    return s


def format_ses(s: Ses) -> str:
    lines = ["ses", "alphabet: " + " ".join(s.alphabet)]
    if s.start is not None:
        lines.append(f"start: {s.start}")
    for x, e in s.rhs.items():
        lines.append(f"{x} = {format_expr(e)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# normal form


def is_normal_rhs(e) -> bool:
    if isinstance(e, ATOMS):
        return True
    if isinstance(e, (Concat, Shuffle)):
        return all(isinstance(x, ATOMS) for x in e.items)
    if isinstance(e, (Omega, OmegaBar)):
        return isinstance(e.child, ATOMS)
    return False


def is_normal(s: Ses) -> bool:
    return all(is_normal_rhs(e) for e in s.rhs.values())


def normalize_ses(s: Ses) -> Ses:
    """Equivalent SES whose right-hand sides are atom lists, Y^omega, Y^omegabar or [Y, ...]^eta."""
    if is_normal(s):
        return s
    out = {}
    taken = set(s.rhs)

    def fresh(x):
        name = s.fresh_name(x, taken)
        taken.add(name)
        return name

    def atomize(e, owner):
        # return an atom standing for e, adding definitions as needed
        if isinstance(e, ATOMS):
            return e
        name = fresh(owner)
        out[name] = shape(e, owner)
        return Var(name)

    def flatten(e):
        if isinstance(e, Concat):
            res = []
            for x in e.items:
                res.extend(flatten(x))
            return res
        return [e]

    def shape(e, owner):
        if isinstance(e, ATOMS):
            return e
        if isinstance(e, Concat):
            items = [atomize(x, owner) for x in flatten(e)]
            return items[0] if len(items) == 1 else Concat(items)
        if isinstance(e, Omega):
            return Omega(atomize(e.child, owner))
        if isinstance(e, OmegaBar):
            return OmegaBar(atomize(e.child, owner))
        if isinstance(e, Shuffle):
            return Shuffle([atomize(x, owner) for x in e.items])
        raise TypeError(e)

    for x, e in s.rhs.items():
        out[x] = shape(e, x)
    ordered = {x: out[x] for x in s.rhs}
    ordered.update({x: e for x, e in out.items() if x not in ordered})
    return Ses(s.alphabet, ordered, s.start)


def depth_height(s: Ses, x: str) -> tuple:
    """(depth, height) of variable x in a normal-form SES."""
    if not is_normal(s):
        raise InvalidInput("depth and height are defined for normal-form systems")
    dh = {}
    for v in s.order():
        e = s.rhs[v]
        subs = [dh[a.name] if isinstance(a, Var) else (0, 0) for a in children(e) or (e,)]
        d = max(p[0] for p in subs) + 1
        h = max(p[1] for p in subs)
        if isinstance(e, (Omega, OmegaBar, Shuffle)):
            h += 1
        dh[v] = (d, h)
    if x not in dh:
        raise InvalidInput(f"unknown variable {x!r}")
    return dh[x]


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class Finite:
    v: Slp


@dataclass(frozen=True)
class RightRay:
    v: Optional[Slp]
    w: Slp


@dataclass(frozen=True)
class LeftRay:
    u: Slp
    v: Optional[Slp]


@dataclass(frozen=True)
class BiRay:
    u: Slp
    v: Optional[Slp]
    w: Slp


@dataclass(frozen=True)
class Uniform:
    gamma: tuple


@dataclass(frozen=True)
class LUniform:
    a: str
    gamma: tuple


@dataclass(frozen=True)
class RUniform:
    gamma: tuple
    b: str


@dataclass(frozen=True)
class LRUniform:
    a: str
    gamma: tuple
    b: str


@dataclass(frozen=True)
class NotClassifiable:
    pass


NOT_CLASSIFIABLE = NotClassifiable()
PRIMITIVE_FORMS = (Finite, RightRay, LeftRay, BiRay, Uniform)
UNIFORM_FORMS = (Uniform, LUniform, RUniform, LRUniform)


def is_primitive(f) -> bool:
    return isinstance(f, PRIMITIVE_FORMS)


def gamma_of(symbols) -> tuple:
    return tuple(sorted(set(symbols)))


def _uparts(f):
    # (left letter or None, gamma, right letter or None) of a uniform-like form
    if isinstance(f, Uniform):
        return None, f.gamma, None
    if isinstance(f, LUniform):
        return f.a, f.gamma, None
    if isinstance(f, RUniform):
        return None, f.gamma, f.b
    return f.a, f.gamma, f.b


def _ubuild(a, gamma, b):
    if a is None and b is None:
        return Uniform(gamma)
    if b is None:
        return LUniform(a, gamma)
    if a is None:
        return RUniform(gamma, b)
    return LRUniform(a, gamma, b)


def _single_letter(f):
    if isinstance(f, Finite) and f.v.length == 1:
        return f.v.symbol
    return None


def concat_forms(f, g):
    """Form of the concatenation of two words given by forms (or NOT_CLASSIFIABLE)."""
    nc = NOT_CLASSIFIABLE
    if isinstance(f, NotClassifiable) or isinstance(g, NotClassifiable):
        return nc
    if isinstance(f, Finite):
        if isinstance(g, Finite):
            return Finite(Slp(f.v, g.v))
        if isinstance(g, RightRay):
            return RightRay(slp_concat(f.v, g.v), g.w)
        if isinstance(g, UNIFORM_FORMS):
            a, gamma, b = _uparts(g)
            c = _single_letter(f)
            if a is None and c is not None and c in gamma:
                return _ubuild(c, gamma, b)
        return nc
    if isinstance(f, LeftRay):
        if isinstance(g, Finite):
            return LeftRay(f.u, slp_concat(f.v, g.v))
        if isinstance(g, RightRay):
            return BiRay(f.u, slp_concat(f.v, g.v), g.w)
        return nc
    if isinstance(f, UNIFORM_FORMS):
        a, gamma, b = _uparts(f)
        if isinstance(g, Finite):
            c = _single_letter(g)
            if b is None and c is not None and c in gamma:
                return _ubuild(a, gamma, c)
            return nc
        if isinstance(g, UNIFORM_FORMS):
            a2, gamma2, b2 = _uparts(g)
            if gamma2 != gamma or (b is not None and a2 is not None):
                return nc
            return _ubuild(a, gamma, b2)
        return nc
    # RightRay and BiRay cannot be followed by anything
    return nc


def omega_form(f):
    if isinstance(f, Finite):
        return RightRay(None, f.v)
    if isinstance(f, Uniform):
        return f
    if isinstance(f, RUniform):
        return Uniform(f.gamma)
    if isinstance(f, LUniform):
        return f
    return NOT_CLASSIFIABLE


def omegabar_form(f):
    if isinstance(f, Finite):
        return LeftRay(f.v, None)
    if isinstance(f, Uniform):
        return f
    if isinstance(f, LUniform):
        return Uniform(f.gamma)
    if isinstance(f, RUniform):
        return f
    return NOT_CLASSIFIABLE


def shuffle_form(forms):
    letters = []
    gammas = set()
    for f in forms:
        c = _single_letter(f)
        if c is not None:
            letters.append(c)
        elif isinstance(f, UNIFORM_FORMS):
            gammas.add(_uparts(f)[1])
        else:
            return NOT_CLASSIFIABLE
    if not gammas:
        return Uniform(gamma_of(letters))
    if len(gammas) > 1:
        return NOT_CLASSIFIABLE
    gamma = next(iter(gammas))
    if all(c in gamma for c in letters):
        return Uniform(gamma)
    return NOT_CLASSIFIABLE


def expr_form(e, forms):
    if isinstance(e, Symbol):
        return Finite(slp_leaf(e.token))
    if isinstance(e, Var):
        return forms[e.name]
    if isinstance(e, Concat):
        f = expr_form(e.items[0], forms)
        for x in e.items[1:]:
            if isinstance(f, NotClassifiable):
                return f
            f = concat_forms(f, expr_form(x, forms))
        return f
    if isinstance(e, Omega):
        return omega_form(expr_form(e.child, forms))
    if isinstance(e, OmegaBar):
        return omegabar_form(expr_form(e.child, forms))
    if isinstance(e, Shuffle):
        return shuffle_form([expr_form(x, forms) for x in e.items])
    raise TypeError(e)


def classify_primitive(s: Ses, known: Optional[dict] = None) -> dict:
    """Form of every variable, bottom-up along the dependency order.

    `known` may pre-assign forms to some variables (used for letters of a
    lower level in two-level systems).
    """
    forms = dict(known or {})
    for x in s.order():
        if x in forms:
            continue
        forms[x] = expr_form(s.rhs[x], forms)
    return forms


def form_words(f) -> dict:
    """Finite components of a primitive form (for display and testing)."""
    out = {}
    for k in ("u", "v", "w"):
        if hasattr(f, k):
            out[k] = getattr(f, k)
    return out


def format_form(f) -> str:
    def w(x):
        if x is None:
            return ""
        if x.length <= 60:
            return "".join(map(str, slp_expand(x)))
        return f"<{x.length} letters>"
    if isinstance(f, Finite):
        return f"Finite({w(f.v)})"
    if isinstance(f, RightRay):
        return f"RightRay({w(f.v)}, {w(f.w)})"
    if isinstance(f, LeftRay):
        return f"LeftRay({w(f.u)}, {w(f.v)})"
    if isinstance(f, BiRay):
        return f"BiRay({w(f.u)}, {w(f.v)}, {w(f.w)})"
    if isinstance(f, Uniform):
        return "Uniform{" + ",".join(f.gamma) + "}"
    if isinstance(f, LUniform):
        return f"LUniform({f.a}, {{{','.join(f.gamma)}}})"
    if isinstance(f, RUniform):
        return f"RUniform({{{','.join(f.gamma)}}}, {f.b})"
    if isinstance(f, LRUniform):
        return f"LRUniform({f.a}, {{{','.join(f.gamma)}}}, {f.b})"
    return "NotClassifiable"


# ---------------------------------------------------------------------------
# equality of primitive words


def _sq(x):
    return Slp(x, x)


def biray_eq(u1, v1, w1, u2, v2, w2) -> bool:
    """Is u1^omegabar v1 w1^omega isomorphic to u2^omegabar v2 w2^omega? All six words of one length."""
    parts = (u1, v1, w1, u2, v2, w2)
    if any(p is None for p in parts):
        raise InvalidInput("biray_eq needs nonempty words")
    n = u1.length
    if any(p.length != n for p in parts):
        raise InvalidInput("biray_eq needs six words of equal length")
    if n * 7 <= 4096:
        return _biray_eq_small(*(expand_code(p) for p in parts))
    ww1, ww2 = _sq(w1), _sq(w2)
    uu1, uu2 = _sq(u1), _sq(u2)
    if slp_factor(slp_concat(u2, v2, ww2), slp_concat(uu1, v1, ww1)):
        return True
    if slp_factor(slp_concat(u1, v1, ww1), slp_concat(uu2, v2, ww2)):
        return True
    if slp_eq(v1, w1) and slp_eq(u2, v2) and slp_factor(Slp(u2, ww2), Slp(uu1, ww1)):
        return True
    if slp_eq(u1, v1) and slp_eq(v2, w2) and slp_factor(Slp(u1, ww1), Slp(uu2, ww2)):
        return True
    return False


def _biray_eq_small(u1, v1, w1, u2, v2, w2) -> bool:
    # the same four conditions on explicit strings
    ww1, ww2 = w1 + w1, w2 + w2
    if u2 + v2 + ww2 in u1 + u1 + v1 + ww1:
        return True
    if u1 + v1 + ww1 in u2 + u2 + v2 + ww2:
        return True
    if v1 == w1 and u2 == v2 and u2 + ww2 in u1 + u1 + ww1:
        return True
    if u1 == v1 and v2 == w2 and u1 + ww1 in u2 + u2 + ww2:
        return True
    return False


def _lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def _stretch(x: Slp, target: int) -> Slp:
    # x repeated to length target (a multiple of |x|)
    k = target // x.length
    return x if k == 1 else slp_power(x, k)


def _common_period(lengths, at_least) -> int:
    base = _lcm(*lengths)
    reps = max(1, -(-at_least // base))
    return base * reps


def _rotate_into_prefix(v: Optional[Slp], w: Slp, k: int):
    """v w^omega == (v + w[:k]) (w[k:] + w[:k])^omega."""
    if k == 0:
        return v, w
    n = w.length
    head = sub(w, 0, k)
    return slp_concat(v, head), slp_concat(sub(w, k, n), head)


def _rotate_into_suffix(u: Slp, v: Optional[Slp], k: int):
    """u^omegabar v == (u[n-k:] + u[:n-k])^omegabar (u[n-k:] + v)."""
    if k == 0:
        return u, v
    n = u.length
    tail = sub(u, n - k, n)
    return slp_concat(tail, sub(u, 0, n - k)), slp_concat(tail, v)


def _opt_eq(x, y) -> bool:
    if x is None or y is None:
        return x is None and y is None
    return slp_eq(x, y)


def primitive_eq(f1, f2) -> bool:
    """Isomorphism of two primitive words given by their forms."""
    if not (is_primitive(f1) and is_primitive(f2)):
        raise InvalidInput("primitive_eq needs primitive forms")
    if type(f1) is not type(f2):
        return False
    if isinstance(f1, Finite):
        return slp_eq(f1.v, f2.v)
    if isinstance(f1, Uniform):
        return set(f1.gamma) == set(f2.gamma)
    if isinstance(f1, RightRay):
        k1, k2 = slp_length(f1.v), slp_length(f2.v)
        ell = _common_period([f1.w.length, f2.w.length], max(k1, k2))
        v1, w1 = f1.v, _stretch(f1.w, ell)
        v2, w2 = f2.v, _stretch(f2.w, ell)
        if k1 <= k2:
            v1, w1 = _rotate_into_prefix(v1, w1, k2 - k1)
        else:
            v2, w2 = _rotate_into_prefix(v2, w2, k1 - k2)
        return _opt_eq(v1, v2) and slp_eq(w1, w2)
    if isinstance(f1, LeftRay):
        k1, k2 = slp_length(f1.v), slp_length(f2.v)
        ell = _common_period([f1.u.length, f2.u.length], max(k1, k2))
        u1, v1 = _stretch(f1.u, ell), f1.v
        u2, v2 = _stretch(f2.u, ell), f2.v
        if k1 <= k2:
            u1, v1 = _rotate_into_suffix(u1, v1, k2 - k1)
        else:
            u2, v2 = _rotate_into_suffix(u2, v2, k1 - k2)
        return _opt_eq(v1, v2) and slp_eq(u1, u2)
    # bi-ray
    k1, k2 = slp_length(f1.v), slp_length(f2.v)
    ell = _common_period([f1.u.length, f2.u.length, f1.w.length, f2.w.length], max(k1, k2, 1))
    sides = []
    for f, k in ((f1, k1), (f2, k2)):
        u = _stretch(f.u, ell)
        w = _stretch(f.w, ell)
        # move the first ell-k letters of w into v
        v, w = _rotate_into_prefix(f.v, w, ell - k)
        sides.append((u, v, w))
    (u1, v1, w1), (u2, v2, w2) = sides
    return biray_eq(u1, v1, w1, u2, v2, w2)
